#include "qeval/buffer_pool.hpp"

#include <algorithm>
#include <cstring>
#include <limits>
#include <utility>

#include <fmt/format.h>

#include "qeval/error.hpp"

namespace qeval {

IoStats& IoStats::operator+=(const IoStats& o) noexcept {
  page_reads += o.page_reads;
  page_writes += o.page_writes;
  read_requests += o.read_requests;
  readahead_pages += o.readahead_pages;
  temp_pages_written += o.temp_pages_written;
  return *this;
}

IoStats operator-(const IoStats& a, const IoStats& b) noexcept {
  return {a.page_reads - b.page_reads, a.page_writes - b.page_writes, a.read_requests - b.read_requests,
          a.readahead_pages - b.readahead_pages, a.temp_pages_written - b.temp_pages_written};
}

// --- PageRef ---------------------------------------------------------------

PageRef::PageRef(PageRef&& other) noexcept
    : pool_(std::exchange(other.pool_, nullptr)), frame_(other.frame_) {}

PageRef& PageRef::operator=(PageRef&& other) noexcept {
  if (this != &other) {
    release();
    pool_ = std::exchange(other.pool_, nullptr);
    frame_ = other.frame_;
  }
  return *this;
}

PageRef::~PageRef() { release(); }

std::span<const std::byte> PageRef::bytes() const { return pool_->frame_bytes(frame_); }

std::span<std::byte> PageRef::mutable_bytes() { return pool_->frame_bytes(frame_); }

void PageRef::release() noexcept {
  if (pool_ == nullptr) return;
  try {
    pool_->unpin(frame_);
  } catch (...) {
    // already unpinned by hand; nothing left to release
  }
  pool_ = nullptr;
}

// --- PinProbe --------------------------------------------------------------

PinProbe::PinProbe(BufferPool& pool) : pool_(pool), peak_(pool.pinned_frames_) { pool_.probes_.push_back(this); }

PinProbe::~PinProbe() { std::erase(pool_.probes_, this); }

// --- BufferPool ------------------------------------------------------------

BufferPool::BufferPool(PoolConfig config)
    : capacity_(config.capacity), page_size_(config.page_size), window_(config.readahead_window) {
  if (capacity_ < 3) raise(ErrorKind::usage, fmt::format("buffer pool needs at least 3 frames, got {}", capacity_));
  if (page_size_ <= kPageHeaderSize) raise(ErrorKind::usage, "page size too small");
  frames_.reserve(capacity_);
}

void BufferPool::set_capacity(std::size_t capacity) {
  if (capacity < 3) raise(ErrorKind::usage, fmt::format("buffer pool needs at least 3 frames, got {}", capacity));
  if (capacity < frames_.size()) {
    if (pinned_frames_ != 0)
      raise(ErrorKind::usage, fmt::format("cannot shrink pool to {} frames with {} pinned", capacity, pinned_frames_));
    frames_.clear();
    table_.clear();
  }
  capacity_ = capacity;
  frames_.reserve(capacity_);
}

BufferPool::Frame& BufferPool::frame_at(FrameId id) {
  if (id >= frames_.size()) raise(ErrorKind::usage, fmt::format("no frame {}", id));
  return frames_[id];
}

const BufferPool::Frame& BufferPool::frame_at(FrameId id) const {
  if (id >= frames_.size()) raise(ErrorKind::usage, fmt::format("no frame {}", id));
  return frames_[id];
}

void BufferPool::detach(Frame& f) {
  if (f.holds_page) {
    auto it = table_.find({f.file, f.page});
    if (it != table_.end() && &frames_[it->second] == &f) table_.erase(it);
  }
  f.holds_page = false;
  f.consumed = false;
  f.owner.reset();
}

std::optional<FrameId> BufferPool::claim_frame(bool demand) {
  if (frames_.size() < capacity_) {
    frames_.emplace_back();
    frames_.back().data.resize(page_size_);
    return frames_.size() - 1;
  }
  // Victim order: empty (or dead file), then consumed by least recent
  // unpin, then (demand only) unconsumed read-ahead pages.
  std::optional<FrameId> best;
  std::pair<int, std::uint64_t> best_rank{std::numeric_limits<int>::max(), 0};
  for (FrameId i = 0; i < frames_.size(); ++i) {
    const Frame& f = frames_[i];
    if (f.pins != 0) continue;
    int cls = (!f.holds_page || f.owner.expired()) ? 0 : (f.consumed ? 1 : 2);
    if (cls == 2 && !demand) continue;
    std::pair<int, std::uint64_t> rank{cls, f.tick};
    if (!best || rank < best_rank) {
      best = i;
      best_rank = rank;
    }
  }
  if (best) detach(frames_[*best]);
  return best;
}

PageRef BufferPool::get_page(const PagedFile& file, PageId page, AccessMode mode) {
  if (page >= file.page_count())
    raise(ErrorKind::address,
          fmt::format("page {} beyond end of '{}' ({} pages)", page, file.path().string(), file.page_count()));

  if (auto it = table_.find({file.id(), page}); it != table_.end()) {
    Frame& f = frames_[it->second];
    if (!f.owner.expired()) {
      f.consumed = true;
      pin(it->second);
      return PageRef(this, it->second);
    }
    detach(f);
  }

  auto demand = claim_frame(true);
  if (!demand)
    raise(ErrorKind::pool_exhausted, fmt::format("all {} frames pinned; cannot load page {} of '{}'", capacity_,
                                                 page, file.path().string()));
  std::vector<FrameId> batch{*demand};
  {
    Frame& f = frames_[*demand];
    f.holds_page = true;
    f.file = file.id();
    f.page = page;
    f.owner = file.liveness();
    f.consumed = true;
    table_[{file.id(), page}] = *demand;
  }
  pin(*demand);

  if (mode == AccessMode::sequential && window_ > 0) {
    Extent extent = file.extent_of(page);
    PageId limit = std::min<PageId>({extent.first_page + extent.length, file.page_count(), page + 1 + window_});
    for (PageId p = page + 1; p < limit; ++p) {
      if (table_.contains({file.id(), p})) break;
      auto slot = claim_frame(false);
      if (!slot) break;
      Frame& f = frames_[*slot];
      f.holds_page = true;
      f.file = file.id();
      f.page = p;
      f.owner = file.liveness();
      f.consumed = false;
      table_[{file.id(), p}] = *slot;
      batch.push_back(*slot);
    }
  }

  read_buffer_.resize(batch.size() * page_size_);
  try {
    file.read_pages(page, batch.size(), read_buffer_);
  } catch (...) {
    unpin(*demand);
    for (auto id : batch) detach(frames_[id]);
    throw;
  }
  for (std::size_t i = 0; i < batch.size(); ++i) {
    Frame& f = frames_[batch[i]];
    std::memcpy(f.data.data(), read_buffer_.data() + i * page_size_, page_size_);
    if (i > 0) f.tick = ++clock_;
  }

  IoStats delta;
  delta.page_reads = batch.size();
  delta.read_requests = 1;
  delta.readahead_pages = batch.size() - 1;
  account(file.id(), delta);
  return PageRef(this, *demand);
}

PageRef BufferPool::scratch() {
  auto id = claim_frame(true);
  if (!id) raise(ErrorKind::pool_exhausted, fmt::format("all {} frames pinned; no scratch frame", capacity_));
  Frame& f = frames_[*id];
  std::fill(f.data.begin(), f.data.end(), std::byte{0});
  pin(*id);
  return PageRef(this, *id);
}

void BufferPool::write_page(PagedFile& file, PageId page, std::span<const std::byte> bytes) {
  file.write_page(page, bytes);
  if (auto it = table_.find({file.id(), page}); it != table_.end()) {
    Frame& f = frames_[it->second];
    if (f.holds_page && !f.owner.expired()) std::memcpy(f.data.data(), bytes.data(), page_size_);
  }
  IoStats delta;
  delta.page_writes = 1;
  delta.temp_pages_written = file.is_temp() ? 1 : 0;
  account(file.id(), delta);
}

std::vector<PageId> BufferPool::flush_temp(std::span<const Page> pages, PagedFile& temp) {
  if (!temp.is_temp()) raise(ErrorKind::usage, fmt::format("'{}' is not a temp file", temp.path().string()));
  std::vector<PageId> ids;
  ids.reserve(pages.size());
  for (const auto& p : pages) {
    PageId id = temp.page_count();
    write_page(temp, id, p.bytes);
    ids.push_back(id);
  }
  return ids;
}

void BufferPool::pin(FrameId frame) {
  Frame& f = frame_at(frame);
  if (f.pins++ == 0) {
    ++pinned_frames_;
    peak_pinned_ = std::max(peak_pinned_, pinned_frames_);
    for (auto* probe : probes_) probe->peak_ = std::max(probe->peak_, pinned_frames_);
  }
}

void BufferPool::unpin(FrameId frame) {
  Frame& f = frame_at(frame);
  if (f.pins == 0) raise(ErrorKind::usage, fmt::format("unpin of frame {} with pin count 0", frame));
  if (--f.pins == 0) {
    --pinned_frames_;
    f.tick = ++clock_;
  }
}

std::uint32_t BufferPool::pin_count(FrameId frame) const { return frame_at(frame).pins; }

std::span<std::byte> BufferPool::frame_bytes(FrameId frame) { return frame_at(frame).data; }

bool BufferPool::is_resident(FileId file, PageId page) const {
  auto it = table_.find({file, page});
  return it != table_.end() && !frames_[it->second].owner.expired();
}

IoStats BufferPool::file_stats(FileId file) const {
  auto it = per_file_.find(file);
  return it == per_file_.end() ? IoStats{} : it->second;
}

IoStats* BufferPool::set_attribution(IoStats* sink) noexcept { return std::exchange(attribution_, sink); }

void BufferPool::account(FileId file, const IoStats& delta) {
  stats_ += delta;
  per_file_[file] += delta;
  if (attribution_ != nullptr) *attribution_ += delta;
}

}  // namespace qeval
