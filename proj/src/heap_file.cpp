#include "qeval/heap_file.hpp"

#include <fmt/format.h>

#include "qeval/codec.hpp"
#include "qeval/error.hpp"

namespace qeval {

HeapFile::HeapFile(PagedFile file, Schema schema, std::uint64_t tuple_count)
    : file_(std::move(file)), schema_(std::move(schema)), tuple_count_(tuple_count) {}

std::size_t HeapFile::tuples_per_page() const noexcept {
  return qeval::tuples_per_page(file_.page_size(), schema_.tuple_width());
}

// --- HeapScanner -----------------------------------------------------------

HeapScanner::HeapScanner(BufferPool& pool, const HeapFile& file, AccessMode mode)
    : pool_(pool), file_(file), mode_(mode) {}

bool HeapScanner::advance_page() {
  page_.release();
  while (next_page_ < file_.page_count()) {
    page_ = pool_.get_page(file_.file(), next_page_, mode_);
    PageReader reader(page_.bytes());
    reader.validate(file_.schema().tuple_width());
    slots_ = reader.slot_count();
    slot_ = 0;
    ++next_page_;
    if (slots_ > 0) return true;
    page_.release();
  }
  return false;
}

std::optional<Tuple> HeapScanner::next() {
  if (!page_ || slot_ >= slots_) {
    if (!advance_page()) return std::nullopt;
  }
  PageReader reader(page_.bytes());
  last_ = Rid{next_page_ - 1, slot_};
  return decode_tuple(reader.slot(slot_++), file_.schema());
}

// --- HeapAppender ----------------------------------------------------------

HeapAppender::HeapAppender(BufferPool& pool, HeapFile& file) : pool_(pool), file_(file) {
  if (file_.tuples_per_page() == 0)
    raise(ErrorKind::unsupported_tuple, fmt::format("tuple of {} bytes does not fit a {}-byte page",
                                                    file_.schema().tuple_width(), file_.file().page_size()));
  frame_ = pool_.scratch();
  std::size_t pages = file_.page_count();
  if (pages > 0) {
    // Resume the trailing page if it still has room.
    auto last = pool_.get_page(file_.file(), pages - 1, AccessMode::random);
    PageReader reader(last.bytes());
    reader.validate(file_.schema().tuple_width());
    if (reader.slot_count() < file_.tuples_per_page()) {
      auto src = last.bytes();
      std::copy(src.begin(), src.end(), frame_.mutable_bytes().begin());
      page_id_ = pages - 1;
      return;
    }
  }
  start_page();
  page_id_ = pages;
}

void HeapAppender::start_page() { PageBuilder(frame_.mutable_bytes()).reset(file_.schema().tuple_width()); }

Rid HeapAppender::append(const Tuple& t) {
  if (!frame_) raise(ErrorKind::usage, "append after finish()");
  PageBuilder builder(frame_.mutable_bytes());
  Rid rid{page_id_, builder.slot_count()};
  encode_tuple_into(t, file_.schema(), builder.next_slot());
  builder.commit();
  dirty_ = true;
  ++appended_;
  ++file_.tuple_count_;
  if (builder.full()) {
    pool_.write_page(file_.file(), page_id_, frame_.bytes());
    dirty_ = false;
    ++page_id_;
    start_page();
  }
  return rid;
}

void HeapAppender::finish() {
  if (!frame_) return;
  if (dirty_) pool_.write_page(file_.file(), page_id_, frame_.bytes());
  dirty_ = false;
  frame_.release();
}

Rid append_tuple(BufferPool& pool, HeapFile& file, const Tuple& t) {
  HeapAppender appender(pool, file);
  Rid rid = appender.append(t);
  appender.finish();
  return rid;
}

Tuple fetch_by_rid(BufferPool& pool, const HeapFile& file, Rid rid) {
  if (rid.page >= file.page_count())
    raise(ErrorKind::address, fmt::format("rid ({}, {}) beyond end of file ({} pages)", rid.page, rid.slot,
                                          file.page_count()));
  auto page = pool.get_page(file.file(), rid.page, AccessMode::random);
  PageReader reader(page.bytes());
  reader.validate(file.schema().tuple_width());
  if (rid.slot >= reader.slot_count())
    raise(ErrorKind::address, fmt::format("rid ({}, {}) names an empty slot ({} slots on page)", rid.page, rid.slot,
                                          reader.slot_count()));
  return decode_tuple(reader.slot(rid.slot), file.schema());
}

// --- TempArea --------------------------------------------------------------

TempArea::TempArea(std::filesystem::path dir, StorageGeometry geometry)
    : dir_(std::move(dir)), geometry_(geometry) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) raise(ErrorKind::io, fmt::format("cannot create temp directory '{}': {}", dir_.string(), ec.message()));
}

HeapFile TempArea::create(const Schema& schema) {
  std::filesystem::path path;
  do {
    path = dir_ / fmt::format("t{:06}.tmp", next_++);
  } while (std::filesystem::exists(path));
  return HeapFile(PagedFile::create(path, geometry_, FileKind::temp), schema, 0);
}

std::size_t TempArea::pages_on_disk() const {
  std::size_t bytes = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir_))
    if (entry.is_regular_file()) bytes += entry.file_size();
  return bytes / geometry_.page_size;
}

}  // namespace qeval
