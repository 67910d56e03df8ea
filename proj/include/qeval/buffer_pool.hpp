#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "qeval/page.hpp"
#include "qeval/paged_file.hpp"

namespace qeval {

/// Page-level I/O counters. A read request is one positioned read of one or
/// more contiguous pages; page_reads counts the pages it transferred.
struct IoStats {
  std::uint64_t page_reads = 0;
  std::uint64_t page_writes = 0;
  std::uint64_t read_requests = 0;
  std::uint64_t readahead_pages = 0;
  std::uint64_t temp_pages_written = 0;

  IoStats& operator+=(const IoStats& o) noexcept;
  friend IoStats operator+(IoStats a, const IoStats& b) noexcept { return a += b; }
  friend IoStats operator-(const IoStats& a, const IoStats& b) noexcept;
  friend bool operator==(const IoStats&, const IoStats&) = default;
};

enum class AccessMode : std::uint8_t { sequential, random };

struct PoolConfig {
  std::size_t capacity = 16;  // M
  std::size_t page_size = 4096;
  std::size_t readahead_window = 7;  // 0 disables read-ahead
};

using FrameId = std::size_t;

class BufferPool;

/// A pinned frame. Unpins on destruction.
class PageRef {
 public:
  PageRef() = default;
  PageRef(BufferPool* pool, FrameId frame) noexcept : pool_(pool), frame_(frame) {}
  PageRef(PageRef&& other) noexcept;
  PageRef& operator=(PageRef&& other) noexcept;
  PageRef(const PageRef&) = delete;
  PageRef& operator=(const PageRef&) = delete;
  ~PageRef();

  explicit operator bool() const noexcept { return pool_ != nullptr; }
  FrameId frame() const noexcept { return frame_; }

  std::span<const std::byte> bytes() const;
  std::span<std::byte> mutable_bytes();

  void release() noexcept;

 private:
  BufferPool* pool_ = nullptr;
  FrameId frame_ = 0;
};

/// Tracks the peak number of simultaneously pinned frames while alive.
class PinProbe {
 public:
  explicit PinProbe(BufferPool& pool);
  PinProbe(const PinProbe&) = delete;
  PinProbe& operator=(const PinProbe&) = delete;
  ~PinProbe();

  std::size_t peak() const noexcept { return peak_; }

 private:
  friend class BufferPool;
  BufferPool& pool_;
  std::size_t peak_ = 0;
};

/// Fixed budget of M page frames through which every page transfer flows.
///
/// Replacement is least-recently-unpinned. Pages brought in by read-ahead
/// arrive unpinned and "unconsumed"; they are evicted only when a demand
/// request finds no empty or consumed frame, and read-ahead itself never
/// evicts them. Read-ahead in sequential mode fetches up to `window`
/// following pages of the same extent in the same request, stopping at the
/// extent end, the file end, the first already-resident page, or when no
/// claimable frame is left.
///
/// Output pages are built in anonymous scratch frames and written through;
/// a written page is not left resident.
class BufferPool {
 public:
  explicit BufferPool(PoolConfig config);
  BufferPool(const BufferPool&) = delete;
  BufferPool& operator=(const BufferPool&) = delete;

  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t page_size() const noexcept { return page_size_; }
  std::size_t readahead_window() const noexcept { return window_; }
  void set_readahead_window(std::size_t window) noexcept { window_ = window; }

  /// Growing is always allowed; shrinking requires no pinned frames and
  /// drops every cached page.
  void set_capacity(std::size_t capacity);

  /// Returns `page` pinned. Throws address error for a missing page and
  /// pool-exhausted when every frame is pinned.
  PageRef get_page(const PagedFile& file, PageId page, AccessMode mode);

  /// Pinned, zeroed frame not associated with any page.
  PageRef scratch();

  /// Write-through of one page image; counts page_writes (and
  /// temp_pages_written for temp files).
  void write_page(PagedFile& file, PageId page, std::span<const std::byte> bytes);

  /// Appends `pages` contiguously to a temp file; returns their page ids.
  std::vector<PageId> flush_temp(std::span<const Page> pages, PagedFile& temp);

  void pin(FrameId frame);
  void unpin(FrameId frame);
  std::uint32_t pin_count(FrameId frame) const;
  std::span<std::byte> frame_bytes(FrameId frame);

  std::size_t resident_count() const noexcept { return frames_.size(); }
  std::size_t pinned_count() const noexcept { return pinned_frames_; }
  std::size_t peak_pinned() const noexcept { return peak_pinned_; }
  bool is_resident(FileId file, PageId page) const;

  const IoStats& stats() const noexcept { return stats_; }
  IoStats file_stats(FileId file) const;

  /// Additional sink that receives every counter increment (per-step
  /// accounting). Returns the previous sink.
  IoStats* set_attribution(IoStats* sink) noexcept;

 private:
  friend class PinProbe;

  struct Frame {
    std::vector<std::byte> data;
    FileId file = 0;
    PageId page = 0;
    std::weak_ptr<const void> owner;  // expires when the file object dies
    bool holds_page = false;
    bool consumed = false;
    std::uint32_t pins = 0;
    std::uint64_t tick = 0;
  };

  struct Key {
    FileId file;
    PageId page;
    friend bool operator==(const Key&, const Key&) = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept {
      return std::hash<std::uint64_t>{}(k.file * 0x9E3779B97F4A7C15ull ^ k.page);
    }
  };

  std::optional<FrameId> claim_frame(bool demand);
  void detach(Frame& f);
  void account(FileId file, const IoStats& delta);
  Frame& frame_at(FrameId id);
  const Frame& frame_at(FrameId id) const;

  std::size_t capacity_;
  std::size_t page_size_;
  std::size_t window_;
  std::vector<Frame> frames_;
  std::unordered_map<Key, FrameId, KeyHash> table_;
  std::uint64_t clock_ = 0;
  std::size_t pinned_frames_ = 0;
  std::size_t peak_pinned_ = 0;
  std::vector<PinProbe*> probes_;
  IoStats stats_;
  std::unordered_map<FileId, IoStats> per_file_;
  IoStats* attribution_ = nullptr;
  std::vector<std::byte> read_buffer_;
};

}  // namespace qeval
