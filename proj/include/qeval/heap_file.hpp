#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "qeval/buffer_pool.hpp"
#include "qeval/paged_file.hpp"
#include "qeval/types.hpp"

namespace qeval {

/// A relation or temporary result: a paged file of fixed-width tuples in
/// insertion order.
class HeapFile {
 public:
  HeapFile(PagedFile file, Schema schema, std::uint64_t tuple_count = 0);

  const Schema& schema() const noexcept { return schema_; }
  PagedFile& file() noexcept { return file_; }
  const PagedFile& file() const noexcept { return file_; }
  FileId id() const noexcept { return file_.id(); }
  bool is_temp() const noexcept { return file_.is_temp(); }
  std::size_t page_count() const noexcept { return file_.page_count(); }
  std::uint64_t tuple_count() const noexcept { return tuple_count_; }
  std::size_t tuples_per_page() const noexcept;

 private:
  friend class HeapAppender;
  PagedFile file_;
  Schema schema_;
  std::uint64_t tuple_count_ = 0;
};

/// Sequential iteration in storage order. Holds at most one pinned frame
/// and releases the current page before requesting the next one.
class HeapScanner {
 public:
  HeapScanner(BufferPool& pool, const HeapFile& file, AccessMode mode = AccessMode::sequential);

  std::optional<Tuple> next();
  /// Address of the tuple most recently returned by next().
  Rid last_rid() const noexcept { return last_; }

 private:
  bool advance_page();

  BufferPool& pool_;
  const HeapFile& file_;
  AccessMode mode_;
  PageRef page_;
  PageId next_page_ = 0;
  std::uint32_t slot_ = 0;
  std::uint32_t slots_ = 0;
  Rid last_{};
};

/// Appends tuples through one scratch frame; a page is written when it
/// fills and once more by finish() for a trailing partial page.
class HeapAppender {
 public:
  HeapAppender(BufferPool& pool, HeapFile& file);

  Rid append(const Tuple& t);
  /// Writes the trailing partial page and releases the frame.
  void finish();

  std::uint64_t appended() const noexcept { return appended_; }

 private:
  void start_page();

  BufferPool& pool_;
  HeapFile& file_;
  PageRef frame_;
  PageId page_id_ = 0;
  bool dirty_ = false;
  std::uint64_t appended_ = 0;
};

Rid append_tuple(BufferPool& pool, HeapFile& file, const Tuple& t);

/// One page read when the page is not resident, none otherwise.
Tuple fetch_by_rid(BufferPool& pool, const HeapFile& file, Rid rid);

/// Owner of the `tmp/` directory of a database: hands out temp heap files
/// that delete themselves when destroyed.
class TempArea {
 public:
  TempArea(std::filesystem::path dir, StorageGeometry geometry);

  HeapFile create(const Schema& schema);

  const std::filesystem::path& dir() const noexcept { return dir_; }
  const StorageGeometry& geometry() const noexcept { return geometry_; }
  /// Total pages currently stored in the temp directory.
  std::size_t pages_on_disk() const;

 private:
  std::filesystem::path dir_;
  StorageGeometry geometry_;
  std::uint64_t next_ = 0;
};

}  // namespace qeval
