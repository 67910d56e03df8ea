#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>

#include "qeval/page.hpp"

namespace qeval {

using FileId = std::uint64_t;

enum class FileKind : std::uint8_t { base, index, temp };

/// A contiguous run of pages of one file.
struct Extent {
  PageId first_page = 0;
  std::size_t length = 0;

  friend bool operator==(const Extent&, const Extent&) = default;
};

struct StorageGeometry {
  std::size_t page_size = 4096;
  std::size_t extent_length = 8;
};

/// Raw file made of page_size-byte pages. Page p lives at byte offset
/// p * page_size; extent e covers pages [e * L, (e + 1) * L). Temp files
/// are unlinked when the owning object is destroyed.
class PagedFile {
 public:
  static PagedFile create(const std::filesystem::path& path, StorageGeometry geometry, FileKind kind);
  static PagedFile open(const std::filesystem::path& path, StorageGeometry geometry, FileKind kind);

  PagedFile(PagedFile&& other) noexcept;
  PagedFile& operator=(PagedFile&& other) noexcept;
  PagedFile(const PagedFile&) = delete;
  PagedFile& operator=(const PagedFile&) = delete;
  ~PagedFile();

  FileId id() const noexcept { return id_; }
  FileKind kind() const noexcept { return kind_; }
  bool is_temp() const noexcept { return kind_ == FileKind::temp; }
  const std::filesystem::path& path() const noexcept { return path_; }
  std::size_t page_size() const noexcept { return geometry_.page_size; }
  std::size_t extent_length() const noexcept { return geometry_.extent_length; }
  const StorageGeometry& geometry() const noexcept { return geometry_; }
  std::size_t page_count() const noexcept { return page_count_; }

  Extent extent_of(PageId page) const noexcept;
  std::uint64_t offset_of(PageId page) const noexcept { return page * geometry_.page_size; }

  /// Reads `count` contiguous pages starting at `first` with a single
  /// positioned read. `out` must hold count * page_size bytes.
  void read_pages(PageId first, std::size_t count, std::span<std::byte> out) const;

  /// Writes one page; `page` may be an existing page or page_count() (append).
  void write_page(PageId page, std::span<const std::byte> bytes);

  /// Expires when this file object is destroyed; lets caches detect dead files.
  std::weak_ptr<const void> liveness() const noexcept { return token_; }

  /// Renames the backing file and turns a temp file into a permanent one.
  void persist_as(const std::filesystem::path& target, FileKind kind);

 private:
  PagedFile(std::filesystem::path path, StorageGeometry geometry, FileKind kind, int fd, std::size_t pages);
  void close() noexcept;

  std::filesystem::path path_;
  StorageGeometry geometry_;
  FileKind kind_ = FileKind::base;
  FileId id_ = 0;
  int fd_ = -1;
  std::size_t page_count_ = 0;
  std::shared_ptr<const void> token_;
};

}  // namespace qeval
