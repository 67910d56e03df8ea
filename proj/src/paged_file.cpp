#include "qeval/paged_file.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstring>
#include <utility>

#include <fmt/format.h>

#include "qeval/error.hpp"

namespace qeval {

namespace {

std::atomic<FileId> next_file_id{1};

[[noreturn]] void io_failure(const std::string& what, const std::filesystem::path& path) {
  raise(ErrorKind::io, fmt::format("{} '{}': {}", what, path.string(), std::strerror(errno)));
}

void check_geometry(const StorageGeometry& g) {
  if (g.page_size <= kPageHeaderSize) raise(ErrorKind::usage, fmt::format("page size {} too small", g.page_size));
  if (g.extent_length == 0) raise(ErrorKind::usage, "extent length must be >= 1");
}

}  // namespace

PagedFile::PagedFile(std::filesystem::path path, StorageGeometry geometry, FileKind kind, int fd, std::size_t pages)
    : path_(std::move(path)), geometry_(geometry), kind_(kind), id_(next_file_id++), fd_(fd), page_count_(pages),
      token_(std::make_shared<int>(0)) {}

PagedFile PagedFile::create(const std::filesystem::path& path, StorageGeometry geometry, FileKind kind) {
  check_geometry(geometry);
  int fd = ::open(path.c_str(), O_RDWR | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) io_failure("cannot create", path);
  return PagedFile(path, geometry, kind, fd, 0);
}

PagedFile PagedFile::open(const std::filesystem::path& path, StorageGeometry geometry, FileKind kind) {
  check_geometry(geometry);
  int fd = ::open(path.c_str(), O_RDWR | O_CLOEXEC);
  if (fd < 0) io_failure("cannot open", path);
  struct stat st {};
  if (::fstat(fd, &st) != 0) {
    ::close(fd);
    io_failure("cannot stat", path);
  }
  auto size = static_cast<std::size_t>(st.st_size);
  if (size % geometry.page_size != 0) {
    ::close(fd);
    raise(ErrorKind::storage,
          fmt::format("'{}' is {} bytes, not a multiple of page size {}", path.string(), size, geometry.page_size));
  }
  return PagedFile(path, geometry, kind, fd, size / geometry.page_size);
}

PagedFile::PagedFile(PagedFile&& other) noexcept
    : path_(std::move(other.path_)),
      geometry_(other.geometry_),
      kind_(other.kind_),
      id_(other.id_),
      fd_(std::exchange(other.fd_, -1)),
      page_count_(other.page_count_),
      token_(std::move(other.token_)) {}

PagedFile& PagedFile::operator=(PagedFile&& other) noexcept {
  if (this != &other) {
    close();
    path_ = std::move(other.path_);
    geometry_ = other.geometry_;
    kind_ = other.kind_;
    id_ = other.id_;
    fd_ = std::exchange(other.fd_, -1);
    page_count_ = other.page_count_;
    token_ = std::move(other.token_);
  }
  return *this;
}

PagedFile::~PagedFile() { close(); }

void PagedFile::close() noexcept {
  if (fd_ < 0) return;
  ::close(fd_);
  fd_ = -1;
  token_.reset();
  if (kind_ == FileKind::temp) {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }
}

Extent PagedFile::extent_of(PageId page) const noexcept {
  PageId first = page - page % geometry_.extent_length;
  return {first, geometry_.extent_length};
}

void PagedFile::read_pages(PageId first, std::size_t count, std::span<std::byte> out) const {
  if (first + count > page_count_)
    raise(ErrorKind::address,
          fmt::format("pages [{}, {}) beyond end of '{}' ({} pages)", first, first + count, path_.string(), page_count_));
  std::size_t want = count * geometry_.page_size;
  if (out.size() < want) raise(ErrorKind::usage, "read buffer too small");
  std::size_t done = 0;
  while (done < want) {
    auto n = ::pread(fd_, out.data() + done, want - done, static_cast<off_t>(offset_of(first) + done));
    if (n < 0) {
      if (errno == EINTR) continue;
      io_failure("read failed on", path_);
    }
    if (n == 0) raise(ErrorKind::storage, fmt::format("unexpected end of '{}'", path_.string()));
    done += static_cast<std::size_t>(n);
  }
}

void PagedFile::write_page(PageId page, std::span<const std::byte> bytes) {
  if (page > page_count_)
    raise(ErrorKind::address, fmt::format("write of page {} would leave a hole in '{}' ({} pages)", page,
                                          path_.string(), page_count_));
  if (bytes.size() != geometry_.page_size) raise(ErrorKind::usage, "page image has wrong size");
  std::size_t done = 0;
  while (done < bytes.size()) {
    auto n = ::pwrite(fd_, bytes.data() + done, bytes.size() - done, static_cast<off_t>(offset_of(page) + done));
    if (n < 0) {
      if (errno == EINTR) continue;
      io_failure("write failed on", path_);
    }
    done += static_cast<std::size_t>(n);
  }
  if (page == page_count_) ++page_count_;
}

void PagedFile::persist_as(const std::filesystem::path& target, FileKind kind) {
  std::error_code ec;
  std::filesystem::rename(path_, target, ec);
  if (ec) raise(ErrorKind::io, fmt::format("cannot rename '{}' to '{}': {}", path_.string(), target.string(), ec.message()));
  path_ = target;
  kind_ = kind;
}

}  // namespace qeval
