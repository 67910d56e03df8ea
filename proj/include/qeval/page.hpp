#pragma once

// Page layout (all integers little-endian):
//
//   [0, 4)    magic "QPG1"
//   [4, 8)    slot_count
//   [8, 12)   tuple_width in bytes
//   [12, 16)  reserved, zero
//   [16, ...) slot i occupies [16 + i * tuple_width, 16 + (i + 1) * tuple_width)
//
// Slots are fixed width, so the slot directory is implicit in the header.
// Unused tail bytes are zero.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace qeval {

using PageId = std::uint64_t;

inline constexpr std::size_t kPageHeaderSize = 16;
inline constexpr std::uint32_t kPageMagic = 0x31475051;  // "QPG1"

/// Tuples of `tuple_width` bytes that fit one page of `page_size` bytes.
constexpr std::size_t tuples_per_page(std::size_t page_size, std::size_t tuple_width) noexcept {
  return page_size <= kPageHeaderSize || tuple_width == 0 ? 0 : (page_size - kPageHeaderSize) / tuple_width;
}

/// Address of a tuple inside a heap file.
struct Rid {
  PageId page = 0;
  std::uint32_t slot = 0;

  friend bool operator==(const Rid&, const Rid&) = default;
  friend auto operator<=>(const Rid&, const Rid&) = default;
};

/// Read-only view over one page image.
class PageReader {
 public:
  explicit PageReader(std::span<const std::byte> bytes) : bytes_(bytes) {}

  bool has_magic() const noexcept;
  std::uint32_t slot_count() const noexcept;
  std::uint32_t tuple_width() const noexcept;
  std::span<const std::byte> slot(std::size_t i) const;

  /// Throws a storage error unless the header is well formed for `expected_width`.
  void validate(std::size_t expected_width) const;

 private:
  std::span<const std::byte> bytes_;
};

/// Mutable view used to fill an output page.
class PageBuilder {
 public:
  explicit PageBuilder(std::span<std::byte> bytes) : bytes_(bytes) {}

  /// Zeroes the page and writes an empty header.
  void reset(std::size_t tuple_width);

  std::uint32_t slot_count() const noexcept;
  std::size_t capacity() const noexcept;
  bool full() const noexcept { return slot_count() >= capacity(); }

  /// Next free slot; the caller fills it and then calls commit().
  std::span<std::byte> next_slot();
  void commit();

 private:
  std::span<std::byte> bytes_;
};

/// An owned page image (used for batch writes).
struct Page {
  PageId id = 0;
  std::vector<std::byte> bytes;
};

}  // namespace qeval
