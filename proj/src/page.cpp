#include "qeval/page.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "qeval/error.hpp"

namespace qeval {

namespace {

std::uint32_t load_u32(const std::byte* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void store_u32(std::byte* p, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) p[i] = static_cast<std::byte>((v >> (8 * i)) & 0xff);
}

}  // namespace

bool PageReader::has_magic() const noexcept {
  return bytes_.size() >= kPageHeaderSize && load_u32(bytes_.data()) == kPageMagic;
}

std::uint32_t PageReader::slot_count() const noexcept { return load_u32(bytes_.data() + 4); }

std::uint32_t PageReader::tuple_width() const noexcept { return load_u32(bytes_.data() + 8); }

std::span<const std::byte> PageReader::slot(std::size_t i) const {
  if (i >= slot_count()) raise(ErrorKind::address, fmt::format("slot {} out of range ({} slots)", i, slot_count()));
  return bytes_.subspan(kPageHeaderSize + i * tuple_width(), tuple_width());
}

void PageReader::validate(std::size_t expected_width) const {
  if (!has_magic()) raise(ErrorKind::storage, "page header magic mismatch");
  if (tuple_width() != expected_width)
    raise(ErrorKind::storage, fmt::format("page tuple width {} does not match schema width {}", tuple_width(),
                                          expected_width));
  if (slot_count() > tuples_per_page(bytes_.size(), expected_width))
    raise(ErrorKind::storage, fmt::format("page claims {} slots, capacity is {}", slot_count(),
                                          tuples_per_page(bytes_.size(), expected_width)));
}

void PageBuilder::reset(std::size_t tuple_width) {
  if (tuples_per_page(bytes_.size(), tuple_width) == 0)
    raise(ErrorKind::unsupported_tuple,
          fmt::format("tuple of {} bytes does not fit a {}-byte page", tuple_width, bytes_.size()));
  std::fill(bytes_.begin(), bytes_.end(), std::byte{0});
  store_u32(bytes_.data(), kPageMagic);
  store_u32(bytes_.data() + 8, static_cast<std::uint32_t>(tuple_width));
}

std::uint32_t PageBuilder::slot_count() const noexcept { return load_u32(bytes_.data() + 4); }

std::size_t PageBuilder::capacity() const noexcept {
  return tuples_per_page(bytes_.size(), load_u32(bytes_.data() + 8));
}

std::span<std::byte> PageBuilder::next_slot() {
  if (full()) raise(ErrorKind::usage, "page is full");
  std::size_t width = load_u32(bytes_.data() + 8);
  return bytes_.subspan(kPageHeaderSize + slot_count() * width, width);
}

void PageBuilder::commit() { store_u32(bytes_.data() + 4, slot_count() + 1); }

}  // namespace qeval
