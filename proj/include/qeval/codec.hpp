#pragma once

// Fixed-width tuple encoding.
//
//   Int64       8 bytes, two's complement, little-endian
//   Utf8(n)     2-byte little-endian length L (L <= n), then n bytes:
//               the L value bytes followed by n - L zero bytes
//
// Attributes are laid out back to back in schema order, so every tuple of a
// schema has the same encoded width (Schema::tuple_width()).

#include <cstddef>
#include <span>
#include <vector>

#include "qeval/types.hpp"

namespace qeval {

/// Encodes `t` into `out`, which must be exactly schema.tuple_width() bytes.
void encode_tuple_into(const Tuple& t, const Schema& schema, std::span<std::byte> out);

std::vector<std::byte> encode_tuple(const Tuple& t, const Schema& schema);

/// Throws a storage error when a length prefix exceeds its declared width.
Tuple decode_tuple(std::span<const std::byte> bytes, const Schema& schema);

}  // namespace qeval
