#include "qeval/codec.hpp"

#include <cstring>

#include <fmt/format.h>

#include "qeval/error.hpp"

namespace qeval {

namespace {

void put_u64(std::byte* dst, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) dst[i] = static_cast<std::byte>((v >> (8 * i)) & 0xff);
}

std::uint64_t get_u64(const std::byte* src) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(src[i]) << (8 * i);
  return v;
}

}  // namespace

void encode_tuple_into(const Tuple& t, const Schema& schema, std::span<std::byte> out) {
  check_conforms(t, schema);
  if (out.size() != schema.tuple_width())
    raise(ErrorKind::usage, fmt::format("encode buffer is {} bytes, tuple width is {}", out.size(),
                                        schema.tuple_width()));
  std::byte* p = out.data();
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const auto& type = schema[i].type;
    if (type.kind == TypeKind::int64) {
      put_u64(p, static_cast<std::uint64_t>(std::get<std::int64_t>(t[i])));
    } else {
      const auto& s = std::get<std::string>(t[i]);
      p[0] = static_cast<std::byte>(s.size() & 0xff);
      p[1] = static_cast<std::byte>((s.size() >> 8) & 0xff);
      std::memcpy(p + 2, s.data(), s.size());
      std::memset(p + 2 + s.size(), 0, type.max_bytes - s.size());
    }
    p += type.encoded_width();
  }
}

std::vector<std::byte> encode_tuple(const Tuple& t, const Schema& schema) {
  std::vector<std::byte> out(schema.tuple_width());
  encode_tuple_into(t, schema, out);
  return out;
}

Tuple decode_tuple(std::span<const std::byte> bytes, const Schema& schema) {
  if (bytes.size() < schema.tuple_width())
    raise(ErrorKind::storage, fmt::format("slot of {} bytes is shorter than tuple width {}", bytes.size(),
                                          schema.tuple_width()));
  Tuple t;
  t.values.reserve(schema.size());
  const std::byte* p = bytes.data();
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const auto& type = schema[i].type;
    if (type.kind == TypeKind::int64) {
      t.values.emplace_back(static_cast<std::int64_t>(get_u64(p)));
    } else {
      std::size_t len = static_cast<std::size_t>(p[0]) | (static_cast<std::size_t>(p[1]) << 8);
      if (len > type.max_bytes)
        raise(ErrorKind::storage, fmt::format("corrupt string length {} for '{}' (max {})", len, schema[i].name,
                                              type.max_bytes));
      t.values.emplace_back(std::string(reinterpret_cast<const char*>(p + 2), len));
    }
    p += type.encoded_width();
  }
  return t;
}

}  // namespace qeval
