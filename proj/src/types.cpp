#include "qeval/types.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <unordered_set>

#include <fmt/format.h>

#include "qeval/error.hpp"

namespace qeval {

namespace {

bool valid_identifier(std::string_view name) {
  if (name.empty()) return false;
  auto head = static_cast<unsigned char>(name.front());
  if (!(std::isalpha(head) || head == '_')) return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) || u == '_';
  });
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string Type::to_string() const {
  return kind == TypeKind::int64 ? std::string("int") : fmt::format("str{}", max_bytes);
}

Schema::Schema(std::vector<Attribute> attributes) : attributes_(std::move(attributes)) {
  if (attributes_.empty()) raise(ErrorKind::schema, "schema needs at least one attribute");
  std::unordered_set<std::string_view> seen;
  offsets_.reserve(attributes_.size());
  for (const auto& a : attributes_) {
    if (!valid_identifier(a.name)) raise(ErrorKind::schema, fmt::format("invalid attribute name '{}'", a.name));
    if (!seen.insert(a.name).second) raise(ErrorKind::schema, fmt::format("duplicate attribute '{}'", a.name));
    if (a.type.kind == TypeKind::utf8 && a.type.max_bytes == 0)
      raise(ErrorKind::schema, fmt::format("attribute '{}' has zero-width string type", a.name));
    offsets_.push_back(width_);
    width_ += a.type.encoded_width();
  }
}

Schema Schema::parse(std::string_view text) {
  std::vector<Attribute> attrs;
  while (true) {
    auto comma = text.find(',');
    auto item = trim(text.substr(0, comma));
    auto colon = item.find(':');
    if (colon == std::string_view::npos)
      raise(ErrorKind::input, fmt::format("schema item '{}' is not name:type", item));
    auto name = trim(item.substr(0, colon));
    auto type = trim(item.substr(colon + 1));
    if (type == "int") {
      attrs.push_back({std::string(name), Type::int64()});
    } else if (type.starts_with("str")) {
      unsigned n = 0;
      auto digits = type.substr(3);
      auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), n);
      if (ec != std::errc{} || ptr != digits.data() + digits.size() || n == 0 || n > 65535)
        raise(ErrorKind::input, fmt::format("bad string width in '{}'", type));
      attrs.push_back({std::string(name), Type::utf8(static_cast<std::uint16_t>(n))});
    } else {
      raise(ErrorKind::input, fmt::format("unknown type '{}' (expected int or strN)", type));
    }
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return Schema(std::move(attrs));
}

std::optional<std::size_t> Schema::find(std::string_view name) const noexcept {
  for (std::size_t i = 0; i < attributes_.size(); ++i)
    if (attributes_[i].name == name) return i;
  return std::nullopt;
}

std::size_t Schema::index_of(std::string_view name) const {
  if (auto i = find(name)) return *i;
  raise(ErrorKind::schema, fmt::format("unknown attribute '{}' in schema ({})", name, to_string()));
}

std::vector<std::size_t> Schema::indices_of(std::span<const std::string> names) const {
  std::vector<std::size_t> out;
  out.reserve(names.size());
  for (const auto& n : names) out.push_back(index_of(n));
  return out;
}

Schema Schema::project(std::span<const std::size_t> indices) const {
  std::vector<Attribute> attrs;
  attrs.reserve(indices.size());
  for (auto i : indices) attrs.push_back(attributes_.at(i));
  return Schema(std::move(attrs));
}

std::string Schema::to_string() const {
  std::string out;
  for (const auto& a : attributes_) {
    if (!out.empty()) out += ',';
    out += a.name;
    out += ':';
    out += a.type.to_string();
  }
  return out;
}

std::strong_ordering compare_values(const Value& a, const Value& b) {
  if (a.index() != b.index()) return a.index() <=> b.index();
  if (const auto* x = std::get_if<std::int64_t>(&a)) return *x <=> std::get<std::int64_t>(b);
  // char_traits<char>::compare orders as unsigned char, i.e. bytewise.
  int c = std::get<std::string>(a).compare(std::get<std::string>(b));
  return c < 0 ? std::strong_ordering::less
               : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
}

std::strong_ordering operator<=>(const Tuple& a, const Tuple& b) {
  auto n = std::min(a.values.size(), b.values.size());
  for (std::size_t i = 0; i < n; ++i)
    if (auto c = compare_values(a.values[i], b.values[i]); c != 0) return c;
  return a.values.size() <=> b.values.size();
}

std::strong_ordering compare_on(const Tuple& a, const Tuple& b, std::span<const std::size_t> columns) {
  for (auto i : columns)
    if (auto c = compare_values(a.values[i], b.values[i]); c != 0) return c;
  return std::strong_ordering::equal;
}

Tuple project_tuple(const Tuple& t, std::span<const std::size_t> columns) {
  Tuple out;
  out.values.reserve(columns.size());
  for (auto i : columns) out.values.push_back(t.values[i]);
  return out;
}

void check_conforms(const Tuple& t, const Schema& schema) {
  if (t.size() != schema.size())
    raise(ErrorKind::encoding, fmt::format("tuple arity {} does not match schema arity {}", t.size(), schema.size()));
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const auto& attr = schema[i];
    if (attr.type.kind == TypeKind::int64) {
      if (!std::holds_alternative<std::int64_t>(t[i]))
        raise(ErrorKind::encoding, fmt::format("attribute '{}' expects int", attr.name));
    } else {
      const auto* s = std::get_if<std::string>(&t[i]);
      if (s == nullptr) raise(ErrorKind::encoding, fmt::format("attribute '{}' expects string", attr.name));
      if (s->size() > attr.type.max_bytes)
        raise(ErrorKind::encoding, fmt::format("value of '{}' is {} bytes, exceeds declared {}", attr.name,
                                                s->size(), attr.type.max_bytes));
    }
  }
}

std::string value_to_string(const Value& v) {
  if (const auto* x = std::get_if<std::int64_t>(&v)) return std::to_string(*x);
  return std::get<std::string>(v);
}

}  // namespace qeval
