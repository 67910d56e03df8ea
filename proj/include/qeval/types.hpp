#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace qeval {

enum class TypeKind : std::uint8_t { int64, utf8 };

struct Type {
  TypeKind kind = TypeKind::int64;
  std::uint16_t max_bytes = 0;  // utf8 only

  static constexpr Type int64() noexcept { return {TypeKind::int64, 0}; }
  static constexpr Type utf8(std::uint16_t max_bytes) noexcept { return {TypeKind::utf8, max_bytes}; }

  /// Bytes occupied in the fixed-width tuple encoding.
  std::size_t encoded_width() const noexcept {
    return kind == TypeKind::int64 ? 8 : 2 + static_cast<std::size_t>(max_bytes);
  }

  std::string to_string() const;

  friend bool operator==(const Type&, const Type&) = default;
};

struct Attribute {
  std::string name;
  Type type;

  friend bool operator==(const Attribute&, const Attribute&) = default;
};

/// Ordered, non-empty list of uniquely named attributes.
class Schema {
 public:
  Schema() = default;
  explicit Schema(std::vector<Attribute> attributes);

  /// Parses the `name:int,name:strN` micro-format.
  static Schema parse(std::string_view text);

  std::size_t size() const noexcept { return attributes_.size(); }
  bool empty() const noexcept { return attributes_.empty(); }
  const Attribute& operator[](std::size_t i) const { return attributes_[i]; }
  const std::vector<Attribute>& attributes() const noexcept { return attributes_; }

  std::optional<std::size_t> find(std::string_view name) const noexcept;
  /// Like find() but throws a schema error naming the attribute.
  std::size_t index_of(std::string_view name) const;
  std::vector<std::size_t> indices_of(std::span<const std::string> names) const;

  std::size_t tuple_width() const noexcept { return width_; }
  std::size_t offset_of(std::size_t i) const { return offsets_[i]; }

  /// Sub-schema with the given attributes, in the given order.
  Schema project(std::span<const std::size_t> indices) const;

  std::string to_string() const;

  friend bool operator==(const Schema& a, const Schema& b) { return a.attributes_ == b.attributes_; }

 private:
  std::vector<Attribute> attributes_;
  std::vector<std::size_t> offsets_;
  std::size_t width_ = 0;
};

using Value = std::variant<std::int64_t, std::string>;

/// A record; values are positional against a Schema. Ordering is the
/// attribute-wise total order (Int64 numeric, Utf8 bytewise).
struct Tuple {
  std::vector<Value> values;

  Tuple() = default;
  explicit Tuple(std::vector<Value> v) : values(std::move(v)) {}

  std::size_t size() const noexcept { return values.size(); }
  const Value& operator[](std::size_t i) const { return values[i]; }

  friend bool operator==(const Tuple&, const Tuple&) = default;
  friend std::strong_ordering operator<=>(const Tuple& a, const Tuple& b);
};

std::strong_ordering compare_values(const Value& a, const Value& b);

/// Lexicographic comparison restricted to `columns`, in that order.
std::strong_ordering compare_on(const Tuple& a, const Tuple& b,
                                std::span<const std::size_t> columns);

Tuple project_tuple(const Tuple& t, std::span<const std::size_t> columns);

/// Throws an encoding error unless `t` conforms to `schema`.
void check_conforms(const Tuple& t, const Schema& schema);

std::string value_to_string(const Value& v);

}  // namespace qeval
