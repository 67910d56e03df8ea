#include "qeval/csv.hpp"

#include <charconv>

#include <fmt/format.h>

#include "qeval/error.hpp"

namespace qeval {

std::optional<CsvRecord> CsvReader::next() {
  int c = in_.get();
  if (c == std::char_traits<char>::eof()) return std::nullopt;

  CsvRecord record;
  record.line = line_;
  CsvField field;
  bool in_quotes = false;
  bool after_quote = false;
  for (;; c = in_.get()) {
    if (c == std::char_traits<char>::eof()) {
      if (in_quotes) raise(ErrorKind::input, fmt::format("line {}: unterminated quoted field", record.line));
      record.fields.push_back(std::move(field));
      return record;
    }
    char ch = static_cast<char>(c);
    if (in_quotes) {
      if (ch == '"') {
        if (in_.peek() == '"') {
          in_.get();
          field.text += '"';
        } else {
          in_quotes = false;
          after_quote = true;
        }
      } else {
        if (ch == '\n') ++line_;
        field.text += ch;
      }
      continue;
    }
    if (ch == ',') {
      record.fields.push_back(std::move(field));
      field = {};
      after_quote = false;
    } else if (ch == '\n' || ch == '\r') {
      if (ch == '\r' && in_.peek() == '\n') in_.get();
      ++line_;
      record.fields.push_back(std::move(field));
      return record;
    } else if (ch == '"' && field.text.empty() && !field.quoted) {
      in_quotes = true;
      field.quoted = true;
    } else {
      if (after_quote)
        raise(ErrorKind::input, fmt::format("line {}: characters after closing quote", record.line));
      field.text += ch;
    }
  }
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_csv_header(std::ostream& out, const Schema& schema) {
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (i > 0) out << ',';
    out << csv_escape(schema[i].name);
  }
  out << '\n';
}

void write_csv_row(std::ostream& out, const Tuple& t) {
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i > 0) out << ',';
    out << csv_escape(value_to_string(t[i]));
  }
  out << '\n';
}

Tuple parse_csv_row(const CsvRecord& record, const Schema& schema) {
  if (record.fields.size() != schema.size())
    raise(ErrorKind::input, fmt::format("line {}: expected {} fields, found {}", record.line, schema.size(),
                                        record.fields.size()));
  Tuple t;
  t.values.reserve(schema.size());
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const auto& field = record.fields[i];
    const auto& attr = schema[i];
    if (field.text.empty() && !field.quoted)
      raise(ErrorKind::input, fmt::format("line {}: empty value for '{}' (NULL is not supported)", record.line,
                                          attr.name));
    if (attr.type.kind == TypeKind::int64) {
      std::int64_t v = 0;
      const char* first = field.text.data();
      const char* last = first + field.text.size();
      auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec != std::errc{} || ptr != last)
        raise(ErrorKind::input, fmt::format("line {}: '{}' is not an int for '{}'", record.line, field.text,
                                            attr.name));
      t.values.emplace_back(v);
    } else {
      if (field.text.size() > attr.type.max_bytes)
        raise(ErrorKind::input, fmt::format("line {}: value for '{}' is {} bytes, declared {}", record.line,
                                            attr.name, field.text.size(), attr.type.max_bytes));
      t.values.emplace_back(field.text);
    }
  }
  return t;
}

}  // namespace qeval
