#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "qeval/types.hpp"

namespace qeval {

struct CsvField {
  std::string text;
  bool quoted = false;
};

struct CsvRecord {
  std::size_t line = 0;  // 1-based line on which the record starts
  std::vector<CsvField> fields;
};

/// RFC 4180 style reader: comma separated, double-quoted fields may hold
/// commas, quotes ("") and line breaks; LF or CRLF line endings.
class CsvReader {
 public:
  explicit CsvReader(std::istream& in) : in_(in) {}

  std::optional<CsvRecord> next();

 private:
  std::istream& in_;
  std::size_t line_ = 1;
};

/// Quotes a field when it contains a comma, quote, CR or LF.
std::string csv_escape(const std::string& field);

void write_csv_header(std::ostream& out, const Schema& schema);
void write_csv_row(std::ostream& out, const Tuple& t);

/// Converts one record to a tuple of `schema`; errors name the line.
Tuple parse_csv_row(const CsvRecord& record, const Schema& schema);

}  // namespace qeval
