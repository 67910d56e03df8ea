#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qeval/context.hpp"
#include "qeval/heap_file.hpp"

namespace qeval {

struct IndexEntry {
  Tuple key;
  Rid rid;
};

/// Dense, non-clustered index: one (key, Rid) entry per base tuple, stored
/// as a flat sequence of leaf pages sorted by key, ties broken by Rid.
/// Entries are ordinary fixed-width tuples of entry_schema().
class IndexFile {
 public:
  IndexFile(HeapFile entries, std::vector<std::string> key_attrs);

  /// Key attributes followed by the two Rid columns.
  static Schema entry_schema(const Schema& key_schema);

  const std::vector<std::string>& key_attrs() const noexcept { return key_attrs_; }
  const Schema& key_schema() const noexcept { return key_schema_; }
  const HeapFile& entries() const noexcept { return entries_; }
  HeapFile& entries() noexcept { return entries_; }
  std::uint64_t entry_count() const noexcept { return entries_.tuple_count(); }
  std::size_t leaf_page_count() const noexcept { return entries_.page_count(); }

 private:
  HeapFile entries_;
  std::vector<std::string> key_attrs_;
  Schema key_schema_;
};

/// Builds the index with an external sort of (key, Rid) entries and moves
/// the result to `target`. Only reads the base file.
IndexFile build_index(ExecContext& ctx, const HeapFile& base, std::span<const std::string> key_attrs,
                      std::size_t buffers, const std::filesystem::path& target);

/// Streams leaf entries in key order, one sequential page read per leaf page.
class IndexLeafScanner {
 public:
  IndexLeafScanner(BufferPool& pool, const IndexFile& index);

  std::optional<IndexEntry> next();

 private:
  HeapScanner scan_;
  std::size_t key_arity_;
};

}  // namespace qeval
