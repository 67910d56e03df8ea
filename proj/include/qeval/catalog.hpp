#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qeval/buffer_pool.hpp"
#include "qeval/heap_file.hpp"
#include "qeval/index.hpp"
#include "qeval/types.hpp"

namespace qeval {

struct IndexDescriptor {
  std::vector<std::string> key_attrs;
  std::string file;  // relative to the database directory
  std::uint64_t entry_count = 0;
  std::size_t page_count = 0;
};

struct CatalogEntry {
  std::string name;
  std::string file;
  Schema schema;
  std::size_t page_count = 0;
  std::uint64_t tuple_count = 0;
  std::vector<IndexDescriptor> indexes;

  const IndexDescriptor* find_index(std::span<const std::string> key_attrs) const;
};

/// Relation metadata and statistics, persisted as `catalog.meta` (JSON).
struct Catalog {
  StorageGeometry geometry;
  std::map<std::string, CatalogEntry> relations;

  const CatalogEntry* find(const std::string& name) const;
  const CatalogEntry& at(const std::string& name) const;

  std::string to_json() const;
  static Catalog from_json(const std::string& text);
};

struct IngestReport {
  std::string relation;
  std::size_t page_count = 0;
  std::uint64_t tuple_count = 0;
};

struct IndexReport {
  std::string relation;
  std::vector<std::string> key_attrs;
  std::string file;
  std::uint64_t entry_count = 0;
  std::size_t page_count = 0;
};

/// A database directory:
///   catalog.meta            metadata (JSON)
///   <relation>.heap         base heap files
///   <relation>.<a+b>.idx    dense index files
///   tmp/                    temporaries
class Database {
 public:
  static Database create(const std::filesystem::path& dir, StorageGeometry geometry);
  static Database open(const std::filesystem::path& dir);
  static bool exists(const std::filesystem::path& dir);

  const std::filesystem::path& dir() const noexcept { return dir_; }
  std::filesystem::path tmp_dir() const { return dir_ / "tmp"; }
  const Catalog& catalog() const noexcept { return catalog_; }
  const StorageGeometry& geometry() const noexcept { return catalog_.geometry; }

  HeapFile open_relation(const std::string& name) const;
  IndexFile open_index(const std::string& relation, std::span<const std::string> key_attrs) const;

  /// Loads a CSV whose header row names the schema's attributes in order.
  IngestReport ingest_csv(BufferPool& pool, const std::string& relation, std::istream& csv, const Schema& schema);

  IndexReport build_index(BufferPool& pool, const std::string& relation, std::span<const std::string> key_attrs,
                          std::size_t buffers);

  static std::string index_file_name(const std::string& relation, std::span<const std::string> key_attrs);

 private:
  Database(std::filesystem::path dir, Catalog catalog);
  void save() const;

  std::filesystem::path dir_;
  Catalog catalog_;
};

}  // namespace qeval
