#include "qeval/catalog.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "qeval/csv.hpp"
#include "qeval/error.hpp"

namespace qeval {

namespace {

constexpr const char* kCatalogFile = "catalog.meta";
constexpr int kCatalogFormat = 1;

bool valid_relation_name(const std::string& name) {
  if (name.empty() || !(std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_')) return false;
  return std::all_of(name.begin(), name.end(),
                     [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

}  // namespace

const IndexDescriptor* CatalogEntry::find_index(std::span<const std::string> key_attrs) const {
  for (const auto& ix : indexes)
    if (std::equal(ix.key_attrs.begin(), ix.key_attrs.end(), key_attrs.begin(), key_attrs.end())) return &ix;
  return nullptr;
}

const CatalogEntry* Catalog::find(const std::string& name) const {
  auto it = relations.find(name);
  return it == relations.end() ? nullptr : &it->second;
}

const CatalogEntry& Catalog::at(const std::string& name) const {
  if (const auto* e = find(name)) return *e;
  raise(ErrorKind::schema, fmt::format("unknown relation '{}'", name));
}

std::string Catalog::to_json() const {
  nlohmann::ordered_json root;
  root["format"] = kCatalogFormat;
  root["page_size"] = geometry.page_size;
  root["extent_length"] = geometry.extent_length;
  root["relations"] = nlohmann::ordered_json::array();
  for (const auto& [name, entry] : relations) {
    nlohmann::ordered_json rel;
    rel["name"] = entry.name;
    rel["file"] = entry.file;
    rel["schema"] = entry.schema.to_string();
    rel["page_count"] = entry.page_count;
    rel["tuple_count"] = entry.tuple_count;
    rel["indexes"] = nlohmann::ordered_json::array();
    for (const auto& ix : entry.indexes) {
      rel["indexes"].push_back({{"key_attrs", ix.key_attrs},
                                {"file", ix.file},
                                {"entry_count", ix.entry_count},
                                {"page_count", ix.page_count}});
    }
    root["relations"].push_back(std::move(rel));
  }
  return root.dump(2) + "\n";
}

Catalog Catalog::from_json(const std::string& text) {
  try {
    auto root = nlohmann::json::parse(text);
    if (root.at("format").get<int>() != kCatalogFormat)
      raise(ErrorKind::storage, fmt::format("unsupported catalog format {}", root.at("format").dump()));
    Catalog c;
    c.geometry.page_size = root.at("page_size").get<std::size_t>();
    c.geometry.extent_length = root.at("extent_length").get<std::size_t>();
    for (const auto& rel : root.at("relations")) {
      CatalogEntry e;
      e.name = rel.at("name").get<std::string>();
      e.file = rel.at("file").get<std::string>();
      e.schema = Schema::parse(rel.at("schema").get<std::string>());
      e.page_count = rel.at("page_count").get<std::size_t>();
      e.tuple_count = rel.at("tuple_count").get<std::uint64_t>();
      for (const auto& ix : rel.at("indexes")) {
        e.indexes.push_back({ix.at("key_attrs").get<std::vector<std::string>>(), ix.at("file").get<std::string>(),
                             ix.at("entry_count").get<std::uint64_t>(), ix.at("page_count").get<std::size_t>()});
      }
      c.relations.emplace(e.name, std::move(e));
    }
    return c;
  } catch (const nlohmann::json::exception& ex) {
    raise(ErrorKind::storage, fmt::format("malformed catalog: {}", ex.what()));
  }
}

// --- Database --------------------------------------------------------------

Database::Database(std::filesystem::path dir, Catalog catalog) : dir_(std::move(dir)), catalog_(std::move(catalog)) {}

bool Database::exists(const std::filesystem::path& dir) { return std::filesystem::exists(dir / kCatalogFile); }

Database Database::create(const std::filesystem::path& dir, StorageGeometry geometry) {
  if (exists(dir)) raise(ErrorKind::usage, fmt::format("database '{}' already exists", dir.string()));
  std::error_code ec;
  std::filesystem::create_directories(dir / "tmp", ec);
  if (ec) raise(ErrorKind::io, fmt::format("cannot create '{}': {}", dir.string(), ec.message()));
  Catalog catalog;
  catalog.geometry = geometry;
  Database db(dir, std::move(catalog));
  db.save();
  return db;
}

Database Database::open(const std::filesystem::path& dir) {
  std::ifstream in(dir / kCatalogFile);
  if (!in) raise(ErrorKind::io, fmt::format("no database at '{}' (missing {})", dir.string(), kCatalogFile));
  std::stringstream text;
  text << in.rdbuf();
  std::error_code ec;
  std::filesystem::create_directories(dir / "tmp", ec);
  return Database(dir, Catalog::from_json(text.str()));
}

void Database::save() const {
  auto target = dir_ / kCatalogFile;
  auto staging = dir_ / "catalog.meta.new";
  {
    std::ofstream out(staging, std::ios::trunc);
    out << catalog_.to_json();
    if (!out) raise(ErrorKind::io, fmt::format("cannot write '{}'", staging.string()));
  }
  std::error_code ec;
  std::filesystem::rename(staging, target, ec);
  if (ec) raise(ErrorKind::io, fmt::format("cannot replace '{}': {}", target.string(), ec.message()));
}

HeapFile Database::open_relation(const std::string& name) const {
  const auto& entry = catalog_.at(name);
  HeapFile f(PagedFile::open(dir_ / entry.file, geometry(), FileKind::base), entry.schema, entry.tuple_count);
  if (f.page_count() != entry.page_count)
    raise(ErrorKind::storage, fmt::format("relation '{}' has {} pages on disk, catalog says {}", name,
                                          f.page_count(), entry.page_count));
  return f;
}

IndexFile Database::open_index(const std::string& relation, std::span<const std::string> key_attrs) const {
  const auto& entry = catalog_.at(relation);
  const auto* ix = entry.find_index(key_attrs);
  if (ix == nullptr)
    raise(ErrorKind::schema, fmt::format("relation '{}' has no index on ({})", relation, fmt::join(key_attrs, ",")));
  const Schema entry_schema = IndexFile::entry_schema(entry.schema.project(entry.schema.indices_of(key_attrs)));
  HeapFile entries(PagedFile::open(dir_ / ix->file, geometry(), FileKind::index), entry_schema, ix->entry_count);
  return IndexFile(std::move(entries), ix->key_attrs);
}

std::string Database::index_file_name(const std::string& relation, std::span<const std::string> key_attrs) {
  return fmt::format("{}.{}.idx", relation, fmt::join(key_attrs, "+"));
}

IngestReport Database::ingest_csv(BufferPool& pool, const std::string& relation, std::istream& csv,
                                  const Schema& schema) {
  if (!valid_relation_name(relation)) raise(ErrorKind::input, fmt::format("invalid relation name '{}'", relation));
  if (catalog_.find(relation) != nullptr)
    raise(ErrorKind::usage, fmt::format("relation '{}' already exists", relation));
  if (pool.page_size() != geometry().page_size)
    raise(ErrorKind::usage, fmt::format("pool page size {} does not match database page size {}", pool.page_size(),
                                        geometry().page_size));

  CsvReader reader(csv);
  auto header = reader.next();
  if (!header) raise(ErrorKind::input, "line 1: missing CSV header");
  if (header->fields.size() != schema.size())
    raise(ErrorKind::input, fmt::format("line 1: header has {} columns, schema has {}", header->fields.size(),
                                        schema.size()));
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (header->fields[i].text != schema[i].name)
      raise(ErrorKind::input, fmt::format("line 1: header column {} is '{}', schema names '{}'", i + 1,
                                          header->fields[i].text, schema[i].name));
  }

  const std::string file_name = relation + ".heap";
  // Loaded under a temp name so a failed load leaves nothing behind.
  HeapFile heap(PagedFile::create(dir_ / (file_name + ".loading"), geometry(), FileKind::temp), schema);
  {
    HeapAppender out(pool, heap);
    while (auto record = reader.next()) {
      if (record->fields.size() == 1 && record->fields[0].text.empty() && !record->fields[0].quoted) continue;
      out.append(parse_csv_row(*record, schema));
    }
    out.finish();
  }
  heap.file().persist_as(dir_ / file_name, FileKind::base);

  CatalogEntry entry;
  entry.name = relation;
  entry.file = file_name;
  entry.schema = schema;
  entry.page_count = heap.page_count();
  entry.tuple_count = heap.tuple_count();
  catalog_.relations[relation] = entry;
  save();
  return {relation, entry.page_count, entry.tuple_count};
}

IndexReport Database::build_index(BufferPool& pool, const std::string& relation,
                                  std::span<const std::string> key_attrs, std::size_t buffers) {
  HeapFile base = open_relation(relation);
  const std::string file_name = index_file_name(relation, key_attrs);
  TempArea temps(tmp_dir(), geometry());
  ExecContext ctx{pool, temps};
  IndexFile ix = qeval::build_index(ctx, base, key_attrs, buffers, dir_ / file_name);

  auto& entry = catalog_.relations.at(relation);
  std::erase_if(entry.indexes, [&](const IndexDescriptor& d) {
    return std::equal(d.key_attrs.begin(), d.key_attrs.end(), key_attrs.begin(), key_attrs.end());
  });
  IndexDescriptor desc{ix.key_attrs(), file_name, ix.entry_count(), ix.leaf_page_count()};
  entry.indexes.push_back(desc);
  save();
  return {relation, desc.key_attrs, desc.file, desc.entry_count, desc.page_count};
}

}  // namespace qeval
