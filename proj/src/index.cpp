#include "qeval/index.hpp"

#include <fmt/format.h>

#include "qeval/error.hpp"
#include "qeval/sort.hpp"

namespace qeval {

namespace {

constexpr const char* kRidPage = "__rid_page";
constexpr const char* kRidSlot = "__rid_slot";

Schema key_schema_of(const Schema& entry_schema) {
  std::vector<std::size_t> cols;
  for (std::size_t i = 0; i + 2 < entry_schema.size(); ++i) cols.push_back(i);
  return entry_schema.project(cols);
}

}  // namespace

IndexFile::IndexFile(HeapFile entries, std::vector<std::string> key_attrs)
    : entries_(std::move(entries)), key_attrs_(std::move(key_attrs)), key_schema_(key_schema_of(entries_.schema())) {
  if (key_attrs_.size() != key_schema_.size())
    raise(ErrorKind::storage, fmt::format("index entry schema ({}) does not match {} key attributes",
                                          entries_.schema().to_string(), key_attrs_.size()));
}

Schema IndexFile::entry_schema(const Schema& key_schema) {
  auto attrs = key_schema.attributes();
  attrs.push_back({kRidPage, Type::int64()});
  attrs.push_back({kRidSlot, Type::int64()});
  return Schema(std::move(attrs));
}

IndexFile build_index(ExecContext& ctx, const HeapFile& base, std::span<const std::string> key_attrs,
                      std::size_t buffers, const std::filesystem::path& target) {
  if (key_attrs.empty()) raise(ErrorKind::schema, "index needs at least one key attribute");
  const auto columns = base.schema().indices_of(key_attrs);
  const Schema entry_schema = IndexFile::entry_schema(base.schema().project(columns));

  HeapFile unsorted = ctx.temps.create(entry_schema);
  {
    HeapAppender out(ctx.pool, unsorted);
    HeapScanner scan(ctx.pool, base);
    while (auto t = scan.next()) {
      Tuple entry = project_tuple(*t, columns);
      entry.values.emplace_back(static_cast<std::int64_t>(scan.last_rid().page));
      entry.values.emplace_back(static_cast<std::int64_t>(scan.last_rid().slot));
      out.append(entry);
    }
    out.finish();
  }
  // Rids are unique, so sorting on every column is a total order.
  HeapFile sorted = external_sort(ctx, unsorted, SortKey::all(entry_schema), buffers);
  sorted.file().persist_as(target, FileKind::index);
  return IndexFile(std::move(sorted), std::vector<std::string>(key_attrs.begin(), key_attrs.end()));
}

IndexLeafScanner::IndexLeafScanner(BufferPool& pool, const IndexFile& index)
    : scan_(pool, index.entries()), key_arity_(index.key_schema().size()) {}

std::optional<IndexEntry> IndexLeafScanner::next() {
  auto t = scan_.next();
  if (!t) return std::nullopt;
  IndexEntry entry;
  auto page = std::get<std::int64_t>(t->values[key_arity_]);
  auto slot = std::get<std::int64_t>(t->values[key_arity_ + 1]);
  if (page < 0 || slot < 0) raise(ErrorKind::storage, "negative rid in index leaf");
  entry.rid = Rid{static_cast<PageId>(page), static_cast<std::uint32_t>(slot)};
  t->values.resize(key_arity_);
  entry.key = std::move(*t);
  return entry;
}

}  // namespace qeval
