#include "fixtures.hpp"

#include <algorithm>
#include <atomic>
#include <unistd.h>

#include <fmt/format.h>

namespace qeval::testing {

ScratchDir::ScratchDir() {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          fmt::format("qeval-test-{}-{}", ::getpid(), counter.fetch_add(1));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

ScratchDir::~ScratchDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

Env::Env(std::size_t buffers, std::size_t page_size, std::size_t extent, std::size_t readahead)
    : geometry{page_size, extent},
      pool(PoolConfig{buffers, page_size, readahead}),
      temps(dir.path() / "tmp", geometry),
      ctx{pool, temps, &metrics} {}

std::int64_t uniform(Rng& rng, std::int64_t lo, std::int64_t hi) {
  return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
}

std::string random_text(Rng& rng, std::size_t max_len) {
  std::string s(static_cast<std::size_t>(uniform(rng, 0, static_cast<std::int64_t>(max_len))), 'a');
  for (auto& c : s) c = static_cast<char>('a' + uniform(rng, 0, 4));
  return s;
}

Tuple random_tuple(Rng& rng, const Schema& schema, std::int64_t domain) {
  Tuple t;
  for (const auto& attr : schema.attributes()) {
    if (attr.type.kind == TypeKind::int64)
      t.values.emplace_back(uniform(rng, 0, std::max<std::int64_t>(domain, 1) - 1));
    else
      t.values.emplace_back(random_text(rng, std::min<std::size_t>(attr.type.max_bytes, domain < 4 ? 1 : 3)));
  }
  return t;
}

Schema random_schema(Rng& rng, std::size_t max_attrs, std::size_t max_str) {
  std::vector<Attribute> attrs;
  const auto n = static_cast<std::size_t>(uniform(rng, 1, static_cast<std::int64_t>(max_attrs)));
  for (std::size_t i = 0; i < n; ++i) {
    Type type = uniform(rng, 0, 1) == 0 ? Type::int64() : Type::utf8(static_cast<std::uint16_t>(uniform(rng, 1, static_cast<std::int64_t>(max_str))));
    attrs.push_back({fmt::format("a{}", i), type});
  }
  return Schema(std::move(attrs));
}

HeapFile load_table(Env& env, const Schema& schema, const std::vector<Tuple>& tuples) {
  HeapFile file = env.temps.create(schema);
  HeapAppender appender(env.pool, file);
  for (const auto& t : tuples) appender.append(t);
  appender.finish();
  return file;
}

HeapFile table_with_pages(Env& env, Rng& rng, const Schema& schema, std::size_t pages, std::int64_t domain) {
  const std::size_t tpp = tuples_per_page(env.geometry.page_size, schema.tuple_width());
  std::size_t n = 0;
  if (pages > 0) n = (pages - 1) * tpp + static_cast<std::size_t>(uniform(rng, 1, static_cast<std::int64_t>(tpp)));
  std::vector<Tuple> tuples;
  tuples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) tuples.push_back(random_tuple(rng, schema, domain));
  return load_table(env, schema, tuples);
}

std::vector<Tuple> read_all(BufferPool& pool, const HeapFile& file) {
  std::vector<Tuple> out;
  HeapScanner scan(pool, file);
  while (auto t = scan.next()) out.push_back(std::move(*t));
  return out;
}

std::vector<Tuple> sorted(std::vector<Tuple> v) {
  std::sort(v.begin(), v.end());
  return v;
}

std::vector<Tuple> reference_projection(const std::vector<Tuple>& in, const std::vector<std::size_t>& columns) {
  std::vector<Tuple> out;
  out.reserve(in.size());
  for (const auto& t : in) {
    Tuple p;
    for (auto c : columns) p.values.push_back(t.values[c]);
    out.push_back(std::move(p));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool is_sorted_on(const std::vector<Tuple>& v, const std::vector<std::size_t>& columns) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (compare_on(v[i - 1], v[i], columns) > 0) return false;
  return true;
}

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

std::size_t ceil_log2(std::size_t n) {
  std::size_t k = 0;
  while ((std::size_t{1} << k) < n) ++k;
  return k;
}

}  // namespace qeval::testing
