#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <map>
#include <set>

#include "fixtures.hpp"
#include "qeval/error.hpp"
#include "qeval/operators.hpp"

using namespace qeval;
using namespace qeval::testing;

namespace {

Schema wide_schema() {
  return Schema({{"a", Type::int64()}, {"b", Type::utf8(6)}, {"pad", Type::utf8(60)}, {"c", Type::int64()}});
}

ProjectionSpec spec_of(const Schema& s, std::vector<std::string> names) { return ProjectionSpec::make(s, names); }

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error";
  return ErrorKind::io;
}

}  // namespace

TEST(ProjectionSpec, Validation) {
  Schema s = wide_schema();
  EXPECT_EQ(spec_of(s, {"c", "a"}).columns, (std::vector<std::size_t>{3, 0}));
  EXPECT_EQ(kind_of([&] { spec_of(s, {}); }), ErrorKind::schema);
  EXPECT_EQ(kind_of([&] { spec_of(s, {"a", "a"}); }), ErrorKind::schema);
  EXPECT_EQ(kind_of([&] { spec_of(s, {"zz"}); }), ErrorKind::schema);
}

TEST(Projection, AllStrategiesAgreeWithReference) {
  Rng rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    const auto m = static_cast<std::size_t>(uniform(rng, 3, 7));
    Env env(m);
    Schema schema = random_schema(rng, 5, 10);
    const auto pages = static_cast<std::size_t>(uniform(rng, 0, 12));
    HeapFile input = table_with_pages(env, rng, schema, pages, uniform(rng, 1, 6));
    std::vector<std::string> names;
    for (const auto& attr : schema.attributes())
      if (uniform(rng, 0, 1) == 1) names.push_back(attr.name);
    if (names.empty()) names.push_back(schema[0].name);
    std::shuffle(names.begin(), names.end(), rng);
    auto spec = spec_of(schema, names);
    auto expected = reference_projection(read_all(env.pool, input), spec.columns);

    auto naive = read_all(env.pool, project_sort_naive(env.ctx, input, spec, m));
    auto fused = read_all(env.pool, project_sort_fused(env.ctx, input, spec, m));
    EXPECT_EQ(naive, expected);
    EXPECT_EQ(fused, expected);
    try {
      auto hashed = read_all(env.pool, project_hash(env.ctx, input, spec, m, static_cast<std::uint64_t>(trial)));
      EXPECT_EQ(sorted(hashed), expected);
    } catch (const Error& e) {
      // Only a group of equal projected tuples too big for M-1 pages can
      // defeat re-partitioning.
      EXPECT_EQ(e.kind(), ErrorKind::pathological_data);
      std::map<Tuple, std::size_t> groups;
      std::size_t largest = 0;
      for (const auto& t : read_all(env.pool, input)) largest = std::max(largest, ++groups[project_tuple(t, spec.columns)]);
      EXPECT_GT(largest, (m - 1) * tuples_per_page(512, spec.output.tuple_width()));
    }
  }
}

TEST(Projection, EmptyInput) {
  Env env(3);
  HeapFile input = env.temps.create(wide_schema());
  auto spec = spec_of(input.schema(), {"a"});
  EXPECT_EQ(project_sort_naive(env.ctx, input, spec, 3).tuple_count(), 0u);
  EXPECT_EQ(project_sort_fused(env.ctx, input, spec, 3).tuple_count(), 0u);
  EXPECT_EQ(project_hash(env.ctx, input, spec, 3, 0).tuple_count(), 0u);
}

TEST(Projection, IdentityProjectionOfDistinctRowsKeepsAll) {
  Env env(4);
  Schema schema({{"a", Type::int64()}});
  std::vector<Tuple> rows;
  for (std::int64_t i = 0; i < 500; ++i) rows.push_back(Tuple{{(i * 7919) % 500}});
  HeapFile input = load_table(env, schema, rows);
  auto spec = spec_of(schema, {"a"});
  EXPECT_EQ(project_sort_naive(env.ctx, input, spec, 4).tuple_count(), 500u);
  EXPECT_EQ(project_sort_fused(env.ctx, input, spec, 4).tuple_count(), 500u);
  EXPECT_EQ(project_hash(env.ctx, input, spec, 4, 1).tuple_count(), 500u);
}

TEST(Projection, ConstantColumnCollapsesToOneRow) {
  Env env(4);
  Schema schema({{"a", Type::int64()}, {"b", Type::int64()}});
  std::vector<Tuple> rows;
  for (std::int64_t i = 0; i < 40; ++i) rows.push_back(Tuple{{std::int64_t{5}, i}});
  HeapFile input = load_table(env, schema, rows);
  auto spec = spec_of(schema, {"a"});
  const std::vector<Tuple> one{Tuple{{std::int64_t{5}}}};
  EXPECT_EQ(read_all(env.pool, project_sort_naive(env.ctx, input, spec, 4)), one);
  EXPECT_EQ(read_all(env.pool, project_sort_fused(env.ctx, input, spec, 4)), one);
}

TEST(Projection, LargeIdenticalProjectionCollapsesUnderHash) {
  Env env(3);
  Schema schema({{"a", Type::int64()}, {"b", Type::int64()}});
  std::vector<Tuple> rows;
  const std::size_t tpp = tuples_per_page(512, schema.tuple_width());
  for (std::size_t i = 0; i < 10 * tpp; ++i) rows.push_back(Tuple{{std::int64_t{1}, std::int64_t{2}}});
  HeapFile input = load_table(env, schema, rows);
  auto spec = spec_of(schema, {"a", "b"});
  const std::vector<Tuple> one{Tuple{{std::int64_t{1}, std::int64_t{2}}}};
  EXPECT_EQ(read_all(env.pool, project_hash(env.ctx, input, spec, 3, 0)), one);
  EXPECT_GT(env.metrics.counters.at("repartitions"), 0u);
}

TEST(Projection, HashGivesUpWhenDistinctDataOutgrowsRepartitioning) {
  // M = 3 splits in two per level: 1 + 4 levels cut 100 distinct pages to
  // about 3, still above M - 1 = 2.
  Env env(3);
  Schema schema({{"a", Type::int64()}});
  std::vector<Tuple> rows;
  const std::size_t tpp = tuples_per_page(512, schema.tuple_width());
  for (std::size_t i = 0; i < 100 * tpp; ++i) rows.push_back(Tuple{{static_cast<std::int64_t>(i)}});
  HeapFile input = load_table(env, schema, rows);
  const std::size_t before = env.temps.pages_on_disk();
  EXPECT_EQ(kind_of([&] { project_hash(env.ctx, input, spec_of(schema, {"a"}), 3, 0); }), ErrorKind::pathological_data);
  EXPECT_EQ(env.temps.pages_on_disk(), before);
  Env roomy(16);
  HeapFile copy = load_table(roomy, schema, rows);
  EXPECT_EQ(project_hash(roomy.ctx, copy, spec_of(schema, {"a"}), 16, 0).tuple_count(), rows.size());
}

TEST(Projection, NaiveReportsProjectedSize) {
  Env env(4);
  Rng rng(5);
  Schema schema = wide_schema();
  HeapFile input = table_with_pages(env, rng, schema, 12, 3);
  auto spec = spec_of(schema, {"a"});
  const std::size_t t = ceil_div(input.tuple_count(), tuples_per_page(512, spec.output.tuple_width()));
  project_sort_naive(env.ctx, input, spec, 4);
  ASSERT_EQ(env.metrics.stages.size(), 3u);
  EXPECT_EQ(env.metrics.stages[0].name, "project");
  EXPECT_EQ(env.metrics.stages[0].values.at("projected_pages"), t);
  EXPECT_EQ(env.metrics.stages[0].io.temp_pages_written, t);
  EXPECT_EQ(env.metrics.stages[1].name, "sort");
  EXPECT_EQ(env.metrics.stages[2].name, "dedup");
}

TEST(Projection, FusedWritesFewerTempPagesOnWideInput) {
  Rng rng(6);
  Schema schema = wide_schema();
  for (std::size_t m : {3, 4, 6}) {
    Env env(m);
    HeapFile input = table_with_pages(env, rng, schema, 30, 1000);
    auto spec = spec_of(schema, {"a", "c"});
    IoStats s0 = env.pool.stats();
    project_sort_naive(env.ctx, input, spec, m);
    IoStats s1 = env.pool.stats();
    project_sort_fused(env.ctx, input, spec, m);
    IoStats s2 = env.pool.stats();
    EXPECT_LT((s2 - s1).temp_pages_written, (s1 - s0).temp_pages_written);
  }
}

TEST(HashPartition, EqualTuplesShareAPartition) {
  Rng rng(7);
  Env env(5);
  Schema schema({{"a", Type::int64()}, {"b", Type::utf8(4)}, {"c", Type::int64()}});
  HeapFile input = table_with_pages(env, rng, schema, 8, 4);
  auto spec = spec_of(schema, {"a", "b"});
  for (std::uint64_t seed : {0ull, 1ull, 99ull}) {
    auto set = hash_partition(env.ctx, input, spec, 5, seed);
    ASSERT_EQ(set.partitions.size(), 4u);
    std::map<Tuple, std::size_t> home;
    for (std::size_t i = 0; i < set.partitions.size(); ++i) {
      for (const auto& t : read_all(env.pool, set.partitions[i])) {
        EXPECT_EQ(partition_of(t, spec.output, seed, 5), i + 1);
        auto [it, fresh] = home.emplace(t, i);
        EXPECT_EQ(it->second, i);
      }
    }
  }
}

TEST(HashPartition, PartitionOfRange) {
  Rng rng(8);
  Schema schema({{"a", Type::int64()}});
  for (int i = 0; i < 2000; ++i) {
    auto m = static_cast<std::size_t>(uniform(rng, 3, 20));
    auto p = partition_of(Tuple{{uniform(rng, -1000, 1000)}}, schema, 3, m);
    EXPECT_GE(p, 1u);
    EXPECT_LE(p, m - 1);
  }
}

TEST(HashPartition, SeedChangesAssignment) {
  Schema schema({{"a", Type::int64()}});
  int moved = 0;
  for (std::int64_t v = 0; v < 200; ++v)
    moved += partition_of(Tuple{{v}}, schema, 1, 16) != partition_of(Tuple{{v}}, schema, 2, 16);
  EXPECT_GT(moved, 100);
}

TEST(ProjectionBudget, PeakPinnedWithinM) {
  Rng rng(9);
  Schema schema = wide_schema();
  for (std::size_t m : {3, 4, 5, 8}) {
    Env env(m);
    HeapFile input = table_with_pages(env, rng, schema, 20, 50);
    auto spec = spec_of(schema, {"b", "a"});
    PinProbe probe(env.pool);
    project_sort_naive(env.ctx, input, spec, m);
    project_sort_fused(env.ctx, input, spec, m);
    project_hash(env.ctx, input, spec, m, 4);
    EXPECT_LE(probe.peak(), m);
  }
}

TEST(Streams, DedupAdjacentRejectsUnsortedInput) {
  Env env(3);
  Schema schema({{"a", Type::int64()}});
  HeapFile input = load_table(env, schema, {Tuple{{std::int64_t{2}}}, Tuple{{std::int64_t{1}}}});
  DedupAdjacent dedup(std::make_unique<SeqScan>(env.pool, input));
  EXPECT_EQ(kind_of([&] {
              while (dedup.next()) {
              }
            }),
            ErrorKind::contract_violation);
}

TEST(Streams, MaterializeCopiesRows) {
  Env env(3);
  Rng rng(10);
  HeapFile input = table_with_pages(env, rng, wide_schema(), 5, 10);
  SeqScan scan(env.pool, input);
  HeapFile copy = materialize(env.ctx, scan);
  EXPECT_EQ(read_all(env.pool, copy), read_all(env.pool, input));
  EXPECT_EQ(copy.page_count(), input.page_count());
}
