#include <gtest/gtest.h>

#include <algorithm>

#include "fixtures.hpp"
#include "qeval/error.hpp"
#include "qeval/sort.hpp"

using namespace qeval;
using namespace qeval::testing;

namespace {

Schema kv_schema() { return Schema({{"k", Type::int64()}, {"v", Type::utf8(20)}}); }

qeval::Run make_run(Env& env, const Schema& schema, std::vector<Tuple> tuples) {
  std::sort(tuples.begin(), tuples.end());
  return qeval::Run{load_table(env, schema, tuples)};
}

}  // namespace

TEST(Quicksort, MatchesStdSort) {
  Rng rng(1);
  for (int trial = 0; trial < 300; ++trial) {
    const auto n = static_cast<std::size_t>(uniform(rng, 0, 300));
    const auto domain = uniform(rng, 1, 1000);
    std::vector<std::int64_t> v(n);
    for (auto& x : v) x = uniform(rng, 0, domain);
    auto expected = v;
    std::sort(expected.begin(), expected.end());
    quicksort(std::span<std::int64_t>(v), std::less<>{});
    ASSERT_EQ(v, expected);
  }
}

TEST(Quicksort, SortedReversedAndConstantInputs) {
  std::vector<int> up(1000), down(1000), flat(1000, 7);
  for (int i = 0; i < 1000; ++i) up[static_cast<std::size_t>(i)] = i, down[static_cast<std::size_t>(i)] = 1000 - i;
  for (auto* v : {&up, &down, &flat}) {
    quicksort(std::span<int>(*v), std::less<>{});
    EXPECT_TRUE(std::is_sorted(v->begin(), v->end()));
  }
}

TEST(RunGeneration, TenPagesFourBuffers) {
  Env env(4);
  Rng rng(2);
  Schema schema = kv_schema();
  HeapFile input = table_with_pages(env, rng, schema, 10, 50);
  SortKey key = SortKey::on(schema, std::vector<std::string>{"k"});
  SortStats stats;
  auto runs = generate_runs(env.ctx, input, key, 4, &stats);
  ASSERT_EQ(runs.size(), 3u);
  EXPECT_EQ(runs[0].page_count(), 4u);
  EXPECT_EQ(runs[1].page_count(), 4u);
  EXPECT_EQ(runs[2].page_count(), 2u);
  EXPECT_EQ(stats.phase1_pages_written, 10u);
  EXPECT_LE(stats.peak_pinned_run_generation, 4u);
  std::vector<Tuple> all;
  for (const auto& r : runs) {
    auto rows = read_all(env.pool, r.file);
    EXPECT_TRUE(is_sorted_on(rows, key.columns));
    all.insert(all.end(), rows.begin(), rows.end());
  }
  EXPECT_EQ(sorted(all), sorted(read_all(env.pool, input)));
}

TEST(RunGeneration, EmptyInputHasNoRuns) {
  Env env(3);
  HeapFile input = env.temps.create(kv_schema());
  EXPECT_TRUE(generate_runs(env.ctx, input, SortKey::all(input.schema()), 3).empty());
}

TEST(RunGeneration, BudgetAbovePoolIsUsageError) {
  Env env(3);
  HeapFile input = env.temps.create(kv_schema());
  try {
    generate_runs(env.ctx, input, SortKey::all(input.schema()), 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::usage);
  }
}

TEST(MergeTwoRuns, Examples) {
  Env env(3);
  Schema schema = kv_schema();
  SortKey key = SortKey::on(schema, std::vector<std::string>{"k"});
  auto t = [](std::int64_t k) { return Tuple{{k, std::string("x")}}; };

  qeval::Run a = make_run(env, schema, {t(1), t(3), t(5)});
  qeval::Run b = make_run(env, schema, {t(2), t(4)});
  EXPECT_EQ(read_all(env.pool, merge_two_runs(env.ctx, a, b, key).file), (std::vector<Tuple>{t(1), t(2), t(3), t(4), t(5)}));

  qeval::Run empty = make_run(env, schema, {});
  EXPECT_EQ(read_all(env.pool, merge_two_runs(env.ctx, empty, a, key).file), read_all(env.pool, a.file));
  EXPECT_EQ(read_all(env.pool, merge_two_runs(env.ctx, a, empty, key).file), read_all(env.pool, a.file));
  EXPECT_EQ(merge_two_runs(env.ctx, empty, empty, key).tuple_count(), 0u);

  qeval::Run same1 = make_run(env, schema, {t(7), t(7)});
  qeval::Run same2 = make_run(env, schema, {t(7)});
  EXPECT_EQ(merge_two_runs(env.ctx, same1, same2, key).tuple_count(), 3u);
  EXPECT_EQ(merge_two_runs(env.ctx, same1, same2, SortKey::all(schema), true).tuple_count(), 1u);
}

TEST(MergeTwoRuns, UsesThreeFrames) {
  Env env(3);
  Rng rng(4);
  Schema schema = kv_schema();
  SortKey key = SortKey::all(schema);
  std::vector<Tuple> x, y;
  for (int i = 0; i < 300; ++i) x.push_back(random_tuple(rng, schema, 1000)), y.push_back(random_tuple(rng, schema, 1000));
  qeval::Run a = make_run(env, schema, x), b = make_run(env, schema, y);
  SortStats stats;
  qeval::Run m = merge_two_runs(env.ctx, a, b, key, false, &stats);
  EXPECT_LE(stats.peak_pinned_merge, 3u);
  x.insert(x.end(), y.begin(), y.end());
  EXPECT_EQ(read_all(env.pool, m.file), sorted(x));
}

TEST(MergeTwoRuns, UnsortedInputIsContractViolation) {
  Env env(3);
  Schema schema = kv_schema();
  qeval::Run bad{load_table(env, schema, {Tuple{{std::int64_t{2}, std::string()}}, Tuple{{std::int64_t{1}, std::string()}}})};
  qeval::Run ok = make_run(env, schema, {});
  try {
    merge_two_runs(env.ctx, bad, ok, SortKey::all(schema));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::contract_violation);
  }
}

TEST(ExternalSort, PassCountAndExactIo) {
  Rng rng(8);
  Schema schema = kv_schema();
  const std::size_t tpp = tuples_per_page(512, schema.tuple_width());
  for (std::size_t m : {3, 4, 5}) {
    for (std::size_t pages : {0, 1, 3, 7, 12, 25}) {
      Env env(m);
      std::vector<Tuple> tuples;
      for (std::size_t i = 0; i < pages * tpp; ++i) tuples.push_back(random_tuple(rng, schema, 100));
      HeapFile input = load_table(env, schema, tuples);
      SortKey key = SortKey::on(schema, std::vector<std::string>{"k"});
      const IoStats before = env.pool.stats();
      SortStats stats;
      HeapFile out = external_sort(env.ctx, input, key, m, &stats);
      const IoStats io = env.pool.stats() - before;

      // Oracle: simulate pairing on page counts of full-page runs.
      std::vector<std::size_t> runs;
      for (std::size_t p = 0; p < pages; p += m) runs.push_back(std::min(m, pages - p));
      std::size_t passes = 0, reads = pages, writes = pages;
      while (runs.size() > 1) {
        std::vector<std::size_t> next;
        for (std::size_t i = 0; i + 1 < runs.size(); i += 2) {
          next.push_back(runs[i] + runs[i + 1]);
          reads += runs[i] + runs[i + 1];
          writes += runs[i] + runs[i + 1];
        }
        if (runs.size() % 2 == 1) next.push_back(runs.back());
        runs = std::move(next);
        ++passes;
      }
      EXPECT_EQ(stats.runs_created, ceil_div(pages, m));
      EXPECT_EQ(stats.merge_passes, ceil_log2(ceil_div(pages, m)));
      EXPECT_EQ(stats.merge_passes, passes);
      EXPECT_EQ(stats.phase1_pages_written, pages);
      EXPECT_EQ(io.page_reads, reads) << m << " " << pages;
      EXPECT_EQ(io.page_writes, writes);
      EXPECT_EQ(io.temp_pages_written, writes);
      EXPECT_EQ(out.page_count(), pages);
      auto rows = read_all(env.pool, out);
      EXPECT_TRUE(is_sorted_on(rows, key.columns));
      EXPECT_EQ(sorted(rows), sorted(tuples));
      EXPECT_LE(stats.peak_pinned_merge, 3u);
    }
  }
}

TEST(ExternalSort, LeavesOnlyTheResult) {
  Env env(3);
  Rng rng(9);
  HeapFile input = table_with_pages(env, rng, kv_schema(), 9, 100);
  const std::size_t before = env.temps.pages_on_disk();
  {
    HeapFile out = external_sort(env.ctx, input, SortKey::all(input.schema()), 3);
    EXPECT_EQ(env.temps.pages_on_disk(), before + out.page_count());
  }
  EXPECT_EQ(env.temps.pages_on_disk(), before);
}
