#include <gtest/gtest.h>

#include <sstream>

#include "fixtures.hpp"
#include "qeval/codec.hpp"
#include "qeval/csv.hpp"
#include "qeval/error.hpp"
#include "qeval/page.hpp"

using namespace qeval;
using namespace qeval::testing;

TEST(HeapFile, PageCountFollowsTuplesPerPage) {
  Env env;
  Schema schema({{"a", Type::int64()}, {"s", Type::utf8(30)}});
  const std::size_t tpp = tuples_per_page(512, schema.tuple_width());
  Rng rng(3);
  for (std::size_t n : {std::size_t{0}, std::size_t{1}, tpp - 1, tpp, tpp + 1, 5 * tpp + 2}) {
    std::vector<Tuple> tuples;
    for (std::size_t i = 0; i < n; ++i) tuples.push_back(random_tuple(rng, schema, 100));
    HeapFile f = load_table(env, schema, tuples);
    EXPECT_EQ(f.page_count(), ceil_div(n, tpp)) << n;
    EXPECT_EQ(f.tuple_count(), n);
    EXPECT_EQ(read_all(env.pool, f), tuples);
  }
}

TEST(HeapFile, AppendReturnsSequentialRids) {
  Env env;
  Schema schema({{"a", Type::int64()}});
  HeapFile f = env.temps.create(schema);
  const std::size_t tpp = f.tuples_per_page();
  HeapAppender app(env.pool, f);
  for (std::size_t i = 0; i < 3 * tpp; ++i) {
    Rid rid = app.append(Tuple{{static_cast<std::int64_t>(i)}});
    EXPECT_EQ(rid.page, i / tpp);
    EXPECT_EQ(rid.slot, i % tpp);
  }
  app.finish();
  EXPECT_EQ(f.page_count(), 3u);
}

TEST(HeapFile, AppendResumesPartialPage) {
  Env env;
  Schema schema({{"a", Type::int64()}});
  HeapFile f = env.temps.create(schema);
  append_tuple(env.pool, f, Tuple{{std::int64_t{1}}});
  Rid second = append_tuple(env.pool, f, Tuple{{std::int64_t{2}}});
  EXPECT_EQ(second, (Rid{0, 1}));
  EXPECT_EQ(f.page_count(), 1u);
  EXPECT_EQ(read_all(env.pool, f).size(), 2u);
}

TEST(HeapFile, FetchByRidMatchesCsvOracle) {
  Env env;
  Schema schema = Schema::parse("id:int,name:str8");
  std::ostringstream csv;
  csv << "id,name\n";
  for (int i = 0; i < 200; ++i) csv << i << ",n" << (i * 7 % 13) << "\n";
  std::istringstream in(csv.str());
  CsvReader reader(in);
  reader.next();
  std::vector<Tuple> oracle;
  while (auto rec = reader.next()) oracle.push_back(parse_csv_row(*rec, schema));

  HeapFile f = env.temps.create(schema);
  std::vector<Rid> rids;
  {
    HeapAppender app(env.pool, f);
    for (const auto& t : oracle) rids.push_back(app.append(t));
    app.finish();
  }
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    auto k = static_cast<std::size_t>(uniform(rng, 0, 199));
    EXPECT_EQ(fetch_by_rid(env.pool, f, rids[k]), oracle[k]);
  }
}

TEST(HeapFile, FetchOutsideFileIsAddressError) {
  Env env;
  Schema schema({{"a", Type::int64()}});
  HeapFile f = load_table(env, schema, {Tuple{{std::int64_t{1}}}});
  for (Rid bad : {Rid{1, 0}, Rid{0, 1}, Rid{0, 10'000}}) {
    try {
      fetch_by_rid(env.pool, f, bad);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::address);
    }
  }
}

TEST(HeapFile, ScanOfEmptyFileYieldsNothing) {
  Env env;
  HeapFile f = env.temps.create(Schema({{"a", Type::int64()}}));
  HeapScanner scan(env.pool, f);
  EXPECT_FALSE(scan.next());
  EXPECT_EQ(env.pool.stats().page_reads, 0u);
}

TEST(HeapFile, CorruptPageIsStorageError) {
  Env env;
  Schema schema({{"a", Type::int64()}});
  HeapFile f = load_table(env, schema, {Tuple{{std::int64_t{1}}}});
  std::vector<std::byte> garbage(512, std::byte{0x7f});
  f.file().write_page(0, garbage);
  BufferPool fresh(PoolConfig{4, 512, 0});
  try {
    read_all(fresh, f);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::storage);
  }
}

TEST(TempArea, FilesVanishWhenDropped) {
  Env env;
  {
    HeapFile f = load_table(env, Schema({{"a", Type::int64()}}), {Tuple{{std::int64_t{1}}}});
    EXPECT_EQ(env.temps.pages_on_disk(), 1u);
  }
  EXPECT_EQ(env.temps.pages_on_disk(), 0u);
}
