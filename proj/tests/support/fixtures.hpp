#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "qeval/buffer_pool.hpp"
#include "qeval/context.hpp"
#include "qeval/heap_file.hpp"
#include "qeval/types.hpp"

namespace qeval::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class ScratchDir {
 public:
  ScratchDir();
  ~ScratchDir();
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

/// Pool + temp area + context over a scratch directory.
struct Env {
  explicit Env(std::size_t buffers = 8, std::size_t page_size = 512, std::size_t extent = 8,
               std::size_t readahead = 0);

  ScratchDir dir;
  StorageGeometry geometry;
  BufferPool pool;
  TempArea temps;
  OpMetrics metrics;
  ExecContext ctx;
};

using Rng = std::mt19937_64;

std::int64_t uniform(Rng& rng, std::int64_t lo, std::int64_t hi);

/// Random string of [a-e] characters, length 0..max_len.
std::string random_text(Rng& rng, std::size_t max_len);

/// Random tuple; integers fall in [0, domain) so duplicates are common for
/// small domains.
Tuple random_tuple(Rng& rng, const Schema& schema, std::int64_t domain);

/// Random schema of 1..max_attrs attributes named a0, a1, ...
Schema random_schema(Rng& rng, std::size_t max_attrs, std::size_t max_str = 12);

/// Writes `tuples` into a new temp heap file.
HeapFile load_table(Env& env, const Schema& schema, const std::vector<Tuple>& tuples);

/// Temp heap file of exactly `pages` pages (the last one possibly partial).
HeapFile table_with_pages(Env& env, Rng& rng, const Schema& schema, std::size_t pages, std::int64_t domain);

std::vector<Tuple> read_all(BufferPool& pool, const HeapFile& file);

std::vector<Tuple> sorted(std::vector<Tuple> v);

/// Reference projection: restrict, sort, unique.
std::vector<Tuple> reference_projection(const std::vector<Tuple>& in, const std::vector<std::size_t>& columns);

bool is_sorted_on(const std::vector<Tuple>& v, const std::vector<std::size_t>& columns);

std::size_t ceil_div(std::size_t a, std::size_t b);

/// ceil(log2(n)) for n >= 1, 0 for n <= 1.
std::size_t ceil_log2(std::size_t n);

}  // namespace qeval::testing
