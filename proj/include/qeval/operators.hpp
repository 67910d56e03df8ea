#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qeval/context.hpp"
#include "qeval/heap_file.hpp"
#include "qeval/index.hpp"
#include "qeval/sort.hpp"
#include "qeval/types.hpp"

namespace qeval {

/// Pull-based tuple iterator.
class TupleStream {
 public:
  virtual ~TupleStream() = default;
  virtual const Schema& schema() const = 0;
  virtual std::optional<Tuple> next() = 0;
};

/// Attributes kept by a projection, in output order.
struct ProjectionSpec {
  std::vector<std::size_t> columns;
  Schema output;

  /// Validates: non-empty, no repeats, every name in `input`.
  static ProjectionSpec make(const Schema& input, std::span<const std::string> names);
};

/// Full scan in storage order using sequential-mode page requests.
class SeqScan final : public TupleStream {
 public:
  SeqScan(BufferPool& pool, const HeapFile& file) : file_(file), scan_(pool, file) {}

  const Schema& schema() const override { return file_.schema(); }
  std::optional<Tuple> next() override { return scan_.next(); }

 private:
  const HeapFile& file_;
  HeapScanner scan_;
};

/// Per-tuple attribute restriction; keeps duplicates.
class ProjectStream final : public TupleStream {
 public:
  ProjectStream(std::unique_ptr<TupleStream> input, ProjectionSpec spec)
      : input_(std::move(input)), spec_(std::move(spec)) {}

  const Schema& schema() const override { return spec_.output; }
  std::optional<Tuple> next() override;

 private:
  std::unique_ptr<TupleStream> input_;
  ProjectionSpec spec_;
};

/// Drops a tuple equal to its predecessor. The input must be sorted in
/// full-tuple order; an inversion raises contract_violation.
class DedupAdjacent final : public TupleStream {
 public:
  explicit DedupAdjacent(std::unique_ptr<TupleStream> input) : input_(std::move(input)) {}

  const Schema& schema() const override { return input_->schema(); }
  std::optional<Tuple> next() override;

 private:
  std::unique_ptr<TupleStream> input_;
  std::optional<Tuple> last_;
};

/// Writes a stream into a new temp heap file.
HeapFile materialize(ExecContext& ctx, TupleStream& input);

/// Projection by sort in three separate steps: scan + project into a
/// T-page temp table, external sort of that table on all of its
/// attributes, then a scan that drops adjacent duplicates. Stage markers:
/// "project" (with projected_pages = T), "sort", "dedup".
HeapFile project_sort_naive(ExecContext& ctx, const HeapFile& input, const ProjectionSpec& spec,
                            std::size_t buffers);

/// Projection by sort with projection folded into run generation and
/// duplicate elimination folded into run writing and every merge. Output is
/// byte-identical to project_sort_naive.
HeapFile project_sort_fused(ExecContext& ctx, const HeapFile& input, const ProjectionSpec& spec,
                            std::size_t buffers);

/// Seeded 64-bit hash of the tuple's canonical encoding.
std::uint64_t tuple_hash(const Tuple& t, const Schema& schema, std::uint64_t seed);

/// h(t) in 1..M-1.
std::size_t partition_of(const Tuple& t, const Schema& schema, std::uint64_t seed, std::size_t buffers);

struct HashPartitionSet {
  std::vector<HeapFile> partitions;  // partitions[i] holds h(t) == i + 1
  std::uint64_t seed = 0;
  Schema schema;
};

/// Hash projection phase 1: one input frame, M-1 output frames, one
/// partition per output frame.
HashPartitionSet hash_partition(ExecContext& ctx, const HeapFile& input, const ProjectionSpec& spec,
                                std::size_t buffers, std::uint64_t seed);

inline constexpr std::size_t kMaxRepartitionDepth = 4;

/// Hash projection. Phase 2 deduplicates each partition of at most M-1
/// pages in memory; larger partitions are re-partitioned with a derived
/// seed (dropping tuples already in the open output page), at most
/// kMaxRepartitionDepth times, then pathological_data is raised. Output
/// order: partition order, first arrival within a partition.
HeapFile project_hash(ExecContext& ctx, const HeapFile& input, const ProjectionSpec& spec, std::size_t buffers,
                      std::uint64_t seed);

/// Distinct sorted prefixes of the index keys, read from the leaves only.
HeapFile project_via_index(ExecContext& ctx, const IndexFile& index, std::size_t prefix_len);

}  // namespace qeval
