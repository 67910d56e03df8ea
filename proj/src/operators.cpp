#include "qeval/operators.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <unordered_set>

#include <fmt/format.h>

#include "qeval/codec.hpp"
#include "qeval/error.hpp"

namespace qeval {

namespace {

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::size_t level) {
  return mix64(seed + 0x9E3779B97F4A7C15ull * (level + 1));
}

void check_budget(const ExecContext& ctx, std::size_t buffers) {
  if (buffers < 3) raise(ErrorKind::usage, fmt::format("operator needs at least 3 buffers, got {}", buffers));
  if (buffers > ctx.pool.capacity())
    raise(ErrorKind::usage,
          fmt::format("operator budget of {} buffers exceeds pool capacity {}", buffers, ctx.pool.capacity()));
}

struct TupleHasher {
  const Schema* schema;
  std::size_t operator()(const Tuple& t) const { return tuple_hash(t, *schema, 0x5eed5eedull); }
};

// With `drop_page_duplicates`, a tuple already present in its partition's
// current output page is not appended again. Phase 1 keeps every tuple;
// re-partitioning inside phase 2 uses this so a large group of equal tuples
// shrinks instead of following itself into one oversized partition.
HashPartitionSet partition_stream(ExecContext& ctx, TupleStream& input, const Schema& schema, std::size_t buffers,
                                  std::uint64_t seed, bool drop_page_duplicates = false) {
  HashPartitionSet set{{}, seed, schema};
  const std::size_t fanout = buffers - 1;
  set.partitions.reserve(fanout);
  for (std::size_t i = 0; i < fanout; ++i) set.partitions.push_back(ctx.temps.create(schema));
  // one output frame per partition; a full frame is written to its partition
  std::vector<HeapAppender> outputs;
  outputs.reserve(fanout);
  for (auto& p : set.partitions) outputs.emplace_back(ctx.pool, p);
  const std::size_t per_page = tuples_per_page(ctx.pool.page_size(), schema.tuple_width());
  std::vector<std::set<Tuple>> open_page(fanout);
  while (auto t = input.next()) {
    const std::size_t i = partition_of(*t, schema, seed, buffers) - 1;
    if (drop_page_duplicates) {
      if (!open_page[i].insert(*t).second) continue;
      if (open_page[i].size() == per_page) open_page[i].clear();
    }
    outputs[i].append(*t);
  }
  for (auto& out : outputs) out.finish();
  return set;
}

}  // namespace

ProjectionSpec ProjectionSpec::make(const Schema& input, std::span<const std::string> names) {
  if (names.empty()) raise(ErrorKind::schema, "projection needs at least one attribute");
  ProjectionSpec spec;
  for (const auto& n : names) {
    auto i = input.index_of(n);
    if (std::find(spec.columns.begin(), spec.columns.end(), i) != spec.columns.end())
      raise(ErrorKind::schema, fmt::format("attribute '{}' repeated in projection", n));
    spec.columns.push_back(i);
  }
  spec.output = input.project(spec.columns);
  return spec;
}

std::optional<Tuple> ProjectStream::next() {
  auto t = input_->next();
  if (!t) return std::nullopt;
  return project_tuple(*t, spec_.columns);
}

std::optional<Tuple> DedupAdjacent::next() {
  while (auto t = input_->next()) {
    if (last_) {
      if (*t < *last_) raise(ErrorKind::contract_violation, "duplicate elimination input is not sorted");
      if (*t == *last_) continue;
    }
    last_ = *t;
    return t;
  }
  return std::nullopt;
}

HeapFile materialize(ExecContext& ctx, TupleStream& input) {
  HeapFile out = ctx.temps.create(input.schema());
  HeapAppender writer(ctx.pool, out);
  while (auto t = input.next()) writer.append(*t);
  writer.finish();
  return out;
}

HeapFile project_sort_naive(ExecContext& ctx, const HeapFile& input, const ProjectionSpec& spec,
                            std::size_t buffers) {
  check_budget(ctx, buffers);

  StageScope project(ctx, "project");
  HeapFile projected = ctx.temps.create(spec.output);
  {
    HeapAppender writer(ctx.pool, projected);
    HeapScanner scan(ctx.pool, input);
    while (auto t = scan.next()) writer.append(project_tuple(*t, spec.columns));
    writer.finish();
  }
  const std::uint64_t projected_pages = projected.page_count();
  project.finish({{"projected_pages", projected_pages}});
  ctx.count("projected_pages", projected_pages);

  StageScope sort(ctx, "sort");
  SortStats stats;
  HeapFile sorted = external_sort(ctx, projected, SortKey::all(spec.output), buffers, &stats);
  { HeapFile done = std::move(projected); }
  sort.finish({{"runs", stats.runs_created}, {"passes", stats.merge_passes}});

  StageScope dedup(ctx, "dedup");
  HeapFile out = ctx.temps.create(spec.output);
  {
    HeapAppender writer(ctx.pool, out);
    DedupAdjacent distinct(std::make_unique<SeqScan>(ctx.pool, sorted));
    while (auto t = distinct.next()) writer.append(*t);
    writer.finish();
  }
  dedup.finish({{"output_pages", out.page_count()}});
  return out;
}

HeapFile project_sort_fused(ExecContext& ctx, const HeapFile& input, const ProjectionSpec& spec,
                            std::size_t buffers) {
  check_budget(ctx, buffers);
  SortStats stats;
  StageScope phase1(ctx, "run_generation");
  auto runs = generate_projected_runs(ctx, input, spec.columns, buffers, &stats);
  phase1.finish({{"runs", runs.size()}});
  ctx.count("runs_created", runs.size());

  StageScope phase2(ctx, "merge");
  HeapFile out = merge_runs(ctx, std::move(runs), spec.output, SortKey::all(spec.output), true, &stats);
  phase2.finish({{"passes", stats.merge_passes}});
  return out;
}

std::uint64_t tuple_hash(const Tuple& t, const Schema& schema, std::uint64_t seed) {
  auto bytes = encode_tuple(t, schema);
  std::uint64_t h = 0xcbf29ce484222325ull ^ mix64(seed);
  for (auto b : bytes) {
    h ^= static_cast<std::uint64_t>(b);
    h *= 0x100000001b3ull;
  }
  return mix64(h);
}

std::size_t partition_of(const Tuple& t, const Schema& schema, std::uint64_t seed, std::size_t buffers) {
  if (buffers < 3) raise(ErrorKind::usage, fmt::format("hash partitioning needs at least 3 buffers, got {}", buffers));
  return 1 + static_cast<std::size_t>(tuple_hash(t, schema, seed) % (buffers - 1));
}

HashPartitionSet hash_partition(ExecContext& ctx, const HeapFile& input, const ProjectionSpec& spec,
                                std::size_t buffers, std::uint64_t seed) {
  check_budget(ctx, buffers);
  ProjectStream projected(std::make_unique<SeqScan>(ctx.pool, input), spec);
  return partition_stream(ctx, projected, spec.output, buffers, seed);
}

HeapFile project_hash(ExecContext& ctx, const HeapFile& input, const ProjectionSpec& spec, std::size_t buffers,
                      std::uint64_t seed) {
  check_budget(ctx, buffers);
  const std::size_t memory_pages = buffers - 1;

  StageScope partition(ctx, "partition");
  HashPartitionSet set = hash_partition(ctx, input, spec, buffers, seed);
  partition.finish({{"partitions", set.partitions.size()}});

  StageScope dedup(ctx, "dedup");
  // Split oversized partitions first so that nothing else holds frames
  // while they are re-partitioned.
  std::vector<HeapFile> leaves;
  std::uint64_t repartitions = 0;
  std::function<void(HeapFile, std::size_t)> resolve = [&](HeapFile part, std::size_t depth) {
    if (part.page_count() <= memory_pages) {
      leaves.push_back(std::move(part));
      return;
    }
    if (depth >= kMaxRepartitionDepth)
      raise(ErrorKind::pathological_data,
            fmt::format("partition of {} pages still exceeds {} buffers after {} re-partitionings", part.page_count(),
                        memory_pages, depth));
    HashPartitionSet sub;
    {
      SeqScan scan(ctx.pool, part);
      sub = partition_stream(ctx, scan, part.schema(), buffers, derive_seed(seed, depth), true);
    }
    ++repartitions;
    { HeapFile done = std::move(part); }
    for (auto& p : sub.partitions) resolve(std::move(p), depth + 1);
  };
  for (auto& p : set.partitions) resolve(std::move(p), 0);
  set.partitions.clear();

  HeapFile out = ctx.temps.create(spec.output);
  {
    HeapAppender writer(ctx.pool, out);
    for (auto& slot : leaves) {
      HeapFile leaf = std::move(slot);
      std::unordered_set<Tuple, TupleHasher> seen(16, TupleHasher{&leaf.schema()});
      std::vector<PageRef> resident;
      resident.reserve(leaf.page_count());
      for (PageId p = 0; p < leaf.page_count(); ++p) {
        resident.push_back(ctx.pool.get_page(leaf.file(), p, AccessMode::sequential));
        PageReader reader(resident.back().bytes());
        reader.validate(leaf.schema().tuple_width());
        for (std::uint32_t s = 0; s < reader.slot_count(); ++s) {
          Tuple t = decode_tuple(reader.slot(s), leaf.schema());
          if (seen.insert(t).second) writer.append(t);
        }
      }
    }
    writer.finish();
  }
  ctx.count("repartitions", repartitions);
  dedup.finish({{"repartitions", repartitions}, {"leaf_partitions", leaves.size()}});
  return out;
}

HeapFile project_via_index(ExecContext& ctx, const IndexFile& index, std::size_t prefix_len) {
  if (prefix_len == 0 || prefix_len > index.key_schema().size())
    raise(ErrorKind::usage, fmt::format("prefix length {} outside 1..{} for index on ({})", prefix_len,
                                        index.key_schema().size(), fmt::join(index.key_attrs(), ",")));
  std::vector<std::size_t> prefix(prefix_len);
  for (std::size_t i = 0; i < prefix_len; ++i) prefix[i] = i;
  HeapFile out = ctx.temps.create(index.key_schema().project(prefix));
  HeapAppender writer(ctx.pool, out);
  IndexLeafScanner leaves(ctx.pool, index);
  std::optional<Tuple> last;
  while (auto entry = leaves.next()) {
    entry->key.values.resize(prefix_len);
    if (last) {
      if (entry->key < *last) raise(ErrorKind::contract_violation, "index leaves are not in key order");
      if (entry->key == *last) continue;
    }
    writer.append(entry->key);
    last = std::move(entry->key);
  }
  writer.finish();
  return out;
}

}  // namespace qeval
