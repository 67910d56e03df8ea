#include "qeval/sort.hpp"

#include <algorithm>
#include <optional>

#include <fmt/format.h>

#include "qeval/codec.hpp"
#include "qeval/error.hpp"

namespace qeval {

namespace {

void check_budget(const ExecContext& ctx, std::size_t buffers) {
  if (buffers < 3) raise(ErrorKind::usage, fmt::format("sort needs at least 3 buffers, got {}", buffers));
  if (buffers > ctx.pool.capacity())
    raise(ErrorKind::usage,
          fmt::format("operator budget of {} buffers exceeds pool capacity {}", buffers, ctx.pool.capacity()));
}

/// Sequential reader over a run that rejects adjacent inversions.
class SortedCursor {
 public:
  SortedCursor(BufferPool& pool, const Run& run, const SortKey& key, const char* label)
      : scan_(pool, run.file), key_(key), label_(label) {}

  std::optional<Tuple> next() {
    auto t = scan_.next();
    if (t && previous_ && key_.less(*t, *previous_))
      raise(ErrorKind::contract_violation,
            fmt::format("merge input {} is not sorted at page {} slot {}", label_, scan_.last_rid().page,
                        scan_.last_rid().slot));
    if (t) previous_ = *t;
    return t;
  }

 private:
  HeapScanner scan_;
  const SortKey& key_;
  const char* label_;
  std::optional<Tuple> previous_;
};

Run write_run(ExecContext& ctx, const Schema& schema, std::span<const Tuple> tuples, bool dedup) {
  Run run{ctx.temps.create(schema)};
  HeapAppender out(ctx.pool, run.file);
  const Tuple* last = nullptr;
  for (const auto& t : tuples) {
    if (dedup && last != nullptr && *last == t) continue;
    out.append(t);
    last = &t;
  }
  out.finish();
  return run;
}

}  // namespace

SortKey SortKey::on(const Schema& schema, std::span<const std::string> names) {
  if (names.empty()) raise(ErrorKind::schema, "sort key needs at least one attribute");
  return SortKey{schema.indices_of(names)};
}

SortKey SortKey::all(const Schema& schema) {
  SortKey key;
  for (std::size_t i = 0; i < schema.size(); ++i) key.columns.push_back(i);
  return key;
}

std::vector<Run> generate_runs(ExecContext& ctx, const HeapFile& input, const SortKey& key, std::size_t buffers,
                               SortStats* stats) {
  check_budget(ctx, buffers);
  PinProbe probe(ctx.pool);
  const auto& schema = input.schema();
  const auto less = [&key](const Tuple& a, const Tuple& b) { return key.less(a, b); };
  std::vector<Run> runs;
  std::vector<Tuple> load;
  for (PageId start = 0; start < input.page_count(); start += buffers) {
    PageId end = std::min<PageId>(start + buffers, input.page_count());
    load.clear();
    {
      std::vector<PageRef> frames;
      frames.reserve(end - start);
      for (PageId p = start; p < end; ++p) {
        frames.push_back(ctx.pool.get_page(input.file(), p, AccessMode::sequential));
        PageReader reader(frames.back().bytes());
        reader.validate(schema.tuple_width());
        for (std::uint32_t s = 0; s < reader.slot_count(); ++s) load.push_back(decode_tuple(reader.slot(s), schema));
      }
      // all buffers filled: sort them in memory
      quicksort(std::span<Tuple>(load), less);
    }
    runs.push_back(write_run(ctx, schema, load, false));
    if (stats != nullptr) stats->phase1_pages_written += runs.back().page_count();
  }
  if (stats != nullptr) {
    stats->runs_created += runs.size();
    stats->peak_pinned_run_generation = std::max(stats->peak_pinned_run_generation, probe.peak());
  }
  return runs;
}

std::vector<Run> generate_projected_runs(ExecContext& ctx, const HeapFile& input,
                                         std::span<const std::size_t> columns, std::size_t buffers,
                                         SortStats* stats) {
  check_budget(ctx, buffers);
  PinProbe probe(ctx.pool);
  const Schema out_schema = input.schema().project(columns);
  const std::size_t per_page = tuples_per_page(ctx.pool.page_size(), out_schema.tuple_width());
  if (per_page == 0)
    raise(ErrorKind::unsupported_tuple, fmt::format("projected tuple of {} bytes does not fit a page",
                                                    out_schema.tuple_width()));
  const std::size_t workspace_pages = buffers - 1;
  const std::size_t capacity = workspace_pages * per_page;
  const auto less = [](const Tuple& a, const Tuple& b) { return a < b; };

  std::vector<Run> runs;
  std::vector<Tuple> load;
  load.reserve(capacity);
  std::vector<PageRef> workspace;
  auto reserve_workspace = [&] {
    for (std::size_t i = 0; i < workspace_pages; ++i) workspace.push_back(ctx.pool.scratch());
  };
  auto flush = [&] {
    workspace.clear();
    quicksort(std::span<Tuple>(load), less);
    runs.push_back(write_run(ctx, out_schema, load, true));
    if (stats != nullptr) stats->phase1_pages_written += runs.back().page_count();
    load.clear();
  };

  HeapScanner scan(ctx.pool, input);
  reserve_workspace();
  while (auto t = scan.next()) {
    load.push_back(project_tuple(*t, columns));
    if (load.size() == capacity) {
      flush();
      reserve_workspace();
    }
  }
  workspace.clear();
  if (!load.empty()) flush();

  if (stats != nullptr) {
    stats->runs_created += runs.size();
    stats->peak_pinned_run_generation = std::max(stats->peak_pinned_run_generation, probe.peak());
  }
  return runs;
}

Run merge_two_runs(ExecContext& ctx, const Run& a, const Run& b, const SortKey& key, bool dedup, SortStats* stats) {
  if (!(a.file.schema() == b.file.schema()))
    raise(ErrorKind::usage, fmt::format("cannot merge runs with schemas ({}) and ({})", a.file.schema().to_string(),
                                        b.file.schema().to_string()));
  PinProbe probe(ctx.pool);
  Run out{ctx.temps.create(a.file.schema())};
  {
    HeapAppender writer(ctx.pool, out.file);  // output buffer T
    SortedCursor left(ctx.pool, a, key, "A");
    SortedCursor right(ctx.pool, b, key, "B");
    std::optional<Tuple> x = left.next();
    std::optional<Tuple> y = right.next();
    std::optional<Tuple> last;
    // nullopt is eof and sorts after every element
    while (x || y) {
      const bool take_left = x && (!y || !key.less(*y, *x));
      std::optional<Tuple>& chosen = take_left ? x : y;
      if (!(dedup && last && *last == *chosen)) {
        writer.append(*chosen);
        if (dedup) last = *chosen;
      }
      chosen = take_left ? left.next() : right.next();
    }
    writer.finish();
  }
  if (stats != nullptr) stats->peak_pinned_merge = std::max(stats->peak_pinned_merge, probe.peak());
  return out;
}

HeapFile merge_runs(ExecContext& ctx, std::vector<Run> runs, const Schema& schema, const SortKey& key, bool dedup,
                    SortStats* stats) {
  if (runs.empty()) return ctx.temps.create(schema);
  while (runs.size() > 1) {
    std::vector<Run> next;
    next.reserve((runs.size() + 1) / 2);
    std::uint64_t written = 0;
    for (std::size_t i = 0; i < runs.size(); i += 2) {
      if (i + 1 == runs.size()) {
        next.push_back(std::move(runs[i]));
        continue;
      }
      Run a = std::move(runs[i]);
      Run b = std::move(runs[i + 1]);
      next.push_back(merge_two_runs(ctx, a, b, key, dedup, stats));
      written += next.back().page_count();
      // a and b are deleted here, as soon as their merge is complete
    }
    runs = std::move(next);
    ctx.count("merge_passes");
    if (stats != nullptr) {
      ++stats->merge_passes;
      stats->pass_pages_written.push_back(written);
    }
  }
  return std::move(runs.front().file);
}

HeapFile external_sort(ExecContext& ctx, const HeapFile& input, const SortKey& key, std::size_t buffers,
                       SortStats* stats) {
  auto runs = generate_runs(ctx, input, key, buffers, stats);
  ctx.count("runs_created", runs.size());
  return merge_runs(ctx, std::move(runs), input.schema(), key, false, stats);
}

}  // namespace qeval
