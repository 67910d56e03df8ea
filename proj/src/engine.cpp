#include "qeval/engine.hpp"

#include <chrono>
#include <memory>

#include <fmt/format.h>
#include <json.hpp>

#include "qeval/csv.hpp"
#include "qeval/operators.hpp"
#include "qeval/sort.hpp"

namespace qeval {

namespace {

using IoField = std::pair<const char*, std::uint64_t IoStats::*>;
constexpr IoField kIoFields[] = {
    {"page_reads", &IoStats::page_reads},
    {"page_writes", &IoStats::page_writes},
    {"read_requests", &IoStats::read_requests},
    {"readahead_pages", &IoStats::readahead_pages},
    {"temp_pages_written", &IoStats::temp_pages_written},
};

nlohmann::ordered_json io_json(const IoStats& io) {
  nlohmann::ordered_json j;
  for (auto [name, field] : kIoFields) j[name] = io.*field;
  return j;
}

// Routes pool counter increments to one step's IoStats while alive.
class Attribution {
 public:
  Attribution(BufferPool& pool, IoStats* sink) : pool_(pool), previous_(pool.set_attribution(sink)) {}
  ~Attribution() { pool_.set_attribution(previous_); }
  Attribution(const Attribution&) = delete;
  Attribution& operator=(const Attribution&) = delete;

 private:
  BufferPool& pool_;
  IoStats* previous_;
};

[[noreturn]] void rethrow_for(const BoundStep& step) {
  try {
    throw;
  } catch (const StepError&) {
    throw;
  } catch (const Error& e) {
    throw StepError(e.kind(), step.index, step.name, e.what());
  }
}

// A stream step runs lazily inside its consumer; its reads still go to its
// own report entry.
class AttributedStream final : public TupleStream {
 public:
  AttributedStream(BufferPool& pool, IoStats& sink, const BoundStep& step, std::unique_ptr<TupleStream> inner)
      : pool_(pool), sink_(sink), step_(step), inner_(std::move(inner)) {}

  const Schema& schema() const override { return inner_->schema(); }

  std::optional<Tuple> next() override {
    Attribution scope(pool_, &sink_);
    try {
      return inner_->next();
    } catch (...) {
      rethrow_for(step_);
    }
  }

 private:
  BufferPool& pool_;
  IoStats& sink_;
  const BoundStep& step_;
  std::unique_ptr<TupleStream> inner_;
};

// What a step hands to its consumer. `stream` may read from `file`, so it
// is declared after it and destroyed first.
struct Produced {
  std::unique_ptr<HeapFile> file;
  std::unique_ptr<TupleStream> stream;
};

class Executor {
 public:
  Executor(const ValidatedPlan& plan, const Database& db, const ExecConfig& config, RowSink& sink,
           BufferPool& pool, TempArea& temps, ExecutionReport& report)
      : plan_(plan), db_(db), config_(config), sink_(sink), pool_(pool), temps_(temps), report_(report) {}

  void run() {
    const auto& chain = plan_.chain;
    produced_.resize(chain.size());
    report_.steps.resize(chain.size());
    for (std::size_t pos = 0; pos < chain.size(); ++pos) {
      const auto& step = chain[pos];
      auto& rep = report_.steps[pos];
      rep.index = step.index;
      rep.name = step.name;
      rep.op = std::string(to_string(step.op));
      try {
        run_step(pos);
      } catch (...) {
        rethrow_for(step);
      }
    }
  }

 private:
  void run_step(std::size_t pos) {
    const auto& step = plan_.chain[pos];
    auto& rep = report_.steps[pos];

    Produced input;
    if (step.source) {
      input = std::move(produced_[*step.source]);
    } else if (step.op != OpKind::project_via_index) {
      input.file = std::make_unique<HeapFile>(db_.open_relation(step.relation));
    }

    if (step.op == OpKind::seq_scan) {
      auto& out = produced_[pos];
      out.file = std::move(input.file);
      out.stream = std::make_unique<AttributedStream>(pool_, rep.io, step, std::make_unique<SeqScan>(pool_, *out.file));
      return;
    }

    const std::size_t m = step.buffers.value_or(config_.buffers);
    if (pool_.capacity() != m) pool_.set_capacity(m);

    OpMetrics metrics;
    ExecContext ctx{pool_, temps_, &metrics};
    PinProbe probe(pool_);
    {
      Attribution scope(pool_, &rep.io);
      std::optional<HeapFile> result;
      switch (step.op) {
        case OpKind::materialize:
          result.emplace(materialize(ctx, *input.stream));
          break;
        case OpKind::external_sort: {
          auto key = SortKey::on(input.file->schema(), step.attrs);
          result.emplace(external_sort(ctx, *input.file, key, m));
          break;
        }
        case OpKind::project_sort_naive:
          result.emplace(project_sort_naive(ctx, *input.file, ProjectionSpec::make(input.file->schema(), step.attrs), m));
          break;
        case OpKind::project_sort_fused:
          result.emplace(project_sort_fused(ctx, *input.file, ProjectionSpec::make(input.file->schema(), step.attrs), m));
          break;
        case OpKind::project_hash:
          result.emplace(project_hash(ctx, *input.file, ProjectionSpec::make(input.file->schema(), step.attrs), m,
                                      step.seed.value_or(config_.seed)));
          break;
        case OpKind::project_via_index: {
          IndexFile index = db_.open_index(step.relation, step.attrs);
          result.emplace(project_via_index(ctx, index, step.prefix));
          break;
        }
        case OpKind::output:
          emit(input);
          break;
        case OpKind::seq_scan:
          break;
      }
      if (result) produced_[pos].file = std::make_unique<HeapFile>(std::move(*result));
    }
    // The input's temp file (if any) is released here, right after its
    // only consumer finished.
    input = Produced{};
    rep.counters = std::move(metrics.counters);
    rep.stages = std::move(metrics.stages);
    rep.peak_pinned = probe.peak();
  }

  void emit(Produced& input) {
    std::unique_ptr<TupleStream> scan;
    TupleStream* stream = input.stream.get();
    if (stream == nullptr) {
      scan = std::make_unique<SeqScan>(pool_, *input.file);
      stream = scan.get();
    }
    sink_.begin(stream->schema());
    while (auto t = stream->next()) {
      sink_.row(*t);
      ++report_.output_rows;
    }
    sink_.end();
  }

  const ValidatedPlan& plan_;
  const Database& db_;
  const ExecConfig& config_;
  RowSink& sink_;
  BufferPool& pool_;
  TempArea& temps_;
  ExecutionReport& report_;
  std::vector<Produced> produced_;
};

}  // namespace

StepError::StepError(ErrorKind kind, std::size_t step, std::string name, const std::string& message)
    : Error(kind, fmt::format("step {} ({}): {}", step, name, message)), step_(step), name_(std::move(name)) {}

void CsvSink::begin(const Schema& schema) { write_csv_header(out_, schema); }
void CsvSink::row(const Tuple& t) { write_csv_row(out_, t); }
void CsvSink::end() { out_.flush(); }

std::string ExecutionReport::to_key_values(bool with_elapsed) const {
  std::string out;
  for (auto [name, field] : kIoFields) out += fmt::format("{}={}\n", name, total.*field);
  out += fmt::format("output_rows={}\n", output_rows);
  out += fmt::format("peak_pinned={}\n", peak_pinned);
  for (const auto& [key, value] : counters) out += fmt::format("{}={}\n", key, value);
  for (const auto& step : steps) {
    const auto prefix = fmt::format("step.{}.{}", step.index, step.name);
    out += fmt::format("{}.op={}\n", prefix, step.op);
    for (auto [name, field] : kIoFields) out += fmt::format("{}.{}={}\n", prefix, name, step.io.*field);
    out += fmt::format("{}.peak_pinned={}\n", prefix, step.peak_pinned);
    for (const auto& [key, value] : step.counters) out += fmt::format("{}.{}={}\n", prefix, key, value);
    for (const auto& stage : step.stages) {
      const auto sp = fmt::format("{}.stage.{}", prefix, stage.name);
      for (auto [name, field] : kIoFields) out += fmt::format("{}.{}={}\n", sp, name, stage.io.*field);
      for (const auto& [key, value] : stage.values) out += fmt::format("{}.{}={}\n", sp, key, value);
    }
  }
  if (with_elapsed) out += fmt::format("elapsed_ms={:.3f}\n", elapsed_ms);
  return out;
}

std::string ExecutionReport::to_json(bool with_elapsed) const {
  nlohmann::ordered_json j = io_json(total);
  j["output_rows"] = output_rows;
  j["peak_pinned"] = peak_pinned;
  j["counters"] = counters;
  j["steps"] = nlohmann::ordered_json::array();
  for (const auto& step : steps) {
    nlohmann::ordered_json s;
    s["index"] = step.index;
    s["name"] = step.name;
    s["op"] = step.op;
    s["io"] = io_json(step.io);
    s["peak_pinned"] = step.peak_pinned;
    s["counters"] = step.counters;
    s["stages"] = nlohmann::ordered_json::array();
    for (const auto& stage : step.stages) {
      nlohmann::ordered_json st;
      st["name"] = stage.name;
      st["io"] = io_json(stage.io);
      st["values"] = stage.values;
      s["stages"].push_back(std::move(st));
    }
    j["steps"].push_back(std::move(s));
  }
  if (with_elapsed) j["elapsed_ms"] = elapsed_ms;
  return j.dump(2) + "\n";
}

ExecutionReport execute(const ValidatedPlan& plan, const Database& db, const ExecConfig& config, RowSink& sink) {
  const auto started = std::chrono::steady_clock::now();
  const auto& geometry = db.geometry();
  PoolConfig pool_config;
  pool_config.capacity = config.buffers;
  pool_config.page_size = geometry.page_size;
  pool_config.readahead_window = config.readahead.value_or(geometry.extent_length - 1);
  BufferPool pool(pool_config);
  TempArea temps(db.tmp_dir(), geometry);
  PinProbe probe(pool);

  ExecutionReport report;
  const IoStats before = pool.stats();
  Executor(plan, db, config, sink, pool, temps, report).run();

  report.total = pool.stats() - before;
  report.peak_pinned = probe.peak();
  for (const auto& step : report.steps)
    for (const auto& [key, value] : step.counters) report.counters[key] += value;
  report.elapsed_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  return report;
}

ExecutionReport execute(const PhysicalPlan& plan, const Database& db, const ExecConfig& config, RowSink& sink) {
  return execute(validate_plan(plan, db.catalog()), db, config, sink);
}

}  // namespace qeval
