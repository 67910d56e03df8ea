#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "qeval/buffer_pool.hpp"
#include "qeval/catalog.hpp"
#include "qeval/context.hpp"
#include "qeval/error.hpp"
#include "qeval/plan.hpp"
#include "qeval/types.hpp"

namespace qeval {

struct ExecConfig {
  std::size_t buffers = 16;              // global M; steps may override with buffers:N
  std::optional<std::size_t> readahead;  // default: extent_length - 1
  std::uint64_t seed = 0;                // project_hash seed unless the step sets one
};

struct StepReport {
  std::size_t index = 0;
  std::string name;
  std::string op;
  IoStats io;
  std::size_t peak_pinned = 0;
  std::map<std::string, std::uint64_t> counters;
  std::vector<StageMarker> stages;
};

struct ExecutionReport {
  std::vector<StepReport> steps;
  IoStats total;
  std::uint64_t output_rows = 0;
  std::size_t peak_pinned = 0;
  std::map<std::string, std::uint64_t> counters;  // summed over steps
  double elapsed_ms = 0;

  /// `key=value` lines; elapsed_ms comes last so it can be cut off when
  /// comparing runs.
  std::string to_key_values(bool with_elapsed = true) const;
  std::string to_json(bool with_elapsed = true) const;
};

/// Receives the output step's rows in the producing operator's order.
class RowSink {
 public:
  virtual ~RowSink() = default;
  virtual void begin(const Schema& schema) = 0;
  virtual void row(const Tuple& t) = 0;
  virtual void end() {}
};

/// Header line, then one CSV line per row.
class CsvSink final : public RowSink {
 public:
  explicit CsvSink(std::ostream& out) : out_(out) {}
  void begin(const Schema& schema) override;
  void row(const Tuple& t) override;
  void end() override;

 private:
  std::ostream& out_;
};

class CollectingSink final : public RowSink {
 public:
  void begin(const Schema& schema) override { schema_ = schema; }
  void row(const Tuple& t) override { rows_.push_back(t); }

  const Schema& schema() const noexcept { return schema_; }
  const std::vector<Tuple>& rows() const noexcept { return rows_; }

 private:
  Schema schema_;
  std::vector<Tuple> rows_;
};

/// An operator error annotated with the step it came from. The kind of the
/// original error is kept.
class StepError : public Error {
 public:
  StepError(ErrorKind kind, std::size_t step, std::string name, const std::string& message);

  std::size_t step() const noexcept { return step_; }
  const std::string& step_name() const noexcept { return name_; }

 private:
  std::size_t step_;
  std::string name_;
};

/// Runs the chain with a fresh pool of `config.buffers` frames. Temporaries
/// go to `<db>/tmp/` and are deleted once their consumer finishes, or on
/// error before it propagates. Base relations are only read.
ExecutionReport execute(const ValidatedPlan& plan, const Database& db, const ExecConfig& config, RowSink& sink);

ExecutionReport execute(const PhysicalPlan& plan, const Database& db, const ExecConfig& config, RowSink& sink);

}  // namespace qeval
