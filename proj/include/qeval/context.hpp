#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qeval/buffer_pool.hpp"
#include "qeval/heap_file.hpp"

namespace qeval {

/// I/O of one named phase of an operator, plus any sizes it wants to report
/// (for example the projected table size T).
struct StageMarker {
  std::string name;
  IoStats io;
  std::map<std::string, std::uint64_t> values;
};

struct OpMetrics {
  std::vector<StageMarker> stages;
  std::map<std::string, std::uint64_t> counters;

  void add(const std::string& key, std::uint64_t n = 1) { counters[key] += n; }
};

/// What an operator runs against: the shared pool, the temp area, and an
/// optional metrics sink.
struct ExecContext {
  BufferPool& pool;
  TempArea& temps;
  OpMetrics* metrics = nullptr;

  void count(const std::string& key, std::uint64_t n = 1) {
    if (metrics != nullptr) metrics->add(key, n);
  }
};

/// Records the pool I/O between construction and finish() as a stage.
class StageScope {
 public:
  StageScope(ExecContext& ctx, std::string name)
      : ctx_(ctx), name_(std::move(name)), start_(ctx.pool.stats()) {}

  void finish(std::map<std::string, std::uint64_t> values = {}) {
    if (ctx_.metrics != nullptr)
      ctx_.metrics->stages.push_back({name_, ctx_.pool.stats() - start_, std::move(values)});
  }

 private:
  ExecContext& ctx_;
  std::string name_;
  IoStats start_;
};

}  // namespace qeval
