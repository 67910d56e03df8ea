#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace qeval {

enum class ErrorKind {
  encoding,            // value does not fit its declared type
  unsupported_tuple,   // encoded tuple cannot fit a single page
  schema,              // unknown or duplicate attribute, malformed schema
  address,             // Rid or page id outside the file
  storage,             // corrupt page or file
  io,                  // operating-system level I/O failure
  pool_exhausted,      // every frame pinned
  usage,               // API misuse (unpin below zero, bad parameter)
  contract_violation,  // unsorted input handed to a sorted-input operator
  pathological_data,   // hash re-partitioning could not split a partition
  plan_validation,     // malformed or inconsistent physical plan
  input,               // malformed CSV / schema string
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Plan validation failure; `step` is the 1-based step index, 0 when the
/// problem is not tied to a single step.
class PlanError : public Error {
 public:
  PlanError(std::size_t step, std::string field, const std::string& message);

  std::size_t step() const noexcept { return step_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::size_t step_;
  std::string field_;
};

[[noreturn]] void raise(ErrorKind kind, const std::string& message);

}  // namespace qeval
