#include "qeval/error.hpp"

#include <fmt/format.h>

namespace qeval {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::encoding: return "encoding";
    case ErrorKind::unsupported_tuple: return "unsupported-tuple";
    case ErrorKind::schema: return "schema";
    case ErrorKind::address: return "address";
    case ErrorKind::storage: return "storage";
    case ErrorKind::io: return "io";
    case ErrorKind::pool_exhausted: return "pool-exhausted";
    case ErrorKind::usage: return "usage";
    case ErrorKind::contract_violation: return "contract-violation";
    case ErrorKind::pathological_data: return "pathological-data";
    case ErrorKind::plan_validation: return "plan-validation";
    case ErrorKind::input: return "input";
  }
  return "unknown";
}

PlanError::PlanError(std::size_t step, std::string field, const std::string& message)
    : Error(ErrorKind::plan_validation,
            step == 0 ? message
                      : fmt::format("step {}{}: {}", step,
                                    field.empty() ? std::string{} : fmt::format(" [{}]", field),
                                    message)),
      step_(step),
      field_(std::move(field)) {}

void raise(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace qeval
