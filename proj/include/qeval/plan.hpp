#pragma once

// Physical plan text format, one step per line:
//
//   plan  := { line }
//   line  := [ step ] [ '#' comment ] NEWLINE
//   step  := NAME '=' OP '(' [ arg { ',' arg } ] ')' [ '<-' NAME ]
//   arg   := KEY ':' VALUE
//   NAME, OP, KEY := [A-Za-z_][A-Za-z0-9_]*
//   VALUE := one or more characters other than ',', ')', '#' and whitespace;
//            attribute lists are written a|b|c
//
// The name after '<-' is either another step or a catalog relation.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qeval/catalog.hpp"
#include "qeval/types.hpp"

namespace qeval {

struct PlanStep {
  std::string name;
  std::string op;
  std::vector<std::pair<std::string, std::string>> args;
  std::string input;  // empty when the step has no input

  const std::string* arg(std::string_view key) const;

  friend bool operator==(const PlanStep&, const PlanStep&) = default;
};

struct PhysicalPlan {
  std::vector<PlanStep> steps;

  friend bool operator==(const PhysicalPlan&, const PhysicalPlan&) = default;
};

/// Syntax only; catalog checks happen in validate_plan().
PhysicalPlan parse_plan(std::string_view text);
PhysicalPlan parse_plan_json(std::string_view text);

std::string print_plan(const PhysicalPlan& plan);
std::string plan_to_json(const PhysicalPlan& plan);

enum class OpKind : std::uint8_t {
  seq_scan,
  materialize,
  external_sort,
  project_sort_naive,
  project_sort_fused,
  project_hash,
  project_via_index,
  output,
};

std::optional<OpKind> op_from_string(std::string_view name);
std::string_view to_string(OpKind op);

/// A step after validation against the catalog.
struct BoundStep {
  std::size_t index = 0;  // 1-based position in the plan text
  std::string name;
  OpKind op = OpKind::output;
  std::string relation;               // set when the input is a relation
  std::optional<std::size_t> source;  // position in ValidatedPlan::chain of the input step
  Schema output_schema;
  bool streams = false;  // produces a tuple stream rather than a file
  std::vector<std::string> attrs;  // key (sort), attrs (projections), index key
  std::size_t prefix = 0;
  std::optional<std::size_t> buffers;
  std::optional<std::uint64_t> seed;
};

/// Steps in dependency order; the last one is the output step.
struct ValidatedPlan {
  std::vector<BoundStep> chain;
};

/// Throws PlanError naming the step (1-based) and field at fault.
ValidatedPlan validate_plan(const PhysicalPlan& plan, const Catalog& catalog);

}  // namespace qeval
