#include "qeval/plan.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "qeval/error.hpp"
#include "qeval/index.hpp"

namespace qeval {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool is_identifier(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

bool is_value(std::string_view s) {
  return !s.empty() && std::none_of(s.begin(), s.end(), [](char c) {
    return c == ',' || c == ')' || c == '(' || c == '#' || std::isspace(static_cast<unsigned char>(c));
  });
}

void add_arg(PlanStep& step, std::size_t index, std::string key, std::string value) {
  if (!is_identifier(key)) throw PlanError(index, key, fmt::format("bad argument name '{}'", key));
  if (!is_value(value)) throw PlanError(index, key, fmt::format("bad value '{}' for argument '{}'", value, key));
  if (step.arg(key) != nullptr) throw PlanError(index, key, fmt::format("argument '{}' given twice", key));
  step.args.emplace_back(std::move(key), std::move(value));
}

struct OpSignature {
  OpKind op;
  std::vector<std::string_view> required;
  std::vector<std::string_view> optional;
};

const OpSignature& signature(OpKind op) {
  static const std::map<OpKind, OpSignature> table = {
      {OpKind::seq_scan, {OpKind::seq_scan, {}, {}}},
      {OpKind::materialize, {OpKind::materialize, {}, {}}},
      {OpKind::external_sort, {OpKind::external_sort, {"key"}, {"buffers"}}},
      {OpKind::project_sort_naive, {OpKind::project_sort_naive, {"attrs"}, {"buffers"}}},
      {OpKind::project_sort_fused, {OpKind::project_sort_fused, {"attrs"}, {"buffers"}}},
      {OpKind::project_hash, {OpKind::project_hash, {"attrs"}, {"buffers", "seed"}}},
      {OpKind::project_via_index, {OpKind::project_via_index, {"index"}, {"prefix"}}},
      {OpKind::output, {OpKind::output, {}, {}}},
  };
  return table.at(op);
}

std::vector<std::string> split_attrs(const std::string& value, std::size_t index, const std::string& field) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto bar = value.find('|', start);
    auto item = value.substr(start, bar == std::string::npos ? std::string::npos : bar - start);
    if (!is_identifier(item)) throw PlanError(index, field, fmt::format("bad attribute list '{}'", value));
    out.push_back(item);
    if (bar == std::string::npos) break;
    start = bar + 1;
  }
  return out;
}

std::uint64_t parse_uint(const std::string& value, std::size_t index, const std::string& field) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || ptr != value.data() + value.size())
    throw PlanError(index, field, fmt::format("'{}' is not a non-negative integer", value));
  return v;
}

}  // namespace

const std::string* PlanStep::arg(std::string_view key) const {
  for (const auto& [k, v] : args)
    if (k == key) return &v;
  return nullptr;
}

std::optional<OpKind> op_from_string(std::string_view name) {
  for (auto op : {OpKind::seq_scan, OpKind::materialize, OpKind::external_sort, OpKind::project_sort_naive,
                  OpKind::project_sort_fused, OpKind::project_hash, OpKind::project_via_index, OpKind::output})
    if (to_string(op) == name) return op;
  return std::nullopt;
}

std::string_view to_string(OpKind op) {
  switch (op) {
    case OpKind::seq_scan: return "seq_scan";
    case OpKind::materialize: return "materialize";
    case OpKind::external_sort: return "external_sort";
    case OpKind::project_sort_naive: return "project_sort_naive";
    case OpKind::project_sort_fused: return "project_sort_fused";
    case OpKind::project_hash: return "project_hash";
    case OpKind::project_via_index: return "project_via_index";
    case OpKind::output: return "output";
  }
  return "unknown";
}

PhysicalPlan parse_plan(std::string_view text) {
  static const std::regex step_re(
      R"(^([A-Za-z_][A-Za-z0-9_]*)\s*=\s*([A-Za-z_][A-Za-z0-9_]*)\s*\(([^()]*)\)\s*(<-\s*([A-Za-z_][A-Za-z0-9_]*))?$)");
  PhysicalPlan plan;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t index = plan.steps.size() + 1;
    std::string s(line);
    std::smatch m;
    if (!std::regex_match(s, m, step_re))
      throw PlanError(index, "", fmt::format("cannot parse '{}' (expected name = op(arg:value, ...) <- input)", s));
    PlanStep step;
    step.name = m[1];
    step.op = m[2];
    step.input = m[5];
    std::string_view args = trim(std::string_view(s).substr(m.position(3), m.length(3)));
    while (!args.empty()) {
      auto comma = args.find(',');
      auto item = trim(args.substr(0, comma));
      auto colon = item.find(':');
      if (colon == std::string_view::npos)
        throw PlanError(index, "", fmt::format("argument '{}' is not key:value", item));
      add_arg(step, index, std::string(trim(item.substr(0, colon))), std::string(trim(item.substr(colon + 1))));
      if (comma == std::string_view::npos) break;
      args.remove_prefix(comma + 1);
      if (trim(args).empty()) throw PlanError(index, "", "trailing comma in argument list");
    }
    plan.steps.push_back(std::move(step));
  }
  return plan;
}

PhysicalPlan parse_plan_json(std::string_view text) {
  PhysicalPlan plan;
  nlohmann::ordered_json root;
  try {
    root = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::exception& ex) {
    throw PlanError(0, "", fmt::format("malformed plan JSON: {}", ex.what()));
  }
  if (!root.is_object() || !root.contains("steps") || !root["steps"].is_array())
    throw PlanError(0, "", "plan JSON needs a \"steps\" array");
  for (const auto& js : root["steps"]) {
    const std::size_t index = plan.steps.size() + 1;
    if (!js.is_object() || !js.contains("name") || !js.contains("op") || !js["name"].is_string() ||
        !js["op"].is_string())
      throw PlanError(index, "", "step needs string \"name\" and \"op\"");
    PlanStep step;
    step.name = js["name"].get<std::string>();
    step.op = js["op"].get<std::string>();
    if (!is_identifier(step.name)) throw PlanError(index, "name", fmt::format("bad step name '{}'", step.name));
    if (js.contains("input")) {
      if (!js["input"].is_string()) throw PlanError(index, "input", "input must be a string");
      step.input = js["input"].get<std::string>();
    }
    if (js.contains("args")) {
      if (!js["args"].is_object()) throw PlanError(index, "args", "args must be an object");
      for (const auto& [key, value] : js["args"].items()) {
        std::string v;
        if (value.is_string()) v = value.get<std::string>();
        else if (value.is_number_unsigned()) v = std::to_string(value.get<std::uint64_t>());
        else if (value.is_array()) {
          for (const auto& a : value) {
            if (!a.is_string()) throw PlanError(index, key, "attribute lists hold strings");
            if (!v.empty()) v += '|';
            v += a.get<std::string>();
          }
        } else {
          throw PlanError(index, key, fmt::format("unsupported value {}", value.dump()));
        }
        add_arg(step, index, key, v);
      }
    }
    plan.steps.push_back(std::move(step));
  }
  return plan;
}

std::string print_plan(const PhysicalPlan& plan) {
  std::string out;
  for (const auto& step : plan.steps) {
    out += fmt::format("{} = {}(", step.name, step.op);
    for (std::size_t i = 0; i < step.args.size(); ++i)
      out += fmt::format("{}{}:{}", i == 0 ? "" : ", ", step.args[i].first, step.args[i].second);
    out += ')';
    if (!step.input.empty()) out += fmt::format(" <- {}", step.input);
    out += '\n';
  }
  return out;
}

std::string plan_to_json(const PhysicalPlan& plan) {
  nlohmann::ordered_json root;
  root["steps"] = nlohmann::ordered_json::array();
  for (const auto& step : plan.steps) {
    nlohmann::ordered_json js;
    js["name"] = step.name;
    js["op"] = step.op;
    js["args"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : step.args) js["args"][k] = v;
    if (!step.input.empty()) js["input"] = step.input;
    root["steps"].push_back(std::move(js));
  }
  return root.dump(2) + "\n";
}

ValidatedPlan validate_plan(const PhysicalPlan& plan, const Catalog& catalog) {
  const auto& steps = plan.steps;
  if (steps.empty()) throw PlanError(0, "", "plan has no steps");

  std::map<std::string, std::size_t> by_name;
  std::vector<OpKind> ops;
  std::optional<std::size_t> output;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto& step = steps[i];
    const std::size_t index = i + 1;
    if (!by_name.emplace(step.name, i).second)
      throw PlanError(index, "name", fmt::format("step name '{}' used twice", step.name));
    if (catalog.find(step.name) != nullptr)
      throw PlanError(index, "name", fmt::format("step name '{}' shadows a relation", step.name));
    auto op = op_from_string(step.op);
    if (!op) throw PlanError(index, "op", fmt::format("unknown operation '{}' in step '{}'", step.op, step.name));
    ops.push_back(*op);
    const auto& sig = signature(*op);
    for (const auto& [key, value] : step.args) {
      bool known = std::find(sig.required.begin(), sig.required.end(), key) != sig.required.end() ||
                   std::find(sig.optional.begin(), sig.optional.end(), key) != sig.optional.end();
      if (!known) throw PlanError(index, key, fmt::format("{} does not take argument '{}'", step.op, key));
    }
    for (auto key : sig.required)
      if (step.arg(key) == nullptr)
        throw PlanError(index, std::string(key), fmt::format("{} requires argument '{}'", step.op, key));
    if (step.input.empty())
      throw PlanError(index, "input", fmt::format("step '{}' has no input (add '<- name')", step.name));
    if (*op == OpKind::output) {
      if (output) throw PlanError(index, "op", "plan has more than one output step");
      output = i;
    }
  }
  if (!output) throw PlanError(0, "", "plan has no output step");

  // Inputs: another step or a relation.
  std::vector<std::optional<std::size_t>> input_step(steps.size());
  std::vector<std::size_t> consumers(steps.size(), 0);
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto& in = steps[i].input;
    if (auto it = by_name.find(in); it != by_name.end()) {
      input_step[i] = it->second;
      ++consumers[it->second];
    } else if (catalog.find(in) == nullptr) {
      throw PlanError(i + 1, "input", fmt::format("unknown relation or step '{}'", in));
    }
  }
  for (std::size_t i = 0; i < steps.size(); ++i) {
    std::set<std::size_t> seen{i};
    for (auto cur = input_step[i]; cur; cur = input_step[*cur]) {
      if (!seen.insert(*cur).second)
        throw PlanError(i + 1, "input", fmt::format("cycle through step '{}'", steps[*cur].name));
    }
  }
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (i == *output) {
      if (consumers[i] != 0) throw PlanError(i + 1, "input", "output step cannot feed another step");
    } else if (consumers[i] == 0) {
      throw PlanError(i + 1, "", fmt::format("step '{}' does not lead to the output", steps[i].name));
    } else if (consumers[i] > 1) {
      throw PlanError(i + 1, "", fmt::format("step '{}' feeds more than one step", steps[i].name));
    }
  }

  std::vector<std::size_t> order;
  for (std::optional<std::size_t> cur = *output; cur; cur = input_step[*cur]) order.push_back(*cur);
  std::reverse(order.begin(), order.end());

  ValidatedPlan result;
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const std::size_t i = order[pos];
    const auto& step = steps[i];
    const std::size_t index = i + 1;
    BoundStep bound;
    bound.index = index;
    bound.name = step.name;
    bound.op = ops[i];

    Schema input_schema;
    bool input_streams = false;
    if (input_step[i]) {
      bound.source = pos - 1;
      input_schema = result.chain.back().output_schema;
      input_streams = result.chain.back().streams;
    } else {
      bound.relation = step.input;
      input_schema = catalog.at(step.input).schema;
    }

    auto need_file = [&] {
      if (input_streams)
        throw PlanError(index, "input",
                        fmt::format("{} needs a file input; insert materialize after '{}'", step.op, step.input));
    };

    if (const auto* b = step.arg("buffers")) {
      auto m = parse_uint(*b, index, "buffers");
      if (m < 3) throw PlanError(index, "buffers", fmt::format("buffers must be >= 3, got {}", m));
      bound.buffers = m;
    }
    if (const auto* s = step.arg("seed")) bound.seed = parse_uint(*s, index, "seed");

    try {
      switch (bound.op) {
        case OpKind::seq_scan:
          need_file();
          bound.output_schema = input_schema;
          bound.streams = true;
          break;
        case OpKind::materialize:
          if (!input_streams)
            throw PlanError(index, "input", "materialize needs a stream input (for example a seq_scan step)");
          bound.output_schema = input_schema;
          break;
        case OpKind::external_sort:
          need_file();
          bound.attrs = split_attrs(*step.arg("key"), index, "key");
          (void)input_schema.indices_of(bound.attrs);
          bound.output_schema = input_schema;
          break;
        case OpKind::project_sort_naive:
        case OpKind::project_sort_fused:
        case OpKind::project_hash: {
          need_file();
          bound.attrs = split_attrs(*step.arg("attrs"), index, "attrs");
          std::set<std::string> unique(bound.attrs.begin(), bound.attrs.end());
          if (unique.size() != bound.attrs.size()) throw PlanError(index, "attrs", "attribute repeated in projection");
          bound.output_schema = input_schema.project(input_schema.indices_of(bound.attrs));
          break;
        }
        case OpKind::project_via_index: {
          if (input_step[i]) throw PlanError(index, "input", "project_via_index reads a relation's index directly");
          bound.attrs = split_attrs(*step.arg("index"), index, "index");
          const auto& entry = catalog.at(step.input);
          if (entry.find_index(bound.attrs) == nullptr)
            throw PlanError(index, "index", fmt::format("relation '{}' has no index on ({})", step.input,
                                                        fmt::join(bound.attrs, ",")));
          bound.prefix = bound.attrs.size();
          if (const auto* p = step.arg("prefix")) bound.prefix = parse_uint(*p, index, "prefix");
          if (bound.prefix == 0 || bound.prefix > bound.attrs.size())
            throw PlanError(index, "prefix", fmt::format("prefix must be in 1..{}", bound.attrs.size()));
          std::vector<std::string> kept(bound.attrs.begin(), bound.attrs.begin() + bound.prefix);
          bound.output_schema = input_schema.project(input_schema.indices_of(kept));
          break;
        }
        case OpKind::output:
          bound.output_schema = input_schema;
          bound.streams = input_streams;
          break;
      }
    } catch (const PlanError&) {
      throw;
    } catch (const Error& e) {
      std::string field = bound.op == OpKind::external_sort ? "key"
                          : bound.op == OpKind::project_via_index ? "index"
                                                                  : "attrs";
      throw PlanError(index, field, e.what());
    }
    result.chain.push_back(std::move(bound));
  }
  return result;
}

}  // namespace qeval
