// qeval: create a database, load CSV files, build indexes and run physical plans.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "qeval/catalog.hpp"
#include "qeval/engine.hpp"
#include "qeval/error.hpp"
#include "qeval/plan.hpp"

namespace {

using namespace qeval;

enum ExitCode : int { kOk = 0, kUsage = 1, kPlan = 2, kRuntime = 3, kPathological = 4 };

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::plan_validation: return kPlan;
    case ErrorKind::pathological_data: return kPathological;
    case ErrorKind::usage:
    case ErrorKind::input:
    case ErrorKind::schema:
    case ErrorKind::encoding:
      return kUsage;
    default:
      return kRuntime;
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorKind::usage, fmt::format("cannot open '{}'", path));
  std::stringstream text;
  text << in.rdbuf();
  return text.str();
}

struct Geometry {
  std::optional<std::size_t> page_size;
  std::optional<std::size_t> extent;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--page-size", page_size, "Page size in bytes (power of two, >= 512); fixed at creation");
    cmd->add_option("--extent", extent, "Pages per extent (>= 1); fixed at creation");
  }

  StorageGeometry resolve() const {
    StorageGeometry g;
    if (page_size) g.page_size = *page_size;
    if (extent) g.extent_length = *extent;
    if (g.page_size < 512 || (g.page_size & (g.page_size - 1)) != 0)
      raise(ErrorKind::usage, fmt::format("--page-size must be a power of two >= 512, got {}", g.page_size));
    if (g.extent_length < 1) raise(ErrorKind::usage, "--extent must be >= 1");
    return g;
  }

  // An existing database keeps its geometry; flags must agree with it.
  void check(const Database& db) const {
    if (page_size && *page_size != db.geometry().page_size)
      raise(ErrorKind::usage, fmt::format("database page size is {}, not {}", db.geometry().page_size, *page_size));
    if (extent && *extent != db.geometry().extent_length)
      raise(ErrorKind::usage, fmt::format("database extent length is {}, not {}", db.geometry().extent_length, *extent));
  }
};

Database open_or_create(const std::string& dir, const Geometry& geometry) {
  if (Database::exists(dir)) {
    auto db = Database::open(dir);
    geometry.check(db);
    return db;
  }
  return Database::create(dir, geometry.resolve());
}

PoolConfig pool_for(const Database& db, std::size_t buffers) {
  PoolConfig config;
  config.capacity = buffers;
  config.page_size = db.geometry().page_size;
  config.readahead_window = db.geometry().extent_length - 1;
  return config;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(item);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Paged storage and query evaluation engine"};
  app.require_subcommand(1);

  std::string db_dir;
  Geometry geometry;
  std::size_t buffers = 16;

  auto* init = app.add_subcommand("init", "Create an empty database");
  init->add_option("--db", db_dir, "Database directory")->required();
  geometry.add_to(init);

  std::string relation, csv_path, schema_text;
  auto* ingest = app.add_subcommand("ingest", "Load a CSV file into a new relation");
  ingest->add_option("--db", db_dir, "Database directory (created if missing)")->required();
  ingest->add_option("--relation", relation, "Relation name")->required();
  ingest->add_option("--csv", csv_path, "CSV file with a header row; '-' reads standard input")->required();
  ingest->add_option("--schema", schema_text, "Attributes, e.g. id:int,name:str32")->required();
  geometry.add_to(ingest);

  std::string attrs;
  auto* index = app.add_subcommand("index", "Build a dense index on a relation");
  index->add_option("--db", db_dir, "Database directory")->required();
  index->add_option("--relation", relation, "Relation name")->required();
  index->add_option("--attrs", attrs, "Key attributes, comma separated")->required();
  index->add_option("--buffers", buffers, "Buffer frames M for the sort")->check(CLI::Range(3, 1 << 20));

  std::string plan_path, plan_json_path;
  std::optional<std::size_t> readahead;
  std::uint64_t seed = 0;
  bool stats_json = false;
  auto* run = app.add_subcommand("run", "Execute a physical plan; rows go to stdout, stats to stderr");
  run->add_option("--db", db_dir, "Database directory")->required();
  auto* plan_opt = run->add_option("--plan", plan_path, "Plan file (line format)");
  auto* json_opt = run->add_option("--plan-json", plan_json_path, "Plan file (JSON)");
  plan_opt->excludes(json_opt);
  run->add_option("--buffers", buffers, "Buffer frames M")->check(CLI::Range(3, 1 << 20));
  run->add_option("--readahead", readahead, "Read-ahead window in pages (default extent - 1)");
  run->add_option("--seed", seed, "Hash seed for project_hash steps without one");
  run->add_flag("--stats-json", stats_json, "Print stats as JSON");
  geometry.add_to(run);

  auto* catalog = app.add_subcommand("catalog", "Print the catalog");
  catalog->add_option("--db", db_dir, "Database directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (init->parsed()) {
      Database::create(db_dir, geometry.resolve());
      std::cout << fmt::format("created {}\n", db_dir);
    } else if (ingest->parsed()) {
      auto schema = Schema::parse(schema_text);
      auto db = open_or_create(db_dir, geometry);
      BufferPool pool(pool_for(db, buffers));
      IngestReport report;
      if (csv_path == "-") {
        report = db.ingest_csv(pool, relation, std::cin, schema);
      } else {
        std::ifstream in(csv_path, std::ios::binary);
        if (!in) raise(ErrorKind::usage, fmt::format("cannot open '{}'", csv_path));
        report = db.ingest_csv(pool, relation, in, schema);
      }
      std::cout << fmt::format("relation={}\npages={}\ntuples={}\n", report.relation, report.page_count,
                               report.tuple_count);
    } else if (index->parsed()) {
      auto db = Database::open(db_dir);
      BufferPool pool(pool_for(db, buffers));
      auto report = db.build_index(pool, relation, split_list(attrs), buffers);
      std::cout << fmt::format("relation={}\nkey={}\nfile={}\nentries={}\npages={}\n", report.relation,
                               fmt::join(report.key_attrs, ","), report.file, report.entry_count, report.page_count);
    } else if (run->parsed()) {
      if (plan_path.empty() && plan_json_path.empty()) raise(ErrorKind::usage, "run needs --plan or --plan-json");
      auto db = Database::open(db_dir);
      geometry.check(db);
      auto plan = plan_path.empty() ? parse_plan_json(read_file(plan_json_path)) : parse_plan(read_file(plan_path));
      auto validated = validate_plan(plan, db.catalog());
      ExecConfig config;
      config.buffers = buffers;
      config.readahead = readahead;
      config.seed = seed;
      CsvSink sink(std::cout);
      auto report = execute(validated, db, config, sink);
      std::cerr << (stats_json ? report.to_json() : report.to_key_values());
    } else if (catalog->parsed()) {
      std::cout << Database::open(db_dir).catalog().to_json() << "\n";
    }
  } catch (const Error& e) {
    std::cout.flush();
    std::cerr << fmt::format("error [{}]: {}\n", to_string(e.kind()), e.what());
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << fmt::format("error: {}\n", e.what());
    return kRuntime;
  }
  return kOk;
}
