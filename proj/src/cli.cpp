#include "gnet/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gnet/contagion.hpp"
#include "gnet/error.hpp"
#include "gnet/generator.hpp"
#include "gnet/io.hpp"
#include "gnet/metrics.hpp"

namespace gnet {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Resolved run configuration: JSON file first, command-line flags on top.
struct RunConfig {
  std::optional<fs::path> input_dir;
  std::optional<fs::path> nodes_csv;
  std::optional<fs::path> edges_csv;
  std::optional<std::string> preset;
  std::optional<std::string> generator_json;  // inline generator config or plan
  std::vector<PhaseWindow> windows = canonical_phase_windows();
  MetricsOptions metrics;
  ContagionParams contagion;
  SweepGrid grid;
  std::optional<fs::path> out;
  std::uint64_t seed = 1;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

void apply_config_file(RunConfig& rc, const fs::path& path) {
  json j;
  try {
    j = json::parse(io::read_file(path));
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path.string() + "': " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config '" + path.string() + "' must be a JSON object");
  try {
    if (j.contains("input")) {
      const auto& in = j.at("input");
      if (in.is_string()) {
        rc.input_dir = in.get<std::string>();
      } else {
        rc.nodes_csv = in.at("nodes").get<std::string>();
        rc.edges_csv = in.at("edges").get<std::string>();
      }
    }
    if (j.contains("preset")) rc.preset = j.at("preset").get<std::string>();
    if (j.contains("generator")) rc.generator_json = j.at("generator").dump();
    if (j.contains("out")) rc.out = j.at("out").get<std::string>();
    rc.seed = get_or<std::uint64_t>(j, "seed", rc.seed);
    if (j.contains("windows")) {
      rc.windows.clear();
      for (const auto& w : j.at("windows"))
        rc.windows.push_back({w.at("label").get<std::string>(), YearMonth::parse(w.at("start").get<std::string>()),
                              YearMonth::parse(w.at("end").get<std::string>())});
    }
    if (j.contains("metrics")) {
      const auto& m = j.at("metrics");
      if (m.contains("x_min")) {
        const auto& x = m.at("x_min");
        if (x.is_string() && x.get<std::string>() == "scan")
          rc.metrics.x_min = ScanXmin{};
        else if (x.is_number_unsigned())
          rc.metrics.x_min = FixedXmin{x.get<std::uint64_t>()};
        else
          throw ConfigError("metrics.x_min must be a positive integer or \"scan\"");
      }
      rc.metrics.paths.exact_threshold = get_or(m, "exact_threshold", rc.metrics.paths.exact_threshold);
      rc.metrics.paths.sample_sources = get_or(m, "sample_sources", rc.metrics.paths.sample_sources);
      rc.metrics.hub_percentile = get_or(m, "hub_percentile", rc.metrics.hub_percentile);
    }
    if (j.contains("contagion")) {
      const auto& c = j.at("contagion");
      auto& p = rc.contagion;
      p.k = get_or(c, "k", p.k);
      p.delta = get_or(c, "delta", p.delta);
      const auto delta_mode = get_or<std::string>(c, "delta_mode", "fixed");
      if (delta_mode == "fixed")
        p.delta_mode = DeltaMode::fixed;
      else if (delta_mode == "mean_leverage")
        p.delta_mode = DeltaMode::mean_leverage;
      else
        throw ConfigError("unknown delta_mode '" + delta_mode + "'");
      const auto rule = get_or<std::string>(c, "rule", "contagion_triggered");
      if (rule == "contagion_triggered")
        p.rule = EvaluationRule::contagion_triggered;
      else if (rule == "every_step")
        p.rule = EvaluationRule::every_step;
      else
        throw ConfigError("unknown rule '" + rule + "'");
      p.runs = get_or(c, "runs", p.runs);
      p.importance_runs_per_node = get_or(c, "importance_runs", p.importance_runs_per_node);
      p.threads = get_or(c, "threads", p.threads);
      if (c.contains("scenarios")) {
        rc.grid.scenarios.clear();
        for (const auto& s : c.at("scenarios")) rc.grid.scenarios.push_back(parse_scenario(s.get<std::string>()));
      }
      if (c.contains("seed_fractions")) rc.grid.seed_fractions = c.at("seed_fractions").get<std::vector<double>>();
    }
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path.string() + "': " + e.what());
  } catch (const ValidationError& e) {
    throw ConfigError("config '" + path.string() + "': " + e.what());
  }
}

// Flags shared by the subcommands; empty values mean "not given".
struct Flags {
  std::string config;
  std::string in;
  std::string nodes;
  std::string edges;
  std::string preset;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> runs;
  std::vector<std::string> scenarios;
  std::vector<double> fractions;
  std::optional<unsigned> threads;
  std::string metrics_dir;
  std::string sim_dir;
};

RunConfig resolve(const Flags& f) {
  RunConfig rc;
  if (!f.config.empty()) apply_config_file(rc, f.config);
  if (!f.in.empty()) rc.input_dir = f.in;
  if (!f.nodes.empty()) rc.nodes_csv = f.nodes;
  if (!f.edges.empty()) rc.edges_csv = f.edges;
  if (!f.preset.empty()) {
    rc.preset = f.preset;
    rc.generator_json.reset();
  }
  if (!f.out.empty()) rc.out = f.out;
  if (f.seed) rc.seed = *f.seed;
  if (f.runs) rc.contagion.runs = *f.runs;
  if (f.threads) rc.contagion.threads = *f.threads;
  if (!f.scenarios.empty()) {
    rc.grid.scenarios.clear();
    for (const auto& s : f.scenarios) rc.grid.scenarios.push_back(parse_scenario(s));
  }
  if (!f.fractions.empty()) rc.grid.seed_fractions = f.fractions;
  rc.contagion.seed = rc.seed;
  rc.metrics.paths.seed = rc.seed;
  if (rc.nodes_csv.has_value() != rc.edges_csv.has_value())
    throw UsageError("--nodes and --edges must be given together");
  return rc;
}

bool has_input(const RunConfig& rc) { return rc.input_dir || rc.nodes_csv; }
bool has_generator(const RunConfig& rc) { return rc.preset || rc.generator_json; }

/// Exactly one data source: input files or a generator.
void require_source(const RunConfig& rc) {
  if (has_input(rc) && has_generator(rc))
    throw UsageError("give either input files (--in/--nodes/--edges) or a generator (--preset/config), not both");
  if (!has_input(rc) && !has_generator(rc))
    throw UsageError("no input: pass --in <dir>, --nodes/--edges or --preset <name>");
}

fs::path require_out(const RunConfig& rc) {
  if (!rc.out) throw UsageError("--out <dir> is required");
  std::error_code ec;
  fs::create_directories(*rc.out, ec);
  if (ec || !fs::is_directory(*rc.out))
    throw Error("output directory '" + rc.out->string() + "' is not writable");
  return *rc.out;
}

DynamicPlan generator_plan(const RunConfig& rc) {
  if (rc.preset) return preset_plan(*rc.preset, rc.seed);
  const json j = json::parse(*rc.generator_json);
  DynamicPlan plan;
  if (j.contains("months") || j.contains("anchors")) {
    plan = dynamic_plan_from_json(*rc.generator_json);
  } else {
    plan.months.push_back(generator_config_from_json(*rc.generator_json));
  }
  plan.seed = rc.seed;
  return plan;
}

DynamicNetwork load_source(const RunConfig& rc) {
  require_source(rc);
  if (has_generator(rc)) return generate_dynamic(generator_plan(rc));
  if (rc.input_dir) return io::load_dynamic(*rc.input_dir);
  return io::assemble_dynamic(io::parse_nodes_csv(*rc.nodes_csv), io::parse_edges_csv(*rc.edges_csv));
}

/// Windows that contain at least one month of `dynamic`.
std::vector<PhaseWindow> populated_windows(const RunConfig& rc, const DynamicNetwork& dynamic) {
  std::vector<PhaseWindow> out;
  for (const auto& w : rc.windows)
    if (std::any_of(dynamic.begin(), dynamic.end(), [&](const NetworkSnapshot& g) { return w.contains(g.month()); }))
      out.push_back(w);
  return out;
}

int cmd_ingest(const RunConfig& rc) {
  if (!has_input(rc)) throw UsageError("ingest needs --in <dir> or --nodes/--edges");
  if (has_generator(rc)) throw UsageError("ingest reads files; use generate for presets");
  const auto out = require_out(rc);
  const DynamicNetwork dynamic = load_source(rc);
  io::save_dynamic(dynamic, out);
  std::string index = "month,nodes,edges\n";
  for (const auto& g : dynamic)
    index += g.month().to_string() + "," + std::to_string(g.node_count()) + "," + std::to_string(g.edge_count()) + "\n";
  io::write_file_atomic(out / "snapshots.csv", index);
  std::cout << "ingested " << dynamic.size() << " monthly snapshot(s) into " << out.string() << "\n";
  return kExitOk;
}

int cmd_validate(const RunConfig& rc) {
  if (!has_input(rc)) throw UsageError("validate needs --in <dir> or --nodes/--edges");
  const fs::path nodes = rc.nodes_csv ? *rc.nodes_csv : *rc.input_dir / io::kNodesFile;
  const fs::path edges = rc.edges_csv ? *rc.edges_csv : *rc.input_dir / io::kEdgesFile;
  auto problems = io::validate_files(nodes, edges);
  if (problems.empty()) {
    // Row-level checks passed; snapshot assembly catches the rest.
    try {
      (void)io::assemble_dynamic(io::parse_nodes_csv(nodes), io::parse_edges_csv(edges));
    } catch (const Error& e) {
      problems.push_back(e.what());
    }
  }
  for (const auto& p : problems) std::cout << p << "\n";
  if (!problems.empty()) {
    std::cout << problems.size() << " problem(s)\n";
    return kExitInvalid;
  }
  std::cout << "ok\n";
  return kExitOk;
}

int cmd_metrics(const RunConfig& rc) {
  const auto out = require_out(rc);
  const DynamicNetwork dynamic = load_source(rc);
  const MetricsTimeseries ts = metrics_timeseries(dynamic, populated_windows(rc, dynamic), rc.metrics);
  for (const auto& e : ts.errors) std::cerr << "warning: " << e.month.to_string() << ": " << e.message << "\n";
  io::write_file_atomic(out / io::kMetricsFile, io::metrics_csv(ts));
  io::write_file_atomic(out / io::kPhaseSummaryFile, io::phase_summary_csv(ts));
  std::cout << "metrics for " << ts.reports.size() << " month(s) written to " << out.string() << "\n";
  return ts.reports.empty() ? kExitInvalid : kExitOk;
}

int cmd_generate(const RunConfig& rc) {
  if (has_input(rc)) throw UsageError("generate takes --preset or --config, not input files");
  if (!has_generator(rc)) throw UsageError("generate needs --preset <name> or a config with a generator");
  const auto out = require_out(rc);
  const DynamicNetwork dynamic = load_source(rc);
  io::save_dynamic(dynamic, out);
  std::cout << "generated " << dynamic.size() << " monthly snapshot(s) into " << out.string() << "\n";
  return kExitOk;
}

int cmd_simulate(const RunConfig& rc) {
  require_source(rc);
  const auto out = require_out(rc);
  validate(rc.contagion);
  const DynamicNetwork dynamic = load_source(rc);
  const auto rows = scenario_sweep(dynamic, rc.grid, rc.contagion);
  std::size_t failed = 0;
  for (const auto& r : rows)
    if (!r.summary) {
      ++failed;
      std::cerr << "warning: " << r.month.to_string() << " " << to_string(r.scenario) << " p=" << r.seed_fraction
                << ": " << r.error << "\n";
    }
  io::write_file_atomic(out / io::kSimSummaryFile, io::sim_summary_csv(rows));
  io::write_file_atomic(out / io::kSimSummaryJson, io::sim_summary_json(rows));
  std::cout << rows.size() - failed << " of " << rows.size() << " simulation cell(s) written to " << out.string()
            << "\n";
  return failed == rows.size() ? kExitInvalid : kExitOk;
}

// Plain CSV split (the outputs merged here contain no quoted fields).
std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(io::read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
      const auto comma = line.find(',', start);
      fields.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    rows.push_back(std::move(fields));
  }
  if (rows.empty()) throw FormatError("'" + path.string() + "' has no header row", 0);
  return rows;
}

std::size_t column(const std::vector<std::string>& header, const std::string& name, const fs::path& path) {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw FormatError("'" + path.string() + "' lacks column '" + name + "'", 1);
  return static_cast<std::size_t>(it - header.begin());
}

int cmd_report(const Flags& f, const RunConfig& rc) {
  if (f.metrics_dir.empty() || f.sim_dir.empty()) throw UsageError("report needs --metrics <dir> and --sim <dir>");
  const auto out = require_out(rc);
  const fs::path metrics_dir = f.metrics_dir, sim_dir = f.sim_dir;

  for (auto [dir, name] : {std::pair{metrics_dir, io::kMetricsFile}, std::pair{metrics_dir, io::kPhaseSummaryFile},
                           std::pair{sim_dir, io::kSimSummaryFile}})
    io::write_file_atomic(out / name, io::read_file(dir / name));

  // Wide table: one row per month, metric columns then one failure-ratio
  // column per (scenario, p).
  const fs::path metrics_path = metrics_dir / io::kMetricsFile, sim_path = sim_dir / io::kSimSummaryFile;
  const auto metrics = read_csv(metrics_path);
  const auto sim = read_csv(sim_path);
  const auto& sh = sim.front();
  const std::size_t c_month = column(sh, "month", sim_path), c_scen = column(sh, "scenario", sim_path),
                    c_p = column(sh, "p", sim_path), c_mean = column(sh, "mean_final_ratio", sim_path);
  std::vector<std::string> sim_columns;
  std::map<std::pair<std::string, std::string>, std::string> cell;  // (month, column) -> value
  for (std::size_t r = 1; r < sim.size(); ++r) {
    const auto& row = sim[r];
    if (row.size() < sh.size()) throw FormatError("short row in '" + sim_path.string() + "'", r + 1);
    const std::string name = "failure_" + row[c_scen] + "_p" + row[c_p];
    if (std::find(sim_columns.begin(), sim_columns.end(), name) == sim_columns.end()) sim_columns.push_back(name);
    cell[{row[c_month], name}] = row[c_mean];
  }
  const std::size_t m_month = column(metrics.front(), "month", metrics_path);
  std::string merged;
  for (std::size_t r = 0; r < metrics.size(); ++r) {
    const auto& row = metrics[r];
    for (std::size_t i = 0; i < row.size(); ++i) merged += (i ? "," : "") + row[i];
    for (const auto& name : sim_columns) {
      merged += ',';
      if (r == 0) {
        merged += name;
      } else if (auto it = cell.find({row[m_month], name}); it != cell.end()) {
        merged += it->second;
      }
    }
    merged += '\n';
  }
  io::write_file_atomic(out / "monthly_overview.csv", merged);
  std::cout << "report written to " << out.string() << "\n";
  return kExitOk;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Guarantee network analysis: ingest, metrics, generation and default-contagion simulation", "gnet"};
  app.require_subcommand(1);
  Flags f;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", f.config, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--out", f.out, "Output directory");
    sub->add_option("--seed", f.seed, "Master random seed");
  };
  auto input = [&](CLI::App* sub) {
    sub->add_option("--in", f.in, "Directory holding nodes.csv and edges.csv")->check(CLI::ExistingDirectory);
    sub->add_option("--nodes", f.nodes, "Node CSV")->check(CLI::ExistingFile);
    sub->add_option("--edges", f.edges, "Edge CSV")->check(CLI::ExistingFile);
  };
  auto preset = [&](CLI::App* sub) {
    sub->add_option("--preset", f.preset, "Generator preset")->check(CLI::IsMember(preset_names()));
  };

  auto* ingest = app.add_subcommand("ingest", "Validate CSV input and write a canonical snapshot store");
  common(ingest);
  input(ingest);
  auto* validate_cmd = app.add_subcommand("validate", "Report every invariant violation in CSV input");
  validate_cmd->add_option("--config", f.config, "JSON run configuration")->check(CLI::ExistingFile);
  input(validate_cmd);
  auto* metrics = app.add_subcommand("metrics", "Per-month metrics and per-phase summary");
  common(metrics);
  input(metrics);
  preset(metrics);
  auto* generate = app.add_subcommand("generate", "Generate synthetic guarantee networks");
  common(generate);
  preset(generate);
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo default-contagion sweep");
  common(simulate);
  input(simulate);
  preset(simulate);
  simulate->add_option("--runs", f.runs, "Cascades per cell")->check(CLI::PositiveNumber);
  simulate->add_option("--scenario", f.scenarios, "Seed scenario (repeatable)")
      ->check(CLI::IsMember({"random", "top_in_degree", "top_loan", "top_importance"}));
  simulate->add_option("--p", f.fractions, "Seed fraction (repeatable)");
  simulate->add_option("--threads", f.threads, "Worker threads (0: all cores)");
  auto* report = app.add_subcommand("report", "Merge metrics and simulation outputs into plot-ready CSVs");
  report->add_option("--metrics", f.metrics_dir, "Directory written by 'metrics'")->check(CLI::ExistingDirectory);
  report->add_option("--sim", f.sim_dir, "Directory written by 'simulate'")->check(CLI::ExistingDirectory);
  report->add_option("--out", f.out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    const RunConfig rc = resolve(f);
    if (ingest->parsed()) return cmd_ingest(rc);
    if (validate_cmd->parsed()) return cmd_validate(rc);
    if (metrics->parsed()) return cmd_metrics(rc);
    if (generate->parsed()) return cmd_generate(rc);
    if (simulate->parsed()) return cmd_simulate(rc);
    return cmd_report(f, rc);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
}

}  // namespace gnet
