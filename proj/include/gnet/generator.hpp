#pragma once

// Synthetic guarantee networks calibrated to per-phase summary statistics.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gnet/graph.hpp"

namespace gnet {

struct LogNormal {
  double mu = 0.0;     // location of ln X
  double sigma = 1.0;  // scale of ln X

  /// Moment-matched location for a target arithmetic mean.
  static LogNormal from_mean(double mean, double sigma);
  double mean() const;
};

struct GeneratorConfig {
  std::string label;
  YearMonth month{2007, 1};
  std::size_t nodes = 1000;
  double average_degree = 0.96;
  double lambda_in = 3.2;
  double lambda_out = 2.5;
  /// Share of nodes placed in isolated mutual-guarantee couples.
  double couple_share = 0.14;
  LogNormal asset = LogNormal::from_mean(2.0e5, 1.0);
  LogNormal loan = LogNormal::from_mean(4.0e4, 1.0);
  LogNormal credit_line = LogNormal::from_mean(7.0e4, 1.0);
  /// Log-scale spread of per-node liability / asset before it is rescaled to
  /// hit target_debt_to_asset on average.
  double leverage_sigma = 0.3;
  double target_debt_to_asset = 0.6;
  double listed_probability = 0.045;
  /// Probability that a nonzero in-degree target is placed on a node that
  /// also has out-degree; absent: in- and out-degrees placed independently.
  std::optional<double> dual_role_share;
  /// Share of the top 1% in-degree targets placed on the top 1% out-degree
  /// nodes.
  double hub_coupling = 0.0;
  /// Share of arcs wired by pairing the largest guarantors with the debtors
  /// of lowest in-degree; the remaining arcs are matched uniformly.
  double sorted_matching = 0.0;
  std::uint64_t seed = 1;
};

/// Throws ConfigError when an invariant does not hold.
void validate(const GeneratorConfig& config);

/// Couples, power-law in/out degree targets, configuration-model wiring, then
/// financial attributes; edge amounts split each debtor's loan equally among
/// its guarantors. Node ids are "n" followed by a zero-padded index.
/// Throws GenerationError when no feasible degree sequence is found in 100 draws.
NetworkSnapshot generate_snapshot(const GeneratorConfig& config);

/// As above with caller-supplied node ids (one per node, any order).
NetworkSnapshot generate_snapshot(const GeneratorConfig& config, std::vector<std::string> ids);

struct DynamicPlan {
  std::vector<GeneratorConfig> months;  // strictly increasing months
  /// Share of the previous month's ids carried into the next month.
  double survival_fraction = 0.9;
  std::uint64_t seed = 1;
};

/// One snapshot per planned month; month i draws from stream (seed, i).
/// Generation failures are rethrown with the month label attached.
DynamicNetwork generate_dynamic(const DynamicPlan& plan);

/// Names of the shipped presets: phase1..phase4 (single snapshots) and
/// canonical63 (63-month dynamic).
std::vector<std::string> preset_names();
bool is_dynamic_preset(std::string_view name);
/// Throws ConfigError for an unknown name.
GeneratorConfig preset_config(std::string_view name, std::uint64_t seed = 1);
DynamicPlan preset_plan(std::string_view name, std::uint64_t seed = 1);

/// Parse a generator config from JSON text (same schema as the preset files).
GeneratorConfig generator_config_from_json(std::string_view json_text);
/// Parse a dynamic plan ({"survival_fraction":..,"months":[config,..]} or the
/// anchored form used by canonical63).
DynamicPlan dynamic_plan_from_json(std::string_view json_text);

}  // namespace gnet
