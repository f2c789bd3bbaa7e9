#pragma once

// Default cascades on a guarantee network.
//
// An enterprise's default probability is the logistic (Fermi) function of its
// effective leverage,
//
//   P_i = 1 / (1 + exp(-k ((L_i + S_i) / A_i - delta)))
//
// where S_i is the total amount it guarantees to debtors that have already
// defaulted. Failure travels against the arc direction: from a defaulted
// debtor to its guarantors.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gnet/graph.hpp"
#include "gnet/rng.hpp"

namespace gnet {

enum class SeedScenario { random, top_in_degree, top_loan, top_importance };

std::string_view to_string(SeedScenario s);
/// Throws ConfigError for unknown names.
SeedScenario parse_scenario(std::string_view name);
std::vector<SeedScenario> all_scenarios();

/// Which enterprises roll for default at each step.
enum class EvaluationRule {
  /// Only guarantors of a debtor that defaulted in the previous step.
  contagion_triggered,
  /// Every surviving enterprise, every step.
  every_step,
};

enum class DeltaMode {
  fixed,          // use ContagionParams::delta
  mean_leverage,  // delta = mean L_i / A_i of the snapshot
};

struct ContagionParams {
  double k = 1.0;
  double delta = 0.5;
  DeltaMode delta_mode = DeltaMode::fixed;
  double seed_fraction = 0.05;
  SeedScenario scenario = SeedScenario::random;
  std::size_t runs = 10000;
  std::uint64_t seed = 1;
  std::size_t importance_runs_per_node = 50;
  EvaluationRule rule = EvaluationRule::contagion_triggered;
  unsigned threads = 0;  // 0: one per hardware thread
};

/// Throws ConfigError unless k > 0, seed fraction in (0, 1) and runs >= 1.
void validate(const ContagionParams& params);

/// delta after applying params.delta_mode.
double effective_delta(const NetworkSnapshot& g, const ContagionParams& params);

/// Logistic default probability. Throws DomainError when asset <= 0 or the
/// defaulted guaranteed amount is negative.
double default_probability(const Enterprise& e, double defaulted_guaranteed_amount, double k, double delta);

struct ContagionResult {
  std::vector<NodeIndex> seeds;  // ascending
  /// new_defaults[t] = enterprises that defaulted at step t (step 0: seeds).
  std::vector<std::size_t> new_defaults;
  std::size_t initially_defaulted = 0;  // already in default before step 0
  std::size_t final_defaulted = 0;
  double final_ratio = 0.0;  // final_defaulted / N
  /// First step without new defaults.
  std::size_t steps = 0;
  std::vector<NodeIndex> defaulted;  // ascending

  friend bool operator==(const ContagionResult&, const ContagionResult&) = default;
};

/// ceil(p N) with a small tolerance so that e.g. 0.05 * 100 gives 5.
std::size_t seed_count(std::size_t nodes, double fraction);

/// random: uniform sample without replacement; top_*: highest in-degree, loan
/// or importance, ties broken by id order. Returns ascending indices.
/// Throws ConfigError when top_importance is requested without scores or the
/// scores do not cover every node.
std::vector<NodeIndex> select_seeds(const NetworkSnapshot& g, SeedScenario scenario, double fraction,
                                    std::uint64_t rng_seed,
                                    std::optional<std::span<const double>> importance = std::nullopt);

/// Reusable cascade workspace bound to one snapshot; not thread-safe, use one
/// per thread. Per-run cost is proportional to the cascade, not to N.
class CascadeEngine {
 public:
  CascadeEngine(const NetworkSnapshot& g, double k, double delta,
                EvaluationRule rule = EvaluationRule::contagion_triggered);

  /// Each evaluation draws a fresh uniform from `rng`, in ascending node order.
  ContagionResult run(std::span<const NodeIndex> seeds, Rng& rng);
  /// Node i defaults on evaluation iff uniforms[i] < P_i. Sharing `uniforms`
  /// across runs couples them.
  ContagionResult run_coupled(std::span<const NodeIndex> seeds, std::span<const double> uniforms);
  /// Final defaulted count only.
  std::size_t run_size(std::span<const NodeIndex> seeds, Rng& rng);

  const NetworkSnapshot& snapshot() const { return *g_; }

 private:
  template <class Draw>
  void cascade(std::span<const NodeIndex> seeds, Draw&& draw);
  ContagionResult collect(std::span<const NodeIndex> seeds) const;
  bool defaulted(NodeIndex v) const { return pre_defaulted_[v] || default_stamp_[v] == epoch_; }
  double exposure(NodeIndex v) const { return exposure_stamp_[v] == epoch_ ? exposure_[v] : base_exposure_[v]; }
  double probability(NodeIndex v) const;
  void next_epoch();

  const NetworkSnapshot* g_;
  double k_;
  double delta_;
  EvaluationRule rule_;
  std::vector<std::uint8_t> pre_defaulted_;
  std::vector<NodeIndex> pre_defaulted_list_;
  std::vector<double> base_exposure_;  // exposure to debtors in default before step 0

  std::uint32_t epoch_ = 0;
  std::vector<std::uint32_t> default_stamp_;
  std::vector<std::uint32_t> exposure_stamp_;
  std::vector<double> exposure_;
  std::uint64_t step_epoch_ = 0;
  std::vector<std::uint64_t> candidate_stamp_;

  // per-run trace
  std::vector<NodeIndex> run_defaults_;
  std::vector<std::size_t> run_steps_;
  std::size_t run_step_count_ = 0;
};

/// Seeds default at step 0; at step t every surviving guarantor of a debtor
/// that defaulted at step t-1 rolls once with S_i summed over all of its
/// defaulted debtors. Stops at the first step without new defaults.
/// Throws DomainError for an empty seed set and LookupError for bad seeds.
ContagionResult run_cascade(const NetworkSnapshot& g, std::span<const NodeIndex> seeds,
                            const ContagionParams& params, std::uint64_t rng_seed);
ContagionResult run_cascade(const NetworkSnapshot& g, const std::vector<std::string>& seed_ids,
                            const ContagionParams& params, std::uint64_t rng_seed);
/// Coupled variant: one uniform per node shared across calls.
ContagionResult run_cascade_coupled(const NetworkSnapshot& g, std::span<const NodeIndex> seeds,
                                    const ContagionParams& params, std::span<const double> uniforms);

/// Expected number of additional failures caused by seeding each node alone,
/// averaged over `runs_per_node` cascades. Run r of node i uses stream (seed, i, r).
std::vector<double> importance_scores(const NetworkSnapshot& g, const ContagionParams& params,
                                      std::size_t runs_per_node, std::uint64_t rng_seed);

struct MonteCarloSummary {
  SeedScenario scenario = SeedScenario::random;
  double seed_fraction = 0.0;
  YearMonth month;
  std::size_t seeds = 0;
  std::size_t runs = 0;
  double mean_final_ratio = 0.0;  // seeds included
  std::optional<double> sd;       // sample SD, absent for a single run
  double mean_net_ratio = 0.0;    // seeds excluded
  std::optional<double> sd_net;
  std::vector<double> final_ratios;  // per run
};

/// params.runs independent cascades. Random seeds are redrawn per run; the
/// targeted scenarios reuse one seed set and only the defaults are random.
/// Run r uses stream (params.seed, r), so results do not depend on threading.
/// For top_importance, scores are computed when not supplied.
MonteCarloSummary monte_carlo(const NetworkSnapshot& g, const ContagionParams& params,
                              std::optional<std::span<const double>> importance = std::nullopt);

struct SweepGrid {
  std::vector<SeedScenario> scenarios = all_scenarios();
  std::vector<double> seed_fractions = {0.01, 0.05, 0.10};
};

struct SweepRow {
  YearMonth month;
  SeedScenario scenario;
  double seed_fraction;
  std::optional<MonteCarloSummary> summary;
  std::string error;  // set when the cell failed
};

/// Every (month, scenario, p) cell; failing cells are recorded, not fatal.
std::vector<SweepRow> scenario_sweep(const DynamicNetwork& dynamic, const SweepGrid& grid,
                                     const ContagionParams& params);

}  // namespace gnet
