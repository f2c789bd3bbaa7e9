#include "gnet/contagion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>
#include <unordered_set>

#include "gnet/error.hpp"

namespace gnet {

std::string_view to_string(SeedScenario s) {
  switch (s) {
    case SeedScenario::random: return "random";
    case SeedScenario::top_in_degree: return "top_in_degree";
    case SeedScenario::top_loan: return "top_loan";
    case SeedScenario::top_importance: return "top_importance";
  }
  return "unknown";
}

SeedScenario parse_scenario(std::string_view name) {
  for (SeedScenario s : all_scenarios())
    if (to_string(s) == name) return s;
  throw ConfigError("unknown seed scenario '" + std::string(name) + "'");
}

std::vector<SeedScenario> all_scenarios() {
  return {SeedScenario::random, SeedScenario::top_in_degree, SeedScenario::top_loan,
          SeedScenario::top_importance};
}

void validate(const ContagionParams& p) {
  if (!(p.k > 0.0) || !std::isfinite(p.k)) throw ConfigError("contagion: k must be positive and finite");
  if (!std::isfinite(p.delta)) throw ConfigError("contagion: delta must be finite");
  if (!(p.seed_fraction > 0.0 && p.seed_fraction < 1.0))
    throw ConfigError("contagion: seed fraction must lie in (0, 1)");
  if (p.runs < 1) throw ConfigError("contagion: runs must be at least 1");
  if (p.importance_runs_per_node < 1) throw ConfigError("contagion: importance runs must be at least 1");
}

double effective_delta(const NetworkSnapshot& g, const ContagionParams& params) {
  if (params.delta_mode == DeltaMode::fixed || g.node_count() == 0) return params.delta;
  double sum = 0.0;
  for (const Enterprise& e : g.nodes()) sum += e.liability / e.asset;
  return sum / static_cast<double>(g.node_count());
}

namespace {

double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

unsigned worker_count(unsigned requested, std::size_t jobs) {
  unsigned t = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::size_t>(t, std::max<std::size_t>(jobs, 1)));
}

// Runs body(worker, begin, end) over contiguous chunks of [0, jobs).
template <class Body>
void parallel_chunks(std::size_t jobs, unsigned workers, Body&& body) {
  if (workers <= 1) {
    body(0u, std::size_t{0}, jobs);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  const std::size_t chunk = (jobs + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t b = std::min(jobs, w * chunk), e = std::min(jobs, b + chunk);
    pool.emplace_back([&, w, b, e] {
      try {
        body(w, b, e);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

double default_probability(const Enterprise& e, double defaulted_guaranteed_amount, double k, double delta) {
  if (!(e.asset > 0.0)) throw DomainError("default probability: asset of '" + e.id + "' must be positive");
  if (!(defaulted_guaranteed_amount >= 0.0))
    throw DomainError("default probability: defaulted guaranteed amount must be non-negative");
  return logistic(k * ((e.liability + defaulted_guaranteed_amount) / e.asset - delta));
}

std::size_t seed_count(std::size_t nodes, double fraction) {
  const double raw = std::ceil(fraction * static_cast<double>(nodes) - 1e-9);
  return std::min<std::size_t>(nodes, static_cast<std::size_t>(std::max(raw, 1.0)));
}

std::vector<NodeIndex> select_seeds(const NetworkSnapshot& g, SeedScenario scenario, double fraction,
                                    std::uint64_t rng_seed, std::optional<std::span<const double>> importance) {
  const std::size_t n = g.node_count();
  if (n == 0) throw DomainError("select_seeds: snapshot has no nodes");
  if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("select_seeds: fraction must lie in (0, 1)");
  const std::size_t count = seed_count(n, fraction);

  if (scenario == SeedScenario::random) {
    // Floyd's sampling without replacement
    Rng rng(rng_seed);
    std::unordered_set<NodeIndex> chosen;
    chosen.reserve(count * 2);
    std::vector<NodeIndex> out;
    out.reserve(count);
    for (std::size_t j = n - count; j < n; ++j) {
      const auto t = static_cast<NodeIndex>(uniform_index(rng, j + 1));
      const NodeIndex pick = chosen.insert(t).second ? t : static_cast<NodeIndex>(j);
      if (pick != t) chosen.insert(pick);
      out.push_back(pick);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  std::vector<double> score(n);
  switch (scenario) {
    case SeedScenario::top_in_degree:
      for (NodeIndex i = 0; i < n; ++i) score[i] = static_cast<double>(g.in_degree(i));
      break;
    case SeedScenario::top_loan:
      for (NodeIndex i = 0; i < n; ++i) score[i] = g.node(i).loan;
      break;
    case SeedScenario::top_importance:
      if (!importance) throw ConfigError("select_seeds: top_importance needs an importance table");
      if (importance->size() != n) throw ConfigError("select_seeds: importance table does not cover every node");
      std::copy(importance->begin(), importance->end(), score.begin());
      break;
    case SeedScenario::random: break;
  }
  std::vector<NodeIndex> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count), order.end(),
                    [&](NodeIndex a, NodeIndex b) { return score[a] != score[b] ? score[a] > score[b] : a < b; });
  order.resize(count);
  std::sort(order.begin(), order.end());
  return order;
}

// ---------------------------------------------------------------------------

CascadeEngine::CascadeEngine(const NetworkSnapshot& g, double k, double delta, EvaluationRule rule)
    : g_(&g), k_(k), delta_(delta), rule_(rule) {
  const std::size_t n = g.node_count();
  pre_defaulted_.assign(n, 0);
  base_exposure_.assign(n, 0.0);
  for (NodeIndex v = 0; v < n; ++v) {
    if (!g.node(v).defaulted) continue;
    pre_defaulted_[v] = 1;
    pre_defaulted_list_.push_back(v);
    for (const Arc& a : g.in_arcs(v)) base_exposure_[a.node] += a.amount;
  }
  default_stamp_.assign(n, 0);
  exposure_stamp_.assign(n, 0);
  exposure_.assign(n, 0.0);
  candidate_stamp_.assign(n, 0);
}

double CascadeEngine::probability(NodeIndex v) const {
  const Enterprise& e = g_->node(v);
  return logistic(k_ * ((e.liability + exposure(v)) / e.asset - delta_));
}

void CascadeEngine::next_epoch() {
  if (++epoch_ == 0) {
    std::fill(default_stamp_.begin(), default_stamp_.end(), 0);
    std::fill(exposure_stamp_.begin(), exposure_stamp_.end(), 0);
    epoch_ = 1;
  }
}

template <class Draw>
void CascadeEngine::cascade(std::span<const NodeIndex> seeds, Draw&& draw) {
  const std::size_t n = g_->node_count();
  if (seeds.empty()) throw DomainError("cascade needs at least one seed");
  for (NodeIndex s : seeds)
    if (s >= n) throw LookupError("seed index " + std::to_string(s) + " is not a node");

  next_epoch();
  run_defaults_.clear();
  run_steps_.clear();

  std::vector<NodeIndex> frontier;
  for (NodeIndex s : seeds) {
    if (defaulted(s)) continue;
    default_stamp_[s] = epoch_;
    frontier.push_back(s);
  }
  run_defaults_.insert(run_defaults_.end(), frontier.begin(), frontier.end());
  run_steps_.push_back(frontier.size());
  std::size_t step = 0;

  std::vector<NodeIndex> candidates, fresh;
  while (!frontier.empty()) {
    ++step;
    ++step_epoch_;
    candidates.clear();
    // exposures grow with last step's defaults before anyone rolls
    for (NodeIndex j : frontier)
      for (const Arc& a : g_->in_arcs(j)) {
        const NodeIndex i = a.node;
        if (defaulted(i)) continue;
        if (exposure_stamp_[i] != epoch_) {
          exposure_[i] = base_exposure_[i];
          exposure_stamp_[i] = epoch_;
        }
        exposure_[i] += a.amount;
        if (candidate_stamp_[i] != step_epoch_) {
          candidate_stamp_[i] = step_epoch_;
          candidates.push_back(i);
        }
      }
    if (rule_ == EvaluationRule::every_step) {
      candidates.clear();
      for (NodeIndex i = 0; i < n; ++i)
        if (!defaulted(i)) candidates.push_back(i);
    } else {
      std::sort(candidates.begin(), candidates.end());
    }
    fresh.clear();
    for (NodeIndex i : candidates)
      if (draw(i) < probability(i)) fresh.push_back(i);
    for (NodeIndex i : fresh) default_stamp_[i] = epoch_;
    if (!fresh.empty()) {
      run_steps_.push_back(fresh.size());
      run_defaults_.insert(run_defaults_.end(), fresh.begin(), fresh.end());
    }
    frontier.swap(fresh);
  }
  run_step_count_ = step;
}

ContagionResult CascadeEngine::collect(std::span<const NodeIndex> seeds) const {
  ContagionResult r;
  r.seeds.assign(seeds.begin(), seeds.end());
  std::sort(r.seeds.begin(), r.seeds.end());
  r.seeds.erase(std::unique(r.seeds.begin(), r.seeds.end()), r.seeds.end());
  r.new_defaults = run_steps_;
  r.initially_defaulted = pre_defaulted_list_.size();
  r.defaulted = run_defaults_;
  r.defaulted.insert(r.defaulted.end(), pre_defaulted_list_.begin(), pre_defaulted_list_.end());
  std::sort(r.defaulted.begin(), r.defaulted.end());
  r.final_defaulted = r.defaulted.size();
  r.final_ratio = static_cast<double>(r.final_defaulted) / static_cast<double>(g_->node_count());
  r.steps = run_step_count_;
  return r;
}

ContagionResult CascadeEngine::run(std::span<const NodeIndex> seeds, Rng& rng) {
  cascade(seeds, [&](NodeIndex) { return uniform01(rng); });
  return collect(seeds);
}

ContagionResult CascadeEngine::run_coupled(std::span<const NodeIndex> seeds, std::span<const double> uniforms) {
  if (uniforms.size() != g_->node_count()) throw DomainError("coupled cascade needs one uniform per node");
  cascade(seeds, [&](NodeIndex i) { return uniforms[i]; });
  return collect(seeds);
}

std::size_t CascadeEngine::run_size(std::span<const NodeIndex> seeds, Rng& rng) {
  cascade(seeds, [&](NodeIndex) { return uniform01(rng); });
  return run_defaults_.size() + pre_defaulted_list_.size();
}

// ---------------------------------------------------------------------------

ContagionResult run_cascade(const NetworkSnapshot& g, std::span<const NodeIndex> seeds,
                            const ContagionParams& params, std::uint64_t rng_seed) {
  CascadeEngine engine(g, params.k, effective_delta(g, params), params.rule);
  Rng rng(rng_seed);
  return engine.run(seeds, rng);
}

ContagionResult run_cascade(const NetworkSnapshot& g, const std::vector<std::string>& seed_ids,
                            const ContagionParams& params, std::uint64_t rng_seed) {
  std::vector<NodeIndex> seeds;
  seeds.reserve(seed_ids.size());
  for (const auto& id : seed_ids) seeds.push_back(g.index_of(id));
  return run_cascade(g, seeds, params, rng_seed);
}

ContagionResult run_cascade_coupled(const NetworkSnapshot& g, std::span<const NodeIndex> seeds,
                                    const ContagionParams& params, std::span<const double> uniforms) {
  CascadeEngine engine(g, params.k, effective_delta(g, params), params.rule);
  return engine.run_coupled(seeds, uniforms);
}

std::vector<double> importance_scores(const NetworkSnapshot& g, const ContagionParams& params,
                                      std::size_t runs_per_node, std::uint64_t rng_seed) {
  if (runs_per_node < 1) throw ConfigError("importance: runs per node must be at least 1");
  const std::size_t n = g.node_count();
  const double delta = effective_delta(g, params);
  std::vector<double> scores(n, 0.0);
  const unsigned workers = worker_count(params.threads, n);
  parallel_chunks(n, workers, [&](unsigned, std::size_t begin, std::size_t end) {
    CascadeEngine engine(g, params.k, delta, params.rule);
    for (std::size_t i = begin; i < end; ++i) {
      const NodeIndex seed[] = {static_cast<NodeIndex>(i)};
      std::size_t total = 0;
      for (std::size_t r = 0; r < runs_per_node; ++r) {
        Rng rng(derive_seed(rng_seed, {i, r}));
        total += engine.run_size(seed, rng) - 1;
      }
      scores[i] = static_cast<double>(total) / static_cast<double>(runs_per_node);
    }
  });
  return scores;
}

MonteCarloSummary monte_carlo(const NetworkSnapshot& g, const ContagionParams& params,
                              std::optional<std::span<const double>> importance) {
  validate(params);
  const std::size_t n = g.node_count();
  if (n == 0) throw DomainError("monte_carlo: snapshot has no nodes");
  const double delta = effective_delta(g, params);

  std::vector<double> computed_importance;
  if (params.scenario == SeedScenario::top_importance && !importance) {
    computed_importance = importance_scores(g, params, params.importance_runs_per_node,
                                            derive_seed(params.seed, {0x1111}));
    importance = std::span<const double>(computed_importance);
  }
  std::vector<NodeIndex> fixed_seeds;
  if (params.scenario != SeedScenario::random)
    fixed_seeds = select_seeds(g, params.scenario, params.seed_fraction, params.seed, importance);

  MonteCarloSummary s;
  s.scenario = params.scenario;
  s.seed_fraction = params.seed_fraction;
  s.month = g.month();
  s.runs = params.runs;
  s.seeds = seed_count(n, params.seed_fraction);
  s.final_ratios.assign(params.runs, 0.0);
  std::vector<std::size_t> sizes(params.runs, 0), net(params.runs, 0);

  const unsigned workers = worker_count(params.threads, params.runs);
  parallel_chunks(params.runs, workers, [&](unsigned, std::size_t begin, std::size_t end) {
    CascadeEngine engine(g, params.k, delta, params.rule);
    for (std::size_t r = begin; r < end; ++r) {
      const std::uint64_t run_seed = derive_seed(params.seed, {r});
      std::vector<NodeIndex> seeds = params.scenario == SeedScenario::random
                                         ? select_seeds(g, SeedScenario::random, params.seed_fraction,
                                                        derive_seed(run_seed, {0}))
                                         : fixed_seeds;
      Rng rng(derive_seed(run_seed, {1}));
      sizes[r] = engine.run_size(seeds, rng);
      net[r] = sizes[r] - std::min(sizes[r], seeds.size());
      s.final_ratios[r] = static_cast<double>(sizes[r]) / static_cast<double>(n);
    }
  });

  // Counts are summed exactly; runs that all agree give SD 0.
  auto mean_sd = [n](const std::vector<std::size_t>& counts, double& mean, std::optional<double>& sd) {
    std::uint64_t total = 0;
    for (auto c : counts) total += c;
    const double runs = static_cast<double>(counts.size());
    mean = static_cast<double>(total) / (runs * static_cast<double>(n));
    if (counts.size() >= 2) {
      const double mean_count = static_cast<double>(total) / runs;
      double sq = 0.0;
      for (auto c : counts) sq += (static_cast<double>(c) - mean_count) * (static_cast<double>(c) - mean_count);
      sd = std::sqrt(sq / (runs - 1.0)) / static_cast<double>(n);
    }
  };
  mean_sd(sizes, s.mean_final_ratio, s.sd);
  mean_sd(net, s.mean_net_ratio, s.sd_net);
  return s;
}

std::vector<SweepRow> scenario_sweep(const DynamicNetwork& dynamic, const SweepGrid& grid,
                                     const ContagionParams& params) {
  if (dynamic.empty()) throw DomainError("scenario_sweep: no snapshots");
  if (grid.scenarios.empty() || grid.seed_fractions.empty()) throw ConfigError("scenario_sweep: empty grid");
  std::vector<SweepRow> rows;
  for (std::size_t m = 0; m < dynamic.size(); ++m) {
    const NetworkSnapshot& g = dynamic[m];
    std::optional<std::vector<double>> importance;
    std::string importance_error;
    for (SeedScenario scenario : grid.scenarios) {
      for (std::size_t f = 0; f < grid.seed_fractions.size(); ++f) {
        SweepRow row{g.month(), scenario, grid.seed_fractions[f], std::nullopt, {}};
        try {
          ContagionParams cell = params;
          cell.scenario = scenario;
          cell.seed_fraction = grid.seed_fractions[f];
          cell.seed = derive_seed(params.seed, {m, static_cast<std::uint64_t>(scenario), f});
          std::optional<std::span<const double>> table;
          if (scenario == SeedScenario::top_importance) {
            if (!importance && importance_error.empty()) {
              try {
                importance = importance_scores(g, params, params.importance_runs_per_node,
                                               derive_seed(params.seed, {m, 0x1111}));
              } catch (const Error& e) {
                importance_error = e.what();
              }
            }
            if (!importance) throw DomainError("importance scores unavailable: " + importance_error);
            table = std::span<const double>(*importance);
          }
          row.summary = monte_carlo(g, cell, table);
        } catch (const Error& e) {
          row.error = e.what();
        }
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

}  // namespace gnet
