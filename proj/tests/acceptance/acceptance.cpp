// Acceptance checks; one [PASS]/[FAIL] line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <string>

#include "gnet/contagion.hpp"
#include "gnet/generator.hpp"
#include "gnet/metrics.hpp"
#include "gnet/powerlaw.hpp"
#include "support/oracles.hpp"

using namespace gnet;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Target {
  const char* preset;
  double d, reciprocity, lambda_out;
};

const Target kTargets[] = {{"phase1", 0.9649911, 0.139792, 2.2574358},
                           {"phase2", 0.9598612, 0.135849, 2.3515078},
                           {"phase3", 0.9771918, 0.147975, 2.7372988},
                           {"phase4", 0.9804791, 0.143559, 2.7557222}};

std::string criterion_table1() {
  std::string detail;
  bool ok = true;
  for (const Target& t : kTargets) {
    const auto start = Clock::now();
    const auto g = generate_snapshot(preset_config(t.preset, 11));
    const auto report = compute_metrics(g);
    const double secs = seconds_since(start);
    const double d = report.degrees.average_degree, r = report.reciprocity;
    const double l = report.fit_out ? report.fit_out->exponent : NAN;
    const bool pass = std::abs(d - t.d) <= 0.01 && std::abs(r - t.reciprocity) <= 0.01 &&
                      std::abs(l - t.lambda_out) <= 0.15 && secs <= 60.0;
    ok = ok && pass;
    char buf[200];
    std::snprintf(buf, sizeof buf, " %s d=%.4f r=%.4f lout=%.3f %.1fs%s", t.preset, d, r, l, secs, pass ? "" : "!");
    detail += buf;
  }
  return (ok ? "" : "!") + detail;
}

std::string criterion_mle() {
  int good = 0, total = 0;
  double worst = 0.0;
  for (double alpha : {2.3, 2.7, 3.2}) {
    const DiscretePowerLaw law(alpha);
    for (int trial = 0; trial < 20; ++trial) {
      Rng rng(derive_seed(static_cast<std::uint64_t>(alpha * 1000), {static_cast<std::uint64_t>(trial)}));
      std::vector<std::uint64_t> v(100'000);
      for (auto& x : v) x = law(rng);
      const double err = std::abs(powerlaw_fit(v, FixedXmin{1}).exponent - alpha);
      worst = std::max(worst, err);
      good += err <= 0.05;
      ++total;
    }
  }
  char buf[120];
  std::snprintf(buf, sizeof buf, "%s %d/%d fits within 0.05, worst error %.4f", good == total ? "" : "!", good, total,
                worst);
  return buf;
}

std::string criterion_oracles() {
  std::mt19937_64 rng(2024);
  int mismatches = 0;
  for (int t = 0; t < 200; ++t) {
    std::uniform_int_distribution<std::size_t> size(3, 180);
    std::uniform_real_distribution<double> p(0.002, 0.05);
    oracle::RandomGraphOptions o;
    o.arc_probability = p(rng);
    o.couples = t % 4 == 0 ? 0 : t % 7;
    const auto g = oracle::random_snapshot(size(rng), rng, o);
    const auto a = oracle::adjacency(g);
    const auto u = oracle::undirected(a);

    const auto comps = components(g);
    const auto sizes = oracle::component_sizes(u);
    mismatches += comps.count != sizes.size() || comps.sizes != sizes || comps.giant_size != sizes.front();
    mismatches += std::abs(clustering_directed(g) - oracle::clustering(a)) > 1e-9;
    mismatches += std::abs(mutual_triad_ratio(g) - oracle::mutual_triad_ratio(a)) > 1e-9;
    mismatches += std::abs(reciprocal_couple_ratio(g) - oracle::couple_ratio(a)) > 1e-9;
    const auto paths = giant_path_stats(g);
    const auto expected = oracle::giant_paths(a);
    mismatches += paths.estimated || paths.diameter != expected.diameter ||
                  std::abs(paths.average_path_length - expected.average) > 1e-9 ||
                  paths.giant_size != expected.giant;
  }
  return (mismatches ? "!" : "") + std::to_string(mismatches) + " mismatches over 200 graphs";
}

std::string criterion_null_model() {
  std::string detail;
  bool ok = true;
  for (const Target& t : kTargets) {
    const auto g = generate_snapshot(preset_config(t.preset, 11));
    const double observed = reciprocal_couple_ratio(g);
    int below = 0;
    double mean = 0.0;
    for (std::uint64_t trial = 0; trial < 100; ++trial) {
      const double r = null_model_couple_ratio(g, 10 * g.edge_count(), trial + 1);
      below += r < observed;
      mean += r / 100.0;
    }
    ok = ok && below >= 95;
    char buf[120];
    std::snprintf(buf, sizeof buf, " %s %d/100 (obs %.4f null %.4f)", t.preset, below, observed, mean);
    detail += buf;
  }
  return (ok ? "" : "!") + detail;
}

std::string criterion_fermi() {
  Enterprise e{"x", 100.0, 50.0, 0.0, 0.0, false, false};
  const double half = default_probability(e, 0.0, 3.0, 0.5);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int violations = 0;
  for (int i = 0; i < 10'000; ++i) {
    Enterprise f{"y", 1.0 + 999.0 * unit(rng), 0.0, 0.0, 0.0, false, false};
    f.liability = f.asset * 2.0 * unit(rng);
    const double k = 0.1 + 20.0 * unit(rng), delta = unit(rng);
    const double s1 = f.asset * unit(rng), s2 = s1 + f.asset * unit(rng) * 0.5;
    violations += default_probability(f, s2, k, delta) < default_probability(f, s1, k, delta);
  }
  const bool ok = std::abs(half - 0.5) <= 1e-12 && violations == 0;
  char buf[120];
  std::snprintf(buf, sizeof buf, "%s P(L/A=delta, S=0)=%.15f, %d monotonicity violations in 10000", ok ? "" : "!",
                half, violations);
  return buf;
}

std::string bytes(const ContagionResult& r) {
  std::string out;
  auto put = [&](const void* p, std::size_t n) { out.append(static_cast<const char*>(p), n); };
  auto vec = [&](const auto& v) {
    const std::size_t n = v.size();
    put(&n, sizeof n);
    put(v.data(), n * sizeof(v[0]));
  };
  vec(r.seeds);
  vec(r.new_defaults);
  vec(r.defaulted);
  put(&r.initially_defaulted, sizeof r.initially_defaulted);
  put(&r.final_defaulted, sizeof r.final_defaulted);
  put(&r.final_ratio, sizeof r.final_ratio);
  put(&r.steps, sizeof r.steps);
  return out;
}

std::string criterion_determinism() {
  int failures = 0, done = 0;
  std::size_t longest = 0;
  for (const Target& t : kTargets) {
    const auto g = generate_snapshot(preset_config(t.preset, 11));
    ContagionParams p;
    p.k = 5.0;
    for (int i = 0; i < 250; ++i) {
      const auto scenario = static_cast<SeedScenario>(i % 3);
      const auto seeds = select_seeds(g, scenario, i % 2 ? 0.05 : 0.01, derive_seed(9, {std::uint64_t(i)}));
      const auto a = run_cascade(g, seeds, p, i);
      const auto b = run_cascade(g, seeds, p, i);
      longest = std::max(longest, a.steps);
      failures += a.steps > g.node_count() || bytes(a) != bytes(b) || !(a == b);
      ++done;
    }
  }
  return std::string(failures ? "!" : "") + std::to_string(done) + " cascades, " + std::to_string(failures) +
         " failures, longest " + std::to_string(longest) + " steps";
}

std::string criterion_reachability() {
  std::mt19937_64 rng(77);
  int mismatches = 0;
  ContagionParams p;
  p.k = 50.0;
  p.delta = 0.5;
  for (int t = 0; t < 100; ++t) {
    std::uniform_int_distribution<std::size_t> size(10, 500);
    oracle::RandomGraphOptions o;
    const std::size_t n = size(rng);
    o.arc_probability = 1.5 / static_cast<double>(n);
    o.min_leverage = 1.0;
    o.max_leverage = 2.0;
    const auto g = oracle::random_snapshot(n, rng, o);
    const auto seeds = select_seeds(g, SeedScenario::random, 0.03, t);
    const auto r = run_cascade(g, seeds, p, t);
    const auto expected = oracle::reverse_reachable(oracle::adjacency(g), {seeds.begin(), seeds.end()});
    mismatches += std::vector<std::size_t>(r.defaulted.begin(), r.defaulted.end()) != expected;
  }
  return (mismatches ? "!" : "") + std::to_string(mismatches) + " mismatches over 100 graphs";
}

std::string criterion_phase_direction() {
  const auto start = Clock::now();
  const auto g1 = generate_snapshot(preset_config("phase1", 11));
  const auto g3 = generate_snapshot(preset_config("phase3", 11));
  ContagionParams p;
  p.runs = 500;
  p.seed_fraction = 0.05;
  std::string detail;
  bool ok = true;
  for (SeedScenario s : all_scenarios()) {
    p.scenario = s;
    const auto a = monte_carlo(g1, p), b = monte_carlo(g3, p);
    const double se = std::sqrt((*a.sd * *a.sd + *b.sd * *b.sd) / static_cast<double>(p.runs));
    const bool pass = b.mean_final_ratio - a.mean_final_ratio > 3.0 * se;
    ok = ok && pass;
    char buf[160];
    std::snprintf(buf, sizeof buf, " %s %.4f->%.4f (%.1f SE)%s", std::string(to_string(s)).c_str(),
                  a.mean_final_ratio, b.mean_final_ratio, (b.mean_final_ratio - a.mean_final_ratio) / se,
                  pass ? "" : "!");
    detail += buf;
  }
  const double secs = seconds_since(start);
  ok = ok && secs <= 600.0;
  char buf[40];
  std::snprintf(buf, sizeof buf, ", %.0fs", secs);
  return (ok ? "" : "!") + detail + buf;
}

std::string criterion_monotonicity() {
  std::mt19937_64 rng(99);
  int violations = 0;
  ContagionParams p;
  for (int t = 0; t < 100; ++t) {
    oracle::RandomGraphOptions o;
    o.arc_probability = 0.02;
    o.min_leverage = 0.1;
    o.max_leverage = 1.0;
    const auto g = oracle::random_snapshot(150, rng, o);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> u(g.node_count());
    for (auto& x : u) x = unit(rng);
    const auto b = select_seeds(g, SeedScenario::random, 0.15, t);
    std::vector<NodeIndex> a;
    for (std::size_t i = 0; i < b.size(); ++i)
      if (unit(rng) < 0.5) a.push_back(b[i]);
    if (a.empty()) a.push_back(b.front());
    const auto ra = run_cascade_coupled(g, a, p, u), rb = run_cascade_coupled(g, b, p, u);
    violations += !std::includes(rb.defaulted.begin(), rb.defaulted.end(), ra.defaulted.begin(), ra.defaulted.end());
  }
  return (violations ? "!" : "") + std::to_string(violations) + " violations in 100 trials";
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<std::string()>> criteria[] = {
      {"Table-1 round trip", criterion_table1},
      {"power-law MLE recovery", criterion_mle},
      {"oracle equivalence", criterion_oracles},
      {"null-model direction", criterion_null_model},
      {"Fermi formula", criterion_fermi},
      {"cascade determinism and termination", criterion_determinism},
      {"reverse-reachability oracle", criterion_reachability},
      {"phase-3 over phase-1 failure ratio", criterion_phase_direction},
      {"coupled seed monotonicity", criterion_monotonicity},
  };
  int failed = 0, n = 0;
  for (const auto& [name, check] : criteria) {
    ++n;
    std::string detail;
    bool pass;
    try {
      detail = check();
      pass = detail.empty() || detail.front() != '!';
      if (!pass) detail.erase(0, 1);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
      pass = false;
    }
    failed += !pass;
    std::printf("[%s] %d %s:%s%s\n", pass ? "PASS" : "FAIL", n, name, detail.front() == ' ' ? "" : " ",
                detail.c_str());
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
