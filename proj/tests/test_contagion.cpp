#include "doctest.h"

#include <random>

#include "gnet/contagion.hpp"
#include "gnet/error.hpp"
#include "gnet/generator.hpp"
#include "support/oracles.hpp"

using namespace gnet;

namespace {

const YearMonth kMonth{2009, 2};

Enterprise firm(std::string id, double leverage, double loan = 10.0) {
  Enterprise e;
  e.id = std::move(id);
  e.asset = 100.0;
  e.liability = 100.0 * leverage;
  e.loan = loan;
  return e;
}

ContagionParams sharp() {
  ContagionParams p;
  p.k = 50.0;
  p.delta = 0.5;
  return p;
}

}  // namespace

TEST_SUITE("contagion") {
  TEST_CASE("default probability") {
    const Enterprise e = firm("a", 0.5);
    CHECK(default_probability(e, 0.0, 1.0, 0.5) == 0.5);
    CHECK(default_probability(e, 50.0, 1.0, 0.5) == doctest::Approx(1.0 / (1.0 + std::exp(-0.5))).epsilon(1e-14));
    CHECK(default_probability(e, 50.0, 1.0, 0.5) == doctest::Approx(0.62246).epsilon(1e-5));
    CHECK(default_probability(firm("b", 3.0), 500.0, 1e-12, 0.5) == doctest::Approx(0.5).epsilon(1e-9));
    // extreme arguments stay inside (0, 1)
    CHECK(default_probability(firm("c", 0.0), 0.0, 2000.0, 0.5) >= 0.0);
    CHECK(default_probability(firm("c", 9.0), 1e6, 2000.0, 0.5) <= 1.0);
    Enterprise broke = e;
    broke.asset = 0.0;
    CHECK_THROWS_AS(default_probability(broke, 0.0, 1.0, 0.5), DomainError);
    CHECK_THROWS_AS(default_probability(e, -1.0, 1.0, 0.5), DomainError);
  }

  TEST_CASE("parameter validation and scenario names") {
    ContagionParams p;
    CHECK_NOTHROW(validate(p));
    p.k = 0.0;
    CHECK_THROWS_AS(validate(p), ConfigError);
    p = {};
    p.seed_fraction = 1.0;
    CHECK_THROWS_AS(validate(p), ConfigError);
    p = {};
    p.runs = 0;
    CHECK_THROWS_AS(validate(p), ConfigError);
    for (auto s : all_scenarios()) CHECK(parse_scenario(to_string(s)) == s);
    CHECK_THROWS_AS(parse_scenario("top_asset"), ConfigError);
  }

  TEST_CASE("seed counts") {
    CHECK(seed_count(100, 0.05) == 5);
    CHECK(seed_count(100, 0.01) == 1);
    CHECK(seed_count(10, 0.01) == 1);
    CHECK(seed_count(37268, 0.05) == 1864);
    CHECK(seed_count(3, 0.5) == 2);
  }

  TEST_CASE("seed selection") {
    std::vector<Enterprise> nodes;
    for (int i = 0; i < 100; ++i) nodes.push_back(firm(oracle::id(i), 0.5, 7.0));
    std::vector<IndexedEdge> edges;
    for (NodeIndex g = 10; g < 19; ++g) edges.push_back({g, 42, 1.0});
    edges.push_back({1, 2, 1.0});
    edges.push_back({3, 2, 1.0});
    const auto g = NetworkSnapshot::from_indexed(kMonth, nodes, edges);

    CHECK(select_seeds(g, SeedScenario::top_in_degree, 0.01, 1) == std::vector<NodeIndex>{42});
    // equal loans: first nodes in id order
    CHECK(select_seeds(g, SeedScenario::top_loan, 0.03, 1) == std::vector<NodeIndex>{0, 1, 2});

    const auto r1 = select_seeds(g, SeedScenario::random, 0.05, 99);
    const auto r2 = select_seeds(g, SeedScenario::random, 0.05, 99);
    CHECK(r1 == r2);
    CHECK(r1.size() == 5);
    CHECK(std::adjacent_find(r1.begin(), r1.end()) == r1.end());
    CHECK(std::is_sorted(r1.begin(), r1.end()));

    std::vector<double> importance(100, 0.0);
    importance[77] = 3.0;
    importance[5] = 2.0;
    CHECK(select_seeds(g, SeedScenario::top_importance, 0.02, 1, importance) == std::vector<NodeIndex>{5, 77});
    CHECK_THROWS_AS(select_seeds(g, SeedScenario::top_importance, 0.02, 1), ConfigError);
    std::vector<double> partial(50, 1.0);
    CHECK_THROWS_AS(select_seeds(g, SeedScenario::top_importance, 0.02, 1, partial), ConfigError);
  }

  TEST_CASE("random seeds are uniform") {
    std::vector<Enterprise> nodes;
    for (int i = 0; i < 20; ++i) nodes.push_back(firm(oracle::id(i), 0.5));
    const auto g = NetworkSnapshot::from_indexed(kMonth, nodes, {});
    std::vector<int> hits(20, 0);
    const int trials = 20000;
    for (int t = 0; t < trials; ++t)
      for (auto s : select_seeds(g, SeedScenario::random, 0.25, t)) ++hits[s];
    // each node is picked with probability 5/20
    const double p = 0.25, se = std::sqrt(p * (1 - p) / trials);
    for (int h : hits) CHECK(std::abs(h / double(trials) - p) < 5 * se);
  }

  TEST_CASE("chain cascade") {
    // c guarantees b, b guarantees a
    const auto g = build_snapshot(kMonth, {firm("a", 0.5), firm("b", 1.5), firm("c", 1.5)},
                                  {{"c", "b", 10.0, kMonth}, {"b", "a", 10.0, kMonth}});
    const auto r = run_cascade(g, std::vector<std::string>{"a"}, sharp(), 1);
    CHECK(r.final_ratio == 1.0);
    CHECK(r.final_defaulted == 3);
    CHECK(r.steps == 3);
    CHECK(r.new_defaults == std::vector<std::size_t>{1, 1, 1});
    CHECK(r.defaulted == std::vector<NodeIndex>{0, 1, 2});
  }

  TEST_CASE("isolated seeds stop after one step") {
    const auto g = build_snapshot(kMonth, {firm("a", 0.9), firm("b", 0.9), firm("c", 0.9)},
                                  {{"a", "b", 1.0, kMonth}});
    const auto r = run_cascade(g, std::vector<std::string>{"a", "c"}, sharp(), 3);
    CHECK(r.defaulted == std::vector<NodeIndex>{0, 2});
    CHECK(r.steps == 1);
    CHECK(r.new_defaults == std::vector<std::size_t>{2});
  }

  TEST_CASE("pre-defaulted enterprises") {
    std::vector<Enterprise> nodes{firm("a", 0.9), firm("b", 0.9)};
    for (auto& e : nodes) e.defaulted = true;
    const auto g = build_snapshot(kMonth, nodes, {{"a", "b", 1.0, kMonth}});
    const auto r = run_cascade(g, std::vector<std::string>{"a"}, sharp(), 1);
    CHECK(r.final_defaulted == 2);
    CHECK(r.initially_defaulted == 2);
    CHECK(r.new_defaults == std::vector<std::size_t>{0});
    CHECK(r.steps == 0);

    // a defaulted debtor raises its guarantor's exposure without triggering a roll
    std::vector<Enterprise> mixed{firm("d", 0.0), firm("g", 0.45), firm("s", 0.0)};
    mixed[0].defaulted = true;
    const auto h = build_snapshot(kMonth, mixed, {{"g", "d", 10.0, kMonth}, {"g", "s", 10.0, kMonth}});
    // g's leverage with both debtors in default: (45 + 20) / 100 = 0.65 -> P ~ 1 at k = 50
    const auto r2 = run_cascade(h, std::vector<std::string>{"s"}, sharp(), 4);
    CHECK(r2.defaulted == std::vector<NodeIndex>{0, 1, 2});
    // without the seed nothing rolls g
    const auto r3 = run_cascade(h, std::vector<std::string>{"d"}, sharp(), 4);
    CHECK(r3.final_defaulted == 1);
  }

  TEST_CASE("exposure sums over all defaulted debtors") {
    // g guarantees x and y with 20 each; L/A = 0.35 so one default gives
    // 0.55 (rolls near 0.92 at k = 50) and two give 0.75
    const auto g = build_snapshot(kMonth, {firm("g", 0.35), firm("x", 0.0), firm("y", 0.0)},
                                  {{"g", "x", 20.0, kMonth}, {"g", "y", 20.0, kMonth}});
    ContagionParams p = sharp();
    // coupled draw just above P(0.55) but below P(0.75)
    const double p1 = default_probability(g.node(0), 20.0, p.k, p.delta);
    const double p2 = default_probability(g.node(0), 40.0, p.k, p.delta);
    REQUIRE(p1 < p2);
    std::vector<double> u{0.5 * (p1 + p2), 0.0, 0.0};
    const NodeIndex both[] = {1, 2};
    CHECK(run_cascade_coupled(g, both, p, u).final_defaulted == 3);
    const NodeIndex one[] = {1};
    CHECK(run_cascade_coupled(g, one, p, u).final_defaulted == 1);
  }

  TEST_CASE("cascade input errors") {
    const auto g = build_snapshot(kMonth, {firm("a", 0.5)}, {});
    CHECK_THROWS_AS(run_cascade(g, std::vector<std::string>{"zz"}, sharp(), 1), LookupError);
    CHECK_THROWS_AS(run_cascade(g, std::span<const NodeIndex>{}, sharp(), 1), DomainError);
    const NodeIndex bad[] = {5};
    CHECK_THROWS_AS(run_cascade(g, bad, sharp(), 1), LookupError);
  }

  TEST_CASE("result invariants and determinism on random graphs") {
    std::mt19937_64 rng(31);
    ContagionParams p;
    for (int t = 0; t < 40; ++t) {
      const auto g = oracle::random_snapshot(60 + 5 * t, rng, {.arc_probability = 0.03});
      const auto seeds = select_seeds(g, SeedScenario::random, 0.1, t);
      const auto r = run_cascade(g, seeds, p, 1000 + t);
      CHECK(r == run_cascade(g, seeds, p, 1000 + t));
      CHECK(r.final_defaulted >= seeds.size());
      CHECK(r.final_ratio >= 0.0);
      CHECK(r.final_ratio <= 1.0);
      CHECK(std::accumulate(r.new_defaults.begin(), r.new_defaults.end(), std::size_t{0}) == r.final_defaulted);
      CHECK(r.steps <= g.node_count());
      CHECK(std::includes(r.defaulted.begin(), r.defaulted.end(), seeds.begin(), seeds.end()));
    }
  }

  TEST_CASE("every-step rule rolls every survivor") {
    std::vector<Enterprise> nodes;
    for (int i = 0; i < 200; ++i) nodes.push_back(firm(oracle::id(i), 0.6));
    const auto g = NetworkSnapshot::from_indexed(kMonth, nodes, {});
    ContagionParams p;
    p.rule = EvaluationRule::every_step;
    const NodeIndex seed[] = {0};
    // baseline P = logistic(0.1) ~ 0.525 per step: the network collapses
    CHECK(run_cascade(g, seed, p, 1).final_ratio > 0.9);
    p.rule = EvaluationRule::contagion_triggered;
    CHECK(run_cascade(g, seed, p, 1).final_defaulted == 1);
  }

  TEST_CASE("mean-leverage delta") {
    const auto g = build_snapshot(kMonth, {firm("a", 0.2), firm("b", 0.6)}, {});
    ContagionParams p;
    p.delta_mode = DeltaMode::mean_leverage;
    CHECK(effective_delta(g, p) == doctest::Approx(0.4));
    p.delta_mode = DeltaMode::fixed;
    CHECK(effective_delta(g, p) == 0.5);
  }

  TEST_CASE("importance scores") {
    // star debtor d guaranteed by 10 high-leverage guarantors
    std::vector<Enterprise> nodes{firm("d", 0.5)};
    std::vector<GuaranteeEdge> edges;
    for (int i = 0; i < 10; ++i) {
      nodes.push_back(firm("g" + std::to_string(i), 1.5));
      edges.push_back({"g" + std::to_string(i), "d", 5.0, kMonth});
    }
    nodes.push_back(firm("lonely", 0.9));
    const auto g = build_snapshot(kMonth, nodes, edges);
    const auto scores = importance_scores(g, sharp(), 20, 7);
    CHECK(scores[g.index_of("d")] == doctest::Approx(10.0));
    CHECK(scores[g.index_of("lonely")] == 0.0);
    CHECK(scores[g.index_of("g3")] == 0.0);
    CHECK(scores == importance_scores(g, sharp(), 20, 7));
    CHECK_THROWS_AS(importance_scores(g, sharp(), 0, 7), ConfigError);
  }

  TEST_CASE("symmetric nodes have matching importance") {
    // two mirror-image debtors, each with three guarantors of equal leverage
    std::vector<Enterprise> nodes{firm("x", 0.5), firm("y", 0.5)};
    std::vector<GuaranteeEdge> edges;
    for (int i = 0; i < 3; ++i)
      for (const char* d : {"x", "y"}) {
        const std::string id = std::string("g") + d + std::to_string(i);
        nodes.push_back(firm(id, 0.5));
        edges.push_back({id, d, 10.0, kMonth});
      }
    const auto g = build_snapshot(kMonth, nodes, edges);
    ContagionParams p;
    const std::size_t runs = 4000;
    const auto s = importance_scores(g, p, runs, 3);
    // each of three guarantors defaults with P = logistic(0.1): sd of the count is sqrt(3 P (1 - P))
    const double pd = default_probability(g.node(g.index_of("gx0")), 10.0, 1.0, 0.5);
    const double se = std::sqrt(3 * pd * (1 - pd) / runs);
    CHECK(std::abs(s[g.index_of("x")] - s[g.index_of("y")]) < 3 * std::sqrt(2.0) * se);
    CHECK(s[g.index_of("x")] == doctest::Approx(3 * pd).epsilon(0.05));
  }

  TEST_CASE("monte carlo summaries") {
    std::mt19937_64 rng(8);
    const auto g = oracle::random_snapshot(300, rng, {.arc_probability = 0.01});
    ContagionParams p;
    p.runs = 200;
    p.seed = 5;
    const auto a = monte_carlo(g, p);
    const auto b = monte_carlo(g, p);
    CHECK(a.mean_final_ratio == b.mean_final_ratio);
    CHECK(a.final_ratios == b.final_ratios);
    CHECK(a.mean_final_ratio >= 0.05);
    CHECK(a.mean_net_ratio == doctest::Approx(a.mean_final_ratio - 15.0 / 300.0));
    CHECK(a.seeds == 15);
    CHECK(a.sd.has_value());

    // thread count does not change the result
    p.threads = 3;
    CHECK(monte_carlo(g, p).final_ratios == a.final_ratios);
    p.threads = 0;

    p.runs = 1;
    const auto single = monte_carlo(g, p);
    CHECK_FALSE(single.sd.has_value());
    CHECK(single.mean_final_ratio == single.final_ratios[0]);
    const auto seeds = select_seeds(g, SeedScenario::random, p.seed_fraction, derive_seed(derive_seed(p.seed, {0}), {0}));
    Rng cascade_rng(derive_seed(derive_seed(p.seed, {0}), {1}));
    CascadeEngine engine(g, p.k, p.delta);
    CHECK(single.mean_final_ratio == engine.run(seeds, cascade_rng).final_ratio);

    for (auto s : all_scenarios()) {
      p.runs = 20;
      p.scenario = s;
      p.importance_runs_per_node = 2;
      CHECK(monte_carlo(g, p).mean_final_ratio >= p.seed_fraction);
    }
  }

  TEST_CASE("no contagion without arcs") {
    std::vector<Enterprise> nodes;
    for (int i = 0; i < 200; ++i) nodes.push_back(firm(oracle::id(i), 2.0));
    const auto g = NetworkSnapshot::from_indexed(kMonth, nodes, {});
    ContagionParams p = sharp();
    p.runs = 50;
    p.seed_fraction = 0.05;
    for (auto s : {SeedScenario::random, SeedScenario::top_in_degree, SeedScenario::top_loan}) {
      p.scenario = s;
      const auto m = monte_carlo(g, p);
      CHECK(m.mean_final_ratio == 0.05);
      CHECK(*m.sd == 0.0);
    }
  }

  TEST_CASE("coupled monotonicity in the seed set") {
    std::mt19937_64 rng(77);
    ContagionParams p;
    for (int t = 0; t < 30; ++t) {
      const auto g = oracle::random_snapshot(100, rng, {.arc_probability = 0.03});
      std::vector<double> u(g.node_count());
      for (auto& x : u) x = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
      const auto big = select_seeds(g, SeedScenario::random, 0.2, t);
      const std::vector<NodeIndex> small(big.begin(), big.begin() + 5);
      const auto a = run_cascade_coupled(g, small, p, u);
      const auto b = run_cascade_coupled(g, big, p, u);
      CHECK(std::includes(b.defaulted.begin(), b.defaulted.end(), a.defaulted.begin(), a.defaulted.end()));
    }
  }

  TEST_CASE("scenario sweep") {
    DynamicNetwork d;
    GeneratorConfig c;
    c.nodes = 300;
    for (int m = 0; m < 2; ++m) {
      c.month = YearMonth{2008, 1}.plus(m);
      c.seed = m + 1;
      d.push_back(generate_snapshot(c));
    }
    ContagionParams p;
    p.runs = 10;
    p.importance_runs_per_node = 2;
    const SweepGrid grid;
    const auto rows = scenario_sweep(d, grid, p);
    CHECK(rows.size() == 2 * 4 * 3);
    for (const auto& r : rows) {
      REQUIRE(r.summary.has_value());
      CHECK(r.error.empty());
    }
    const auto again = scenario_sweep(d, grid, p);
    for (std::size_t i = 0; i < rows.size(); ++i)
      CHECK(rows[i].summary->final_ratios == again[i].summary->final_ratios);

    SweepGrid one{{SeedScenario::random}, {0.05}};
    DynamicNetwork single;
    single.push_back(d[0]);
    CHECK(scenario_sweep(single, one, p).size() == 1);

    // a bad cell is recorded and the sweep carries on
    SweepGrid bad{{SeedScenario::random}, {0.05, 1.5}};
    const auto mixed = scenario_sweep(single, bad, p);
    REQUIRE(mixed.size() == 2);
    CHECK(mixed[0].summary.has_value());
    CHECK_FALSE(mixed[1].summary.has_value());
    CHECK_FALSE(mixed[1].error.empty());
    CHECK_THROWS_AS(scenario_sweep(DynamicNetwork{}, grid, p), DomainError);
  }
}
