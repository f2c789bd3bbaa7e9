#include "gnet/generator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <span>
#include <unordered_set>

#include "json.hpp"

#include "gnet/error.hpp"
#include "gnet/powerlaw.hpp"
#include "gnet/rng.hpp"
#include "presets_embedded.hpp"

namespace gnet {

LogNormal LogNormal::from_mean(double mean, double sigma) {
  return LogNormal{std::log(mean) - 0.5 * sigma * sigma, sigma};
}

double LogNormal::mean() const { return std::exp(mu + 0.5 * sigma * sigma); }

void validate(const GeneratorConfig& c) {
  auto fail = [&](const std::string& what) { return ConfigError("generator config '" + c.label + "': " + what); };
  if (c.nodes < 10) throw fail("node count must be at least 10");
  if (!(c.lambda_in > 1.0) || !(c.lambda_out > 1.0)) throw fail("power-law exponents must exceed 1");
  if (!(c.couple_share >= 0.0 && c.couple_share <= 1.0)) throw fail("couple share must lie in [0, 1]");
  if (!(c.average_degree >= 0.0)) throw fail("average degree must be non-negative");
  const double n = static_cast<double>(c.nodes);
  if (c.average_degree * n > n * (n - 1.0)) throw fail("average degree exceeds a complete digraph");
  if (!(c.asset.sigma >= 0.0) || !(c.loan.sigma >= 0.0) || !(c.credit_line.sigma >= 0.0) ||
      !(c.leverage_sigma >= 0.0))
    throw fail("log-normal scales must be non-negative");
  if (!(c.target_debt_to_asset > 0.0)) throw fail("target debt-to-asset ratio must be positive");
  if (!(c.listed_probability >= 0.0 && c.listed_probability <= 1.0))
    throw fail("listed probability must lie in [0, 1]");
  if (c.dual_role_share && !(*c.dual_role_share >= 0.0 && *c.dual_role_share <= 1.0))
    throw fail("dual-role share must lie in [0, 1]");
  if (!(c.hub_coupling >= 0.0 && c.hub_coupling <= 1.0)) throw fail("hub coupling must lie in [0, 1]");
  if (!(c.sorted_matching >= 0.0 && c.sorted_matching <= 1.0)) throw fail("sorted matching must lie in [0, 1]");
}

namespace {

constexpr int kMaxDegreeDraws = 100;
constexpr int kRepairTries = 64;

// Power-law draws until they sum to exactly `total` (last draw truncated).
std::vector<std::uint64_t> fill_to_total(const DiscretePowerLaw& law, std::uint64_t total, Rng& rng) {
  std::vector<std::uint64_t> out;
  std::uint64_t sum = 0;
  while (sum < total) {
    const std::uint64_t x = std::min(law(rng), total - sum);
    out.push_back(x);
    sum += x;
  }
  return out;
}

// Non-couple degree targets: the whole-graph sequence (couples contribute
// `couple_nodes` ones) is power-law distributed and sums to `total`.
std::optional<std::vector<std::uint64_t>> draw_degrees(const DiscretePowerLaw& law, std::uint64_t total,
                                                       std::size_t couple_nodes, std::size_t free_nodes,
                                                       Rng& rng) {
  std::vector<std::uint64_t> draws = fill_to_total(law, total, rng);
  std::size_t ones_to_drop = couple_nodes;
  std::vector<std::uint64_t> kept;
  kept.reserve(draws.size());
  for (std::uint64_t x : draws) {
    if (x == 1 && ones_to_drop > 0) {
      --ones_to_drop;
      continue;
    }
    kept.push_back(x);
  }
  if (ones_to_drop > 0 || kept.size() > free_nodes) return std::nullopt;
  kept.resize(free_nodes, 0);
  return kept;
}

template <class T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[uniform_index(rng, i)]);
}

std::uint64_t key(NodeIndex u, NodeIndex v) { return (std::uint64_t{u} << 32) | v; }

// Pairs out-stubs with in-stubs. A `sorted_share` of the stubs on each side
// is paired by rank (out-degree descending against in-degree ascending), the
// rest uniformly. Self-loops and duplicates are repaired by swapping debtors
// with random valid arcs; arcs that cannot be repaired are dropped.
std::vector<IndexedEdge> wire(const std::vector<std::uint64_t>& out_deg, const std::vector<std::uint64_t>& in_deg,
                              double sorted_share, Rng& rng) {
  std::vector<NodeIndex> out_stubs, in_stubs;
  for (NodeIndex v = 0; v < out_deg.size(); ++v) out_stubs.insert(out_stubs.end(), out_deg[v], v);
  for (NodeIndex v = 0; v < in_deg.size(); ++v) in_stubs.insert(in_stubs.end(), in_deg[v], v);
  shuffle(out_stubs, rng);
  shuffle(in_stubs, rng);
  const auto sorted = static_cast<std::ptrdiff_t>(
      std::llround(sorted_share * static_cast<double>(std::min(out_stubs.size(), in_stubs.size()))));
  std::stable_sort(out_stubs.begin(), out_stubs.begin() + sorted,
                   [&](NodeIndex a, NodeIndex b) { return out_deg[a] > out_deg[b]; });
  std::stable_sort(in_stubs.begin(), in_stubs.begin() + sorted,
                   [&](NodeIndex a, NodeIndex b) { return in_deg[a] < in_deg[b]; });

  std::vector<IndexedEdge> edges;
  edges.reserve(out_stubs.size());
  std::unordered_set<std::uint64_t> present;
  present.reserve(out_stubs.size() * 2);
  std::vector<std::pair<NodeIndex, NodeIndex>> bad;
  for (std::size_t i = 0; i < out_stubs.size(); ++i) {
    const NodeIndex u = out_stubs[i], v = in_stubs[i];
    if (u != v && present.insert(key(u, v)).second)
      edges.push_back({u, v, 0.0});
    else
      bad.emplace_back(u, v);
  }
  for (auto [a, b] : bad) {
    for (int t = 0; t < kRepairTries && !edges.empty(); ++t) {
      IndexedEdge& other = edges[uniform_index(rng, edges.size())];
      const NodeIndex c = other.guarantor, d = other.debtor;
      // (a,b) + (c,d) -> (a,d) + (c,b)
      if (a == d || c == b || present.contains(key(a, d)) || present.contains(key(c, b))) continue;
      present.erase(key(c, d));
      present.insert(key(a, d));
      present.insert(key(c, b));
      other.debtor = b;
      edges.push_back({a, d, 0.0});
      break;
    }
  }
  return edges;
}

// Out-degree targets go to uniformly shuffled free nodes. A hub_coupling
// share of the top 1% in-degree targets goes to the top 1% out-degree nodes;
// every other nonzero in-degree target picks a node with out-degree with
// probability dual_role_share (uniformly over unused free nodes when unset).
void place_degrees(const GeneratorConfig& config, std::vector<std::uint64_t> out_seq,
                   std::vector<std::uint64_t> in_seq, std::span<const NodeIndex> free,
                   std::vector<std::uint64_t>& out_deg, std::vector<std::uint64_t>& in_deg, Rng& rng) {
  shuffle(out_seq, rng);
  for (std::size_t k = 0; k < free.size(); ++k) out_deg[free[k]] = out_seq[k];

  shuffle(in_seq, rng);
  std::stable_sort(in_seq.begin(), in_seq.end(), std::greater<>());
  while (!in_seq.empty() && in_seq.back() == 0) in_seq.pop_back();

  std::vector<NodeIndex> by_out(free.begin(), free.end());
  std::stable_sort(by_out.begin(), by_out.end(),
                   [&](NodeIndex a, NodeIndex b) { return out_deg[a] > out_deg[b]; });
  const auto hub_count = std::min<std::size_t>(
      static_cast<std::size_t>(std::ceil(0.01 * static_cast<double>(config.nodes) - 1e-9)), free.size());
  std::vector<NodeIndex> top_out(by_out.begin(), by_out.begin() + static_cast<std::ptrdiff_t>(hub_count));
  shuffle(top_out, rng);
  const auto coupled = std::min<std::size_t>(
      {static_cast<std::size_t>(std::llround(config.hub_coupling * static_cast<double>(hub_count))), hub_count,
       in_seq.size()});

  std::vector<std::uint8_t> used(out_deg.size(), 0);
  for (std::size_t i = 0; i < coupled; ++i) {
    in_deg[top_out[i]] = in_seq[i];
    used[top_out[i]] = 1;
  }
  std::vector<NodeIndex> dual, single;
  for (NodeIndex v : free)
    if (!used[v]) (out_deg[v] > 0 ? dual : single).push_back(v);
  shuffle(dual, rng);
  shuffle(single, rng);
  for (std::size_t i = coupled; i < in_seq.size(); ++i) {
    const double p_dual = config.dual_role_share
                              ? *config.dual_role_share
                              : static_cast<double>(dual.size()) / static_cast<double>(dual.size() + single.size());
    const bool to_dual = single.empty() || (!dual.empty() && uniform01(rng) < p_dual);
    auto& pool = to_dual ? dual : single;
    in_deg[pool.back()] = in_seq[i];
    pool.pop_back();
  }
}

std::string node_id(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "n%08zu", i);
  return buf;
}

}  // namespace

NetworkSnapshot generate_snapshot(const GeneratorConfig& config) {
  std::vector<std::string> ids(config.nodes);
  for (std::size_t i = 0; i < config.nodes; ++i) ids[i] = node_id(i);
  return generate_snapshot(config, std::move(ids));
}

NetworkSnapshot generate_snapshot(const GeneratorConfig& config, std::vector<std::string> ids) {
  validate(config);
  if (ids.size() != config.nodes) throw ConfigError("generator: id list size differs from node count");
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) throw ConfigError("generator: duplicate node id");

  const std::size_t n = config.nodes;
  const std::size_t couple_nodes = 2 * static_cast<std::size_t>(std::floor(config.couple_share * n / 2.0));
  const auto total_edges = static_cast<std::uint64_t>(std::llround(config.average_degree * static_cast<double>(n)));
  if (total_edges < couple_nodes)
    throw GenerationError("generator '" + config.label + "': couples alone exceed the edge budget");
  const std::size_t free_nodes = n - couple_nodes;

  Rng structure(derive_seed(config.seed, {1}));
  std::vector<NodeIndex> slots(n);
  std::iota(slots.begin(), slots.end(), 0u);
  shuffle(slots, structure);

  std::vector<IndexedEdge> edges;
  for (std::size_t i = 0; i + 1 < couple_nodes; i += 2) {
    edges.push_back({slots[i], slots[i + 1], 0.0});
    edges.push_back({slots[i + 1], slots[i], 0.0});
  }

  if (total_edges > couple_nodes) {
    const DiscretePowerLaw law_out(config.lambda_out), law_in(config.lambda_in);
    std::optional<std::vector<std::uint64_t>> out_seq, in_seq;
    for (int attempt = 0; attempt < kMaxDegreeDraws && !(out_seq && in_seq); ++attempt) {
      out_seq = draw_degrees(law_out, total_edges, couple_nodes, free_nodes, structure);
      in_seq = draw_degrees(law_in, total_edges, couple_nodes, free_nodes, structure);
    }
    if (!out_seq || !in_seq)
      throw GenerationError("generator '" + config.label + "': no feasible degree sequence after " +
                            std::to_string(kMaxDegreeDraws) + " draws");
    std::vector<std::uint64_t> out_deg(n, 0), in_deg(n, 0);
    place_degrees(config, *out_seq, *in_seq,
                  std::span<const NodeIndex>(slots).subspan(couple_nodes), out_deg, in_deg, structure);
    auto wired = wire(out_deg, in_deg, config.sorted_matching, structure);
    edges.insert(edges.end(), wired.begin(), wired.end());
  }

  // financial attributes
  Rng money(derive_seed(config.seed, {2}));
  std::vector<Enterprise> nodes(n);
  std::vector<double> leverage(n);
  auto lognormal = [&](const LogNormal& d) { return std::exp(d.mu + d.sigma * standard_normal(money)); };
  for (std::size_t i = 0; i < n; ++i) {
    Enterprise& e = nodes[i];
    e.id = ids[i];
    e.asset = lognormal(config.asset);
    leverage[i] = std::exp(config.leverage_sigma * standard_normal(money));
    e.loan = lognormal(config.loan);
    e.credit_line = lognormal(config.credit_line);
    e.listed = uniform01(money) < config.listed_probability;
  }
  const double mean_leverage = std::accumulate(leverage.begin(), leverage.end(), 0.0) / static_cast<double>(n);
  const double scale = config.target_debt_to_asset / mean_leverage;
  for (std::size_t i = 0; i < n; ++i) nodes[i].liability = leverage[i] * scale * nodes[i].asset;

  // each debtor's loan is split equally among its guarantors
  std::vector<std::uint32_t> guarantors(n, 0);
  for (const auto& e : edges) ++guarantors[e.debtor];
  for (auto& e : edges) e.amount = nodes[e.debtor].loan / guarantors[e.debtor];

  return NetworkSnapshot::from_indexed(config.month, std::move(nodes), std::move(edges));
}

DynamicNetwork generate_dynamic(const DynamicPlan& plan) {
  if (plan.months.empty()) throw ConfigError("dynamic plan has no months");
  if (!(plan.survival_fraction >= 0.0 && plan.survival_fraction <= 1.0))
    throw ConfigError("survival fraction must lie in [0, 1]");
  DynamicNetwork dynamic;
  std::vector<std::string> previous;
  std::size_t next_id = 0;
  for (std::size_t m = 0; m < plan.months.size(); ++m) {
    GeneratorConfig config = plan.months[m];
    config.seed = derive_seed(plan.seed, {m});
    Rng ids_rng(derive_seed(plan.seed, {m, 0x1d5}));
    const auto kept = static_cast<std::size_t>(
        std::floor(plan.survival_fraction * static_cast<double>(std::min(previous.size(), config.nodes))));
    shuffle(previous, ids_rng);
    std::vector<std::string> ids(previous.begin(), previous.begin() + static_cast<std::ptrdiff_t>(kept));
    while (ids.size() < config.nodes) ids.push_back(node_id(next_id++));
    try {
      NetworkSnapshot snap = generate_snapshot(config, ids);
      dynamic.push_back(std::move(snap));
    } catch (const Error& e) {
      throw GenerationError("month " + config.month.to_string() + ": " + e.what());
    }
    std::sort(ids.begin(), ids.end());
    previous = std::move(ids);
  }
  return dynamic;
}

// ---------------------------------------------------------------------------
// presets and JSON configs

namespace {

using nlohmann::json;

json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
}

LogNormal lognormal_from_json(const json& j) {
  const double sigma = j.value("sigma", 1.0);
  if (j.contains("mu")) return LogNormal{j.at("mu").get<double>(), sigma};
  return LogNormal::from_mean(j.at("mean").get<double>(), sigma);
}

GeneratorConfig config_from(const json& j) {
  try {
    GeneratorConfig c;
    c.label = j.value("name", std::string("custom"));
    c.month = YearMonth::parse(j.value("month", std::string("2007-01")));
    c.nodes = j.at("nodes").get<std::size_t>();
    c.average_degree = j.at("average_degree").get<double>();
    c.lambda_in = j.at("lambda_in").get<double>();
    c.lambda_out = j.at("lambda_out").get<double>();
    c.couple_share = j.value("couple_share", c.couple_share);
    if (j.contains("asset")) c.asset = lognormal_from_json(j.at("asset"));
    if (j.contains("loan")) c.loan = lognormal_from_json(j.at("loan"));
    if (j.contains("credit_line")) c.credit_line = lognormal_from_json(j.at("credit_line"));
    c.leverage_sigma = j.value("leverage_sigma", c.leverage_sigma);
    c.target_debt_to_asset = j.value("debt_to_asset", c.target_debt_to_asset);
    c.listed_probability = j.value("listed_probability", c.listed_probability);
    if (j.contains("dual_role_share")) c.dual_role_share = j.at("dual_role_share").get<double>();
    c.hub_coupling = j.value("hub_coupling", c.hub_coupling);
    c.sorted_matching = j.value("sorted_matching", c.sorted_matching);
    c.seed = j.value("seed", c.seed);
    validate(c);
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("generator config: ") + e.what());
  } catch (const ValidationError& e) {
    throw ConfigError(std::string("generator config: ") + e.what());
  }
}

double lerp(double a, double b, double t) { return a + (b - a) * t; }

LogNormal lerp(const LogNormal& a, const LogNormal& b, double t) {
  return LogNormal::from_mean(lerp(a.mean(), b.mean(), t), lerp(a.sigma, b.sigma, t));
}

// Piecewise-linear interpolation between anchor configs placed at their own
// months; clamped outside the anchor range.
GeneratorConfig interpolate(const std::vector<GeneratorConfig>& anchors, YearMonth month) {
  if (month <= anchors.front().month) return anchors.front();
  if (month >= anchors.back().month) return anchors.back();
  std::size_t k = 1;
  while (anchors[k].month < month) ++k;
  const GeneratorConfig& a = anchors[k - 1];
  const GeneratorConfig& b = anchors[k];
  const double t = static_cast<double>(month.ordinal() - a.month.ordinal()) /
                   static_cast<double>(b.month.ordinal() - a.month.ordinal());
  GeneratorConfig c = a;
  c.average_degree = lerp(a.average_degree, b.average_degree, t);
  c.lambda_in = lerp(a.lambda_in, b.lambda_in, t);
  c.lambda_out = lerp(a.lambda_out, b.lambda_out, t);
  c.couple_share = lerp(a.couple_share, b.couple_share, t);
  c.asset = lerp(a.asset, b.asset, t);
  c.loan = lerp(a.loan, b.loan, t);
  c.credit_line = lerp(a.credit_line, b.credit_line, t);
  c.leverage_sigma = lerp(a.leverage_sigma, b.leverage_sigma, t);
  c.target_debt_to_asset = lerp(a.target_debt_to_asset, b.target_debt_to_asset, t);
  c.listed_probability = lerp(a.listed_probability, b.listed_probability, t);
  if (a.dual_role_share && b.dual_role_share) c.dual_role_share = lerp(*a.dual_role_share, *b.dual_role_share, t);
  c.hub_coupling = lerp(a.hub_coupling, b.hub_coupling, t);
  c.sorted_matching = lerp(a.sorted_matching, b.sorted_matching, t);
  return c;
}

DynamicPlan plan_from(const json& j, std::uint64_t seed) {
  DynamicPlan plan;
  plan.seed = j.value("seed", seed);
  plan.survival_fraction = j.value("survival_fraction", plan.survival_fraction);
  try {
    if (j.contains("months")) {
      for (const auto& m : j.at("months")) plan.months.push_back(config_from(m));
      return plan;
    }
    std::vector<GeneratorConfig> anchors;
    for (const auto& a : j.at("anchors")) {
      if (a.is_string())
        anchors.push_back(preset_config(a.get<std::string>()));
      else
        anchors.push_back(config_from(a));
    }
    if (anchors.empty()) throw ConfigError("dynamic plan needs at least one anchor");
    std::sort(anchors.begin(), anchors.end(),
              [](const GeneratorConfig& a, const GeneratorConfig& b) { return a.month < b.month; });
    std::vector<std::pair<YearMonth, double>> knots;
    for (const auto& k : j.at("node_knots"))
      knots.emplace_back(YearMonth::parse(k.at(0).get<std::string>()), k.at(1).get<double>());
    if (knots.empty()) throw ConfigError("dynamic plan needs node knots");
    const YearMonth start = YearMonth::parse(j.at("start").get<std::string>());
    const YearMonth end = YearMonth::parse(j.at("end").get<std::string>());
    for (YearMonth m = start; m <= end; m = m.plus(1)) {
      GeneratorConfig c = interpolate(anchors, m);
      c.month = m;
      c.label = j.value("name", std::string("dynamic")) + "@" + m.to_string();
      double nodes = knots.front().second;
      for (std::size_t k = 0; k < knots.size(); ++k) {
        if (knots[k].first <= m) nodes = knots[k].second;
        if (k + 1 < knots.size() && knots[k].first <= m && m <= knots[k + 1].first) {
          const double t = static_cast<double>(m.ordinal() - knots[k].first.ordinal()) /
                           static_cast<double>(knots[k + 1].first.ordinal() - knots[k].first.ordinal());
          nodes = lerp(knots[k].second, knots[k + 1].second, t);
          break;
        }
      }
      c.nodes = static_cast<std::size_t>(std::llround(nodes));
      validate(c);
      plan.months.push_back(c);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("dynamic plan: ") + e.what());
  } catch (const ValidationError& e) {
    throw ConfigError(std::string("dynamic plan: ") + e.what());
  }
  return plan;
}

}  // namespace

std::vector<std::string> preset_names() { return {"phase1", "phase2", "phase3", "phase4", "canonical63"}; }

bool is_dynamic_preset(std::string_view name) { return name == "canonical63"; }

GeneratorConfig preset_config(std::string_view name, std::uint64_t seed) {
  const auto text = detail::embedded_preset(name);
  if (!text || is_dynamic_preset(name)) throw ConfigError("unknown snapshot preset '" + std::string(name) + "'");
  GeneratorConfig c = config_from(parse_json(*text));
  c.seed = seed;
  return c;
}

DynamicPlan preset_plan(std::string_view name, std::uint64_t seed) {
  const auto text = detail::embedded_preset(name);
  if (!text) throw ConfigError("unknown preset '" + std::string(name) + "'");
  if (!is_dynamic_preset(name)) {
    DynamicPlan plan;
    plan.months.push_back(preset_config(name, seed));
    plan.seed = seed;
    return plan;
  }
  return plan_from(parse_json(*text), seed);
}

GeneratorConfig generator_config_from_json(std::string_view json_text) {
  return config_from(parse_json(json_text));
}

DynamicPlan dynamic_plan_from_json(std::string_view json_text) { return plan_from(parse_json(json_text), 1); }

}  // namespace gnet
