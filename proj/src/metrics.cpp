#include "gnet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "gnet/error.hpp"
#include "gnet/rng.hpp"

namespace gnet {

namespace {

void require_nonempty(const NetworkSnapshot& g, const char* what) {
  if (g.node_count() == 0) throw DomainError(std::string(what) + ": snapshot has no nodes");
}

// Iterative union-find with path halving.
class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), 0u);
  }
  std::uint32_t find(std::uint32_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
  }
  std::size_t size_of(std::uint32_t x) { return size_[find(x)]; }

 private:
  std::vector<std::uint32_t> parent_;
  std::vector<std::size_t> size_;
};

std::uint64_t arc_key(NodeIndex u, NodeIndex v) { return (std::uint64_t{u} << 32) | v; }

// Sorted, de-duplicated undirected neighbour lists.
std::vector<std::vector<NodeIndex>> undirected_adjacency(const NetworkSnapshot& g) {
  std::vector<std::vector<NodeIndex>> adj(g.node_count());
  for (NodeIndex u = 0; u < g.node_count(); ++u) {
    auto& list = adj[u];
    list.reserve(g.out_degree(u) + g.in_degree(u));
    for (const Arc& a : g.out_arcs(u)) list.push_back(a.node);
    for (const Arc& a : g.in_arcs(u)) list.push_back(a.node);
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return adj;
}

}  // namespace

std::vector<std::uint64_t> in_degrees(const NetworkSnapshot& g) {
  std::vector<std::uint64_t> d(g.node_count());
  for (NodeIndex i = 0; i < g.node_count(); ++i) d[i] = g.in_degree(i);
  return d;
}

std::vector<std::uint64_t> out_degrees(const NetworkSnapshot& g) {
  std::vector<std::uint64_t> d(g.node_count());
  for (NodeIndex i = 0; i < g.node_count(); ++i) d[i] = g.out_degree(i);
  return d;
}

DegreeStats degree_stats(const NetworkSnapshot& g) {
  require_nonempty(g, "degree_stats");
  DegreeStats s;
  const std::size_t n = g.node_count();
  s.average_degree = static_cast<double>(g.edge_count()) / static_cast<double>(n);
  for (NodeIndex i = 0; i < n; ++i) {
    s.max_in = std::max(s.max_in, g.in_degree(i));
    s.max_out = std::max(s.max_out, g.out_degree(i));
  }
  s.in_histogram.assign(s.max_in + 1, 0);
  s.out_histogram.assign(s.max_out + 1, 0);
  for (NodeIndex i = 0; i < n; ++i) {
    ++s.in_histogram[g.in_degree(i)];
    ++s.out_histogram[g.out_degree(i)];
  }
  return s;
}

double density(const NetworkSnapshot& g) {
  const double n = static_cast<double>(g.node_count());
  if (g.node_count() < 2) throw DomainError("density needs at least two nodes");
  return static_cast<double>(g.edge_count()) / (n * (n - 1.0));
}

std::vector<double> local_clustering_directed(const NetworkSnapshot& g) {
  const std::size_t n = g.node_count();
  std::vector<double> c(n, 0.0);
  std::vector<std::uint32_t> mark(n, 0);
  std::vector<NodeIndex> hood;
  for (NodeIndex i = 0; i < n; ++i) {
    const std::uint32_t stamp = i + 1;
    hood.clear();
    auto visit = [&](NodeIndex v) {
      if (mark[v] != stamp) {
        mark[v] = stamp;
        hood.push_back(v);
      }
    };
    for (const Arc& a : g.out_arcs(i)) visit(a.node);
    for (const Arc& a : g.in_arcs(i)) visit(a.node);
    const std::size_t k = hood.size();
    if (k < 2) continue;
    std::size_t arcs = 0;
    for (NodeIndex j : hood)
      for (const Arc& a : g.out_arcs(j))
        if (mark[a.node] == stamp) ++arcs;
    c[i] = static_cast<double>(arcs) / (static_cast<double>(k) * static_cast<double>(k - 1));
  }
  return c;
}

double clustering_directed(const NetworkSnapshot& g) {
  require_nonempty(g, "clustering_directed");
  const auto c = local_clustering_directed(g);
  return std::accumulate(c.begin(), c.end(), 0.0) / static_cast<double>(c.size());
}

double reciprocal_couple_ratio(std::size_t node_count, std::span<const IndexedEdge> edges) {
  if (node_count == 0) return 0.0;
  DisjointSets sets(node_count);
  for (const auto& e : edges) sets.unite(e.guarantor, e.debtor);
  // arcs inside each two-node component; edges carry no duplicates or self-loops
  std::vector<std::uint8_t> arcs_in_pair(node_count, 0);
  for (const auto& e : edges) {
    const std::uint32_t root = sets.find(e.guarantor);
    if (sets.size_of(root) == 2 && arcs_in_pair[root] < 2) ++arcs_in_pair[root];
  }
  std::size_t couple_nodes = 0;
  for (std::uint32_t v = 0; v < node_count; ++v)
    if (sets.find(v) == v && arcs_in_pair[v] == 2) couple_nodes += 2;
  return static_cast<double>(couple_nodes) / static_cast<double>(node_count);
}

double reciprocal_couple_ratio(const NetworkSnapshot& g) {
  const auto edges = g.indexed_edges();
  return reciprocal_couple_ratio(g.node_count(), edges);
}

std::vector<IndexedEdge> rewire_preserving_degrees(const NetworkSnapshot& g, std::size_t swaps,
                                                   std::uint64_t seed) {
  if (g.edge_count() < 2) throw DomainError("rewiring needs at least two edges");
  std::vector<IndexedEdge> edges = g.indexed_edges();
  if (swaps == 0) return edges;

  std::unordered_set<std::uint64_t> present;
  present.reserve(edges.size() * 2);
  for (const auto& e : edges) present.insert(arc_key(e.guarantor, e.debtor));

  Rng rng(derive_seed(seed, {0x5eed}));
  const std::size_t max_attempts = 100 * swaps + 100;
  std::size_t done = 0;
  for (std::size_t attempt = 0; done < swaps; ++attempt) {
    if (attempt >= max_attempts)
      throw DomainError("rewiring stalled: " + std::to_string(done) + " of " + std::to_string(swaps) +
                        " swaps after " + std::to_string(max_attempts) + " attempts");
    const auto i = uniform_index(rng, edges.size());
    const auto j = uniform_index(rng, edges.size());
    auto& e1 = edges[i];
    auto& e2 = edges[j];
    const NodeIndex a = e1.guarantor, b = e1.debtor, c = e2.guarantor, d = e2.debtor;
    if (i == j || b == d || a == c || a == d || c == b) continue;
    if (present.contains(arc_key(a, d)) || present.contains(arc_key(c, b))) continue;
    present.erase(arc_key(a, b));
    present.erase(arc_key(c, d));
    present.insert(arc_key(a, d));
    present.insert(arc_key(c, b));
    e1.debtor = d;
    e2.debtor = b;
    ++done;
  }
  return edges;
}

double null_model_couple_ratio(const NetworkSnapshot& g, std::size_t swaps, std::uint64_t seed) {
  const auto edges = rewire_preserving_degrees(g, swaps, seed);
  return reciprocal_couple_ratio(g.node_count(), edges);
}

ComponentSummary components(const NetworkSnapshot& g) {
  const std::size_t n = g.node_count();
  ComponentSummary out;
  constexpr std::uint32_t kUnset = UINT32_MAX;
  out.label.assign(n, kUnset);
  std::vector<std::size_t> size_by_label;
  std::vector<NodeIndex> stack;
  for (NodeIndex s = 0; s < n; ++s) {
    if (out.label[s] != kUnset) continue;
    const auto lbl = static_cast<std::uint32_t>(size_by_label.size());
    std::size_t size = 0;
    out.label[s] = lbl;
    stack.push_back(s);
    while (!stack.empty()) {
      const NodeIndex u = stack.back();
      stack.pop_back();
      ++size;
      auto push = [&](const Arc& a) {
        if (out.label[a.node] == kUnset) {
          out.label[a.node] = lbl;
          stack.push_back(a.node);
        }
      };
      for (const Arc& a : g.out_arcs(u)) push(a);
      for (const Arc& a : g.in_arcs(u)) push(a);
    }
    size_by_label.push_back(size);
  }
  out.count = size_by_label.size();
  for (std::uint32_t l = 0; l < size_by_label.size(); ++l)
    if (size_by_label[l] > out.giant_size) {
      out.giant_size = size_by_label[l];
      out.giant_label = l;
    }
  out.giant_share = n ? static_cast<double>(out.giant_size) / static_cast<double>(n) : 0.0;
  out.sizes = size_by_label;
  std::sort(out.sizes.begin(), out.sizes.end(), std::greater<>());
  return out;
}

PathStats giant_path_stats(const NetworkSnapshot& g, const PathOptions& options) {
  require_nonempty(g, "giant_path_stats");
  const ComponentSummary comps = components(g);
  const std::size_t n = g.node_count();

  // Compact undirected CSR over the giant component.
  std::vector<NodeIndex> members;
  std::vector<std::uint32_t> local(n, UINT32_MAX);
  for (NodeIndex v = 0; v < n; ++v)
    if (comps.label[v] == comps.giant_label) {
      local[v] = static_cast<std::uint32_t>(members.size());
      members.push_back(v);
    }
  const std::size_t m = members.size();
  if (m == 0) throw DomainError("giant component is empty");
  std::vector<std::size_t> offsets(m + 1, 0);
  std::vector<std::uint32_t> adj;
  for (std::size_t i = 0; i < m; ++i) {
    for (const Arc& a : g.out_arcs(members[i])) adj.push_back(local[a.node]);
    for (const Arc& a : g.in_arcs(members[i])) adj.push_back(local[a.node]);
    offsets[i + 1] = adj.size();
  }

  PathStats stats;
  stats.giant_size = m;
  if (m == 1) return stats;

  std::vector<std::uint32_t> dist(m);
  std::vector<std::uint32_t> queue(m);
  // Returns (sum of distances, eccentricity, farthest node).
  auto bfs = [&](std::uint32_t source) {
    std::fill(dist.begin(), dist.end(), UINT32_MAX);
    std::size_t head = 0, tail = 0;
    dist[source] = 0;
    queue[tail++] = source;
    std::uint64_t sum = 0;
    while (head < tail) {
      const std::uint32_t u = queue[head++];
      sum += dist[u];
      for (std::size_t k = offsets[u]; k < offsets[u + 1]; ++k) {
        const std::uint32_t v = adj[k];
        if (dist[v] == UINT32_MAX) {
          dist[v] = dist[u] + 1;
          queue[tail++] = v;
        }
      }
    }
    const std::uint32_t far = queue[tail - 1];
    return std::tuple{sum, static_cast<std::size_t>(dist[far]), far};
  };

  const bool exact = m <= options.exact_threshold || options.sample_sources >= m;
  long double total = 0.0L;
  std::size_t sources = 0;
  if (exact) {
    for (std::uint32_t s = 0; s < m; ++s) {
      auto [sum, ecc, far] = bfs(s);
      total += static_cast<long double>(sum);
      stats.diameter = std::max(stats.diameter, ecc);
    }
    sources = m;
  } else {
    Rng rng(derive_seed(options.seed, {0xb75}));
    // distinct sources by partial Fisher-Yates
    std::vector<std::uint32_t> order(m);
    std::iota(order.begin(), order.end(), 0u);
    const std::size_t k = std::max<std::size_t>(1, options.sample_sources);
    std::uint32_t farthest = 0;
    std::size_t best_ecc = 0;
    for (std::size_t i = 0; i < k; ++i) {
      std::swap(order[i], order[i + uniform_index(rng, m - i)]);
      auto [sum, ecc, far] = bfs(order[i]);
      total += static_cast<long double>(sum);
      if (ecc > best_ecc) {
        best_ecc = ecc;
        farthest = far;
      }
    }
    // one extra sweep from the farthest node found tightens the lower bound
    auto [sum, ecc, far] = bfs(farthest);
    (void)sum;
    (void)far;
    stats.diameter = std::max(best_ecc, ecc);
    stats.estimated = true;
    sources = k;
  }
  stats.average_path_length =
      static_cast<double>(total / (static_cast<long double>(sources) * static_cast<long double>(m - 1)));
  return stats;
}

double mutual_triad_ratio(const NetworkSnapshot& g) {
  const std::size_t n = g.node_count();
  if (n < 3) throw DomainError("mutual_triad_ratio needs at least three nodes");
  const auto adj = undirected_adjacency(g);
  long double wedges = 0.0L;
  for (const auto& list : adj) {
    const long double k = static_cast<long double>(list.size());
    wedges += k * (k - 1.0L) / 2.0L;
  }
  std::uint64_t triangles = 0, mutual = 0;
  std::vector<std::uint32_t> mark(n, UINT32_MAX);
  auto is_mutual = [&](NodeIndex a, NodeIndex b) { return g.has_arc(a, b) && g.has_arc(b, a); };
  for (NodeIndex u = 0; u < n; ++u) {
    for (NodeIndex w : adj[u]) mark[w] = u;
    for (NodeIndex v : adj[u]) {
      if (v <= u) continue;
      for (NodeIndex w : adj[v]) {
        if (w <= v || mark[w] != u) continue;
        ++triangles;
        if (is_mutual(u, v) && is_mutual(v, w) && is_mutual(u, w)) ++mutual;
      }
    }
  }
  // each triangle closes three wedges but is a single connected triple
  const long double connected = wedges - 2.0L * static_cast<long double>(triangles);
  if (connected <= 0.0L) return 0.0;
  return static_cast<double>(static_cast<long double>(mutual) / connected);
}

namespace {

std::size_t hub_rank(std::size_t n, double percentile) {
  const double r = std::ceil(percentile * static_cast<double>(n) - 1e-9);
  return std::clamp<std::size_t>(static_cast<std::size_t>(std::max(r, 1.0)), 1, n);
}

std::vector<NodeIndex> top_by_degree(const std::vector<std::uint64_t>& deg, std::size_t rank) {
  std::vector<std::uint64_t> sorted(deg);
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(rank - 1), sorted.end(),
                   std::greater<>());
  const std::uint64_t threshold = std::max<std::uint64_t>(sorted[rank - 1], 1);
  std::vector<NodeIndex> hubs;
  for (NodeIndex i = 0; i < deg.size(); ++i)
    if (deg[i] >= threshold) hubs.push_back(i);
  return hubs;
}

}  // namespace

HubSets hubs(const NetworkSnapshot& g, double percentile) {
  if (!(percentile > 0.0 && percentile <= 1.0)) throw DomainError("hub percentile must lie in (0, 1]");
  HubSets h;
  const std::size_t n = g.node_count();
  h.small_sample = n < 100;
  if (n == 0) return h;
  const std::size_t rank = hub_rank(n, percentile);
  h.guarantor_hubs = top_by_degree(out_degrees(g), rank);
  h.debtor_hubs = top_by_degree(in_degrees(g), rank);
  std::vector<NodeIndex> both;
  std::set_intersection(h.guarantor_hubs.begin(), h.guarantor_hubs.end(), h.debtor_hubs.begin(),
                        h.debtor_hubs.end(), std::back_inserter(both));
  const std::size_t uni = h.guarantor_hubs.size() + h.debtor_hubs.size() - both.size();
  h.overlap = uni ? static_cast<double>(both.size()) / static_cast<double>(uni) : 0.0;
  return h;
}

FinancialAggregates financial_aggregates(const NetworkSnapshot& g) {
  FinancialAggregates f;
  const std::size_t n = g.node_count();
  if (n == 0) return f;
  std::size_t listed = 0;
  for (const Enterprise& e : g.nodes()) {
    f.average_liability += e.liability;
    f.average_loan += e.loan;
    f.average_credit_line += e.credit_line;
    f.average_debt_to_asset += e.liability / e.asset;
    listed += e.listed ? 1 : 0;
  }
  const double dn = static_cast<double>(n);
  f.average_liability /= dn;
  f.average_loan /= dn;
  f.average_credit_line /= dn;
  f.average_debt_to_asset /= dn;
  f.listed_ratio = static_cast<double>(listed) / dn;
  return f;
}

MetricsReport compute_metrics(const NetworkSnapshot& g, const MetricsOptions& options) {
  MetricsReport r;
  r.month = g.month();
  r.nodes = g.node_count();
  r.edges = g.edge_count();
  r.degrees = degree_stats(g);
  if (r.nodes >= 2) r.density = density(g);
  auto try_fit = [&](const std::vector<std::uint64_t>& d) -> std::optional<PowerLawFit> {
    try {
      return powerlaw_fit(d, options.x_min);
    } catch (const FitError&) {
      return std::nullopt;
    }
  };
  r.fit_in = try_fit(in_degrees(g));
  r.fit_out = try_fit(out_degrees(g));
  r.clustering = clustering_directed(g);
  r.reciprocity = reciprocal_couple_ratio(g);
  if (r.nodes >= 3) r.mutual_triad_ratio = mutual_triad_ratio(g);
  const ComponentSummary comps = components(g);
  r.component_count = comps.count;
  r.giant_size = comps.giant_size;
  r.giant_share = comps.giant_share;
  r.paths = giant_path_stats(g, options.paths);
  r.finance = financial_aggregates(g);
  r.hubs = hubs(g, options.hub_percentile);
  return r;
}

std::vector<std::string> scalar_metric_names() {
  return {"nodes",         "edges",           "avg_degree",        "density",
          "lambda_in",     "lambda_out",      "clustering",        "reciprocity",
          "mutual_triad_ratio", "giant_size", "giant_share",       "component_count",
          "avg_path_length", "diameter",      "avg_liability",     "avg_loan",
          "avg_credit_line", "avg_debt_to_asset", "listed_ratio",  "hub_overlap"};
}

std::vector<ScalarMetric> scalar_metrics(const MetricsReport& r) {
  auto fit = [](const std::optional<PowerLawFit>& f) -> std::optional<double> {
    return f ? std::optional<double>(f->exponent) : std::nullopt;
  };
  const std::vector<std::optional<double>> values = {
      static_cast<double>(r.nodes),
      static_cast<double>(r.edges),
      r.degrees.average_degree,
      r.density,
      fit(r.fit_in),
      fit(r.fit_out),
      r.clustering,
      r.reciprocity,
      r.mutual_triad_ratio,
      static_cast<double>(r.giant_size),
      r.giant_share,
      static_cast<double>(r.component_count),
      r.paths.average_path_length,
      static_cast<double>(r.paths.diameter),
      r.finance.average_liability,
      r.finance.average_loan,
      r.finance.average_credit_line,
      r.finance.average_debt_to_asset,
      r.finance.listed_ratio,
      r.hubs.overlap,
  };
  const auto names = scalar_metric_names();
  std::vector<ScalarMetric> out;
  out.reserve(names.size());
  for (std::size_t i = 0; i < names.size(); ++i) out.push_back({names[i], values[i]});
  return out;
}

SummaryStat summarize(const std::vector<double>& values) {
  SummaryStat s;
  if (values.empty()) return s;
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  s.mean = mean;
  if (values.size() >= 2) {
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    s.sd = std::sqrt(ss / (n - 1.0));
  }
  return s;
}

MetricsTimeseries metrics_timeseries(const DynamicNetwork& dynamic, const std::vector<PhaseWindow>& windows,
                                     const MetricsOptions& options) {
  if (dynamic.empty()) throw DomainError("metrics_timeseries: no snapshots");
  const PhasePartition partition = phase_partition(dynamic, windows);

  MetricsTimeseries ts;
  ts.windows = windows;
  ts.metric_names = scalar_metric_names();
  std::vector<std::optional<std::size_t>> report_of(dynamic.size());
  for (std::size_t s = 0; s < dynamic.size(); ++s) {
    try {
      ts.reports.push_back(compute_metrics(dynamic[s], options));
      report_of[s] = ts.reports.size() - 1;
    } catch (const Error& e) {
      ts.errors.push_back({dynamic[s].month(), e.what()});
    }
  }

  for (const auto& group : partition.groups) {
    std::vector<std::vector<double>> columns(ts.metric_names.size());
    for (std::size_t s : group.snapshots) {
      if (!report_of[s]) continue;
      const auto scalars = scalar_metrics(ts.reports[*report_of[s]]);
      for (std::size_t m = 0; m < scalars.size(); ++m)
        if (scalars[m].value) columns[m].push_back(*scalars[m].value);
    }
    std::vector<SummaryStat> row;
    for (const auto& col : columns) row.push_back(summarize(col));
    ts.summary.push_back(std::move(row));
  }
  return ts;
}

}  // namespace gnet
