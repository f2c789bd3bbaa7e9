#pragma once

// Topological and financial indicators of a guarantee-network snapshot.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gnet/graph.hpp"
#include "gnet/powerlaw.hpp"

namespace gnet {

struct DegreeStats {
  double average_degree = 0.0;  // E / N
  std::vector<std::size_t> in_histogram;   // in_histogram[k] = #nodes with in-degree k
  std::vector<std::size_t> out_histogram;
  std::size_t max_in = 0;
  std::size_t max_out = 0;
};

/// Throws DomainError on an empty snapshot.
DegreeStats degree_stats(const NetworkSnapshot& g);

std::vector<std::uint64_t> in_degrees(const NetworkSnapshot& g);
std::vector<std::uint64_t> out_degrees(const NetworkSnapshot& g);

/// E / (N (N - 1)). Throws DomainError when N < 2.
double density(const NetworkSnapshot& g);

/// Mean over nodes of (arcs among the node's distinct neighbours) / (k (k - 1)),
/// where k counts distinct in- or out-neighbours; nodes with k < 2 score 0.
double clustering_directed(const NetworkSnapshot& g);
std::vector<double> local_clustering_directed(const NetworkSnapshot& g);

/// Share of nodes that sit in a two-node weak component with arcs both ways.
double reciprocal_couple_ratio(const NetworkSnapshot& g);
double reciprocal_couple_ratio(std::size_t node_count, std::span<const IndexedEdge> edges);

/// Degree-preserving directed rewiring: each successful swap exchanges the
/// debtor endpoints of two uniformly chosen arcs, rejecting self-loops and
/// duplicate arcs. Deterministic for a given seed. Throws DomainError when
/// E < 2 or when the swap budget (100 attempts per requested swap) runs out.
std::vector<IndexedEdge> rewire_preserving_degrees(const NetworkSnapshot& g, std::size_t swaps,
                                                   std::uint64_t seed);

/// reciprocal_couple_ratio of the rewired graph.
double null_model_couple_ratio(const NetworkSnapshot& g, std::size_t swaps, std::uint64_t seed);

struct ComponentSummary {
  std::size_t count = 0;
  std::size_t giant_size = 0;
  double giant_share = 0.0;
  std::vector<std::size_t> sizes;        // descending
  std::vector<std::uint32_t> label;      // weak component of each node
  std::uint32_t giant_label = 0;         // largest; ties go to the component with the lowest node index
};

ComponentSummary components(const NetworkSnapshot& g);

struct PathOptions {
  std::size_t exact_threshold = 20000;  // exact all-pairs BFS up to this giant size
  std::size_t sample_sources = 256;     // BFS sources drawn when sampling
  std::uint64_t seed = 1;
};

struct PathStats {
  double average_path_length = 0.0;
  std::size_t diameter = 0;
  bool estimated = false;  // true when sampled; the diameter is then a lower bound
  std::size_t giant_size = 0;
};

/// Shortest paths on the undirected projection of the giant component.
PathStats giant_path_stats(const NetworkSnapshot& g, const PathOptions& options = {});

/// Fully mutual triples (all 6 arcs) over connected triples of the undirected
/// projection. Zero when there are no connected triples. Throws DomainError when N < 3.
double mutual_triad_ratio(const NetworkSnapshot& g);

struct HubSets {
  std::vector<NodeIndex> guarantor_hubs;  // ascending index
  std::vector<NodeIndex> debtor_hubs;
  double overlap = 0.0;  // |intersection| / |union|
  bool small_sample = false;  // N < 100: the percentile is mostly ties
};

/// Nodes whose out- (in-) degree reaches the degree of the ceil(percentile N)-th
/// ranked node; ties are all included and degree-0 nodes never qualify.
HubSets hubs(const NetworkSnapshot& g, double percentile = 0.01);

struct FinancialAggregates {
  double average_liability = 0.0;
  double average_loan = 0.0;
  double average_credit_line = 0.0;
  double average_debt_to_asset = 0.0;  // mean of per-node L / A
  double listed_ratio = 0.0;
};

FinancialAggregates financial_aggregates(const NetworkSnapshot& g);

struct MetricsOptions {
  XminMode x_min = FixedXmin{1};
  PathOptions paths;
  double hub_percentile = 0.01;
};

struct MetricsReport {
  YearMonth month;
  std::size_t nodes = 0;
  std::size_t edges = 0;
  DegreeStats degrees;
  std::optional<double> density;  // absent when N < 2
  std::optional<PowerLawFit> fit_in;  // absent when the tail is too small to fit
  std::optional<PowerLawFit> fit_out;
  double clustering = 0.0;
  double reciprocity = 0.0;  // reciprocal-couple node share
  std::optional<double> mutual_triad_ratio;  // absent when N < 3
  std::size_t component_count = 0;
  std::size_t giant_size = 0;
  double giant_share = 0.0;
  PathStats paths;
  FinancialAggregates finance;
  HubSets hubs;
};

MetricsReport compute_metrics(const NetworkSnapshot& g, const MetricsOptions& options = {});

/// A named scalar extracted from a report; absent when undefined for the month.
struct ScalarMetric {
  std::string name;
  std::optional<double> value;
};

/// Scalar columns in output order (fixed names, see io.hpp).
std::vector<ScalarMetric> scalar_metrics(const MetricsReport& report);
std::vector<std::string> scalar_metric_names();

struct SummaryStat {
  std::optional<double> mean;
  std::optional<double> sd;  // sample SD; absent with fewer than two values
};

struct MetricsTimeseries {
  std::vector<MetricsReport> reports;  // months that succeeded
  struct MonthError {
    YearMonth month;
    std::string message;
  };
  std::vector<MonthError> errors;
  std::vector<PhaseWindow> windows;
  std::vector<std::string> metric_names;
  /// summary[w][m] for window w and metric m.
  std::vector<std::vector<SummaryStat>> summary;
};

/// One report per snapshot, then per-window mean and sample SD of every scalar
/// metric (mean of the monthly values). Per-month failures are recorded and
/// the remaining months still run. Throws DomainError on an empty dynamic.
MetricsTimeseries metrics_timeseries(const DynamicNetwork& dynamic, const std::vector<PhaseWindow>& windows,
                                     const MetricsOptions& options = {});

SummaryStat summarize(const std::vector<double>& values);

}  // namespace gnet
