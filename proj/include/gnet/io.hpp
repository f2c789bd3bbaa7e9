#pragma once

// CSV/JSON interchange.
//
//   nodes.csv          id,month,asset,liability,loan,credit_line,listed
//   edges.csv          guarantor_id,debtor_id,amount,month
//   metrics_monthly.csv  month,<scalar metrics...>
//   phase_summary.csv  metric,phase1_mean,phase1_sd,...,phase4_sd
//   sim_summary.csv    month,scenario,p,mean_final_ratio,sd,runs
//
// Floating-point output uses 6 significant digits; absent values are empty
// cells. Files are written to a temporary name and renamed into place.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gnet/contagion.hpp"
#include "gnet/graph.hpp"
#include "gnet/metrics.hpp"

namespace gnet::io {

inline constexpr std::string_view kNodesFile = "nodes.csv";
inline constexpr std::string_view kEdgesFile = "edges.csv";
inline constexpr std::string_view kMetricsFile = "metrics_monthly.csv";
inline constexpr std::string_view kPhaseSummaryFile = "phase_summary.csv";
inline constexpr std::string_view kSimSummaryFile = "sim_summary.csv";
inline constexpr std::string_view kSimSummaryJson = "sim_summary.json";

/// "%.6g"
std::string format_number(double value);
std::string format_optional(const std::optional<double>& value);

using NodesByMonth = std::map<YearMonth, std::vector<Enterprise>>;

/// Throws FormatError for a missing column, non-numeric field or duplicate
/// (id, month); ValidationError (with the line number) for asset <= 0 or
/// negative amounts.
NodesByMonth parse_nodes_csv(const std::filesystem::path& path);
NodesByMonth parse_nodes_csv_text(std::string_view text);

/// Throws FormatError for a missing column, malformed field, self-loop or
/// negative amount.
std::vector<GuaranteeEdge> parse_edges_csv(const std::filesystem::path& path);
std::vector<GuaranteeEdge> parse_edges_csv_text(std::string_view text);

/// One snapshot per month present in the node file. Edges dated in a month
/// without nodes raise StructuralError.
DynamicNetwork assemble_dynamic(const NodesByMonth& nodes, const std::vector<GuaranteeEdge>& edges);
/// Reads <dir>/nodes.csv and <dir>/edges.csv.
DynamicNetwork load_dynamic(const std::filesystem::path& dir);

/// Every problem found in the two files, without stopping at the first.
std::vector<std::string> validate_files(const std::filesystem::path& nodes_csv,
                                        const std::filesystem::path& edges_csv);

std::string nodes_csv(const DynamicNetwork& dynamic);
std::string edges_csv(const DynamicNetwork& dynamic);
/// Writes nodes.csv and edges.csv into `dir` (created if missing).
void save_dynamic(const DynamicNetwork& dynamic, const std::filesystem::path& dir);

std::string metrics_csv(const MetricsTimeseries& ts);
std::string phase_summary_csv(const MetricsTimeseries& ts);
std::string sim_summary_csv(const std::vector<SweepRow>& rows);
std::string sim_summary_json(const std::vector<SweepRow>& rows);

/// Write-temp-then-rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

}  // namespace gnet::io
