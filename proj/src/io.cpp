#include "gnet/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "gnet/error.hpp"

namespace gnet::io {

std::string format_number(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  return buf;
}

std::string format_optional(const std::optional<double>& value) {
  return value ? format_number(*value) : std::string();
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path.string() + "'", 0);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

// Minimal CSV table: header + rows, blank lines skipped.
class CsvTable {
 public:
  CsvTable(std::string_view text, std::vector<std::string_view> required) {
    std::size_t pos = 0, line_no = 0;
    bool have_header = false;
    while (pos < text.size()) {
      auto nl = text.find('\n', pos);
      if (nl == std::string_view::npos) nl = text.size();
      const std::string_view line = trim(text.substr(pos, nl - pos));
      pos = nl + 1;
      ++line_no;
      if (line.empty()) continue;
      if (!have_header) {
        header_ = split(line);
        have_header = true;
        continue;
      }
      rows_.push_back({line_no, split(line)});
    }
    if (!have_header) throw FormatError("missing header row", 0);
    for (auto name : required) {
      auto it = std::find(header_.begin(), header_.end(), name);
      if (it == header_.end()) throw FormatError("missing column '" + std::string(name) + "'", 1);
      columns_.push_back(static_cast<std::size_t>(it - header_.begin()));
    }
  }

  struct Row {
    std::size_t line;
    std::vector<std::string_view> fields;
  };
  const std::vector<Row>& rows() const { return rows_; }

  /// Field for the i-th required column.
  std::string_view field(const Row& row, std::size_t i) const {
    const std::size_t c = columns_[i];
    if (c >= row.fields.size()) throw FormatError("row has too few fields", row.line);
    return row.fields[c];
  }

 private:
  std::vector<std::string_view> header_;
  std::vector<std::size_t> columns_;
  std::vector<Row> rows_;
};

double parse_double(std::string_view s, std::string_view column, std::size_t line) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto r = std::from_chars(s.data(), end, v);
  if (s.empty() || r.ec != std::errc{} || r.ptr != end || !std::isfinite(v))
    throw FormatError("non-numeric " + std::string(column) + " '" + std::string(s) + "'", line);
  return v;
}

YearMonth parse_month(std::string_view s, std::size_t line) {
  try {
    return YearMonth::parse(s);
  } catch (const ValidationError& e) {
    throw FormatError(e.what(), line);
  }
}

std::string at_line(const std::string& what, std::size_t line) {
  return what + " (line " + std::to_string(line) + ")";
}

const std::vector<std::string_view> kNodeColumns = {"id", "month", "asset", "liability", "loan", "credit_line", "listed"};
const std::vector<std::string_view> kEdgeColumns = {"guarantor_id", "debtor_id", "amount", "month"};

// Parses one node row; may throw FormatError / ValidationError.
std::pair<YearMonth, Enterprise> node_row(const CsvTable& t, const CsvTable::Row& row) {
  Enterprise e;
  e.id = std::string(t.field(row, 0));
  if (e.id.empty()) throw FormatError("empty id", row.line);
  const YearMonth month = parse_month(t.field(row, 1), row.line);
  e.asset = parse_double(t.field(row, 2), "asset", row.line);
  e.liability = parse_double(t.field(row, 3), "liability", row.line);
  e.loan = parse_double(t.field(row, 4), "loan", row.line);
  e.credit_line = parse_double(t.field(row, 5), "credit_line", row.line);
  const auto listed = t.field(row, 6);
  if (listed != "0" && listed != "1") throw FormatError("listed must be 0 or 1", row.line);
  e.listed = listed == "1";
  if (!(e.asset > 0.0)) throw ValidationError(at_line("enterprise '" + e.id + "': asset must be positive", row.line));
  if (e.liability < 0.0 || e.loan < 0.0 || e.credit_line < 0.0)
    throw ValidationError(at_line("enterprise '" + e.id + "': negative liability, loan or credit line", row.line));
  return {month, std::move(e)};
}

GuaranteeEdge edge_row(const CsvTable& t, const CsvTable::Row& row) {
  GuaranteeEdge e;
  e.guarantor_id = std::string(t.field(row, 0));
  e.debtor_id = std::string(t.field(row, 1));
  if (e.guarantor_id.empty() || e.debtor_id.empty()) throw FormatError("empty enterprise id", row.line);
  e.amount = parse_double(t.field(row, 2), "amount", row.line);
  e.month = parse_month(t.field(row, 3), row.line);
  if (e.guarantor_id == e.debtor_id) throw FormatError("self-guarantee by '" + e.guarantor_id + "'", row.line);
  if (e.amount < 0.0) throw FormatError("negative guarantee amount", row.line);
  return e;
}

}  // namespace

NodesByMonth parse_nodes_csv_text(std::string_view text) {
  CsvTable t(text, kNodeColumns);
  NodesByMonth out;
  std::set<std::pair<YearMonth, std::string>> seen;
  for (const auto& row : t.rows()) {
    auto [month, e] = node_row(t, row);
    if (!seen.emplace(month, e.id).second)
      throw FormatError("duplicate enterprise '" + e.id + "' in " + month.to_string(), row.line);
    out[month].push_back(std::move(e));
  }
  return out;
}

NodesByMonth parse_nodes_csv(const std::filesystem::path& path) { return parse_nodes_csv_text(read_file(path)); }

std::vector<GuaranteeEdge> parse_edges_csv_text(std::string_view text) {
  CsvTable t(text, kEdgeColumns);
  std::vector<GuaranteeEdge> out;
  out.reserve(t.rows().size());
  for (const auto& row : t.rows()) out.push_back(edge_row(t, row));
  return out;
}

std::vector<GuaranteeEdge> parse_edges_csv(const std::filesystem::path& path) {
  return parse_edges_csv_text(read_file(path));
}

DynamicNetwork assemble_dynamic(const NodesByMonth& nodes, const std::vector<GuaranteeEdge>& edges) {
  std::map<YearMonth, std::vector<GuaranteeEdge>> by_month;
  for (const auto& e : edges) {
    if (!nodes.contains(e.month))
      throw StructuralError("edge " + e.guarantor_id + "->" + e.debtor_id + " dated " + e.month.to_string() +
                            " has no node records for that month");
    by_month[e.month].push_back(e);
  }
  DynamicNetwork dynamic;
  for (const auto& [month, list] : nodes) {
    static const std::vector<GuaranteeEdge> kNone;
    auto it = by_month.find(month);
    dynamic.push_back(build_snapshot(month, list, it == by_month.end() ? kNone : it->second));
  }
  return dynamic;
}

DynamicNetwork load_dynamic(const std::filesystem::path& dir) {
  return assemble_dynamic(parse_nodes_csv(dir / kNodesFile), parse_edges_csv(dir / kEdgesFile));
}

std::vector<std::string> validate_files(const std::filesystem::path& nodes_csv,
                                        const std::filesystem::path& edges_csv) {
  std::vector<std::string> problems;
  std::map<YearMonth, std::vector<Enterprise>> nodes;
  std::set<std::pair<YearMonth, std::string>> seen;
  try {
    const std::string text = read_file(nodes_csv);
    CsvTable t(text, kNodeColumns);
    for (const auto& row : t.rows()) {
      try {
        auto [month, e] = node_row(t, row);
        if (!seen.emplace(month, e.id).second)
          throw FormatError("duplicate enterprise '" + e.id + "' in " + month.to_string(), row.line);
        nodes[month].push_back(std::move(e));
      } catch (const Error& err) {
        problems.push_back(nodes_csv.filename().string() + ": " + err.what());
      }
    }
  } catch (const Error& err) {
    problems.push_back(nodes_csv.filename().string() + ": " + err.what());
  }
  try {
    const std::string text = read_file(edges_csv);
    CsvTable t(text, kEdgeColumns);
    for (const auto& row : t.rows()) {
      try {
        const GuaranteeEdge e = edge_row(t, row);
        for (const auto& id : {e.guarantor_id, e.debtor_id})
          if (!seen.contains({e.month, id}))
            throw StructuralError(at_line("edge " + e.guarantor_id + "->" + e.debtor_id + " references unknown enterprise '" +
                                              id + "' in " + e.month.to_string(),
                                          row.line));
      } catch (const Error& err) {
        problems.push_back(edges_csv.filename().string() + ": " + err.what());
      }
    }
  } catch (const Error& err) {
    problems.push_back(edges_csv.filename().string() + ": " + err.what());
  }
  return problems;
}

std::string nodes_csv(const DynamicNetwork& dynamic) {
  std::string out = "id,month,asset,liability,loan,credit_line,listed\n";
  char buf[64];
  for (const auto& g : dynamic) {
    const std::string month = g.month().to_string();
    for (const Enterprise& e : g.nodes()) {
      out += e.id;
      out += ',';
      out += month;
      for (double v : {e.asset, e.liability, e.loan, e.credit_line}) {
        // full precision so that re-ingest reproduces the snapshot exactly
        std::snprintf(buf, sizeof buf, ",%.17g", v);
        out += buf;
      }
      out += e.listed ? ",1\n" : ",0\n";
    }
  }
  return out;
}

std::string edges_csv(const DynamicNetwork& dynamic) {
  std::string out = "guarantor_id,debtor_id,amount,month\n";
  char buf[64];
  for (const auto& g : dynamic) {
    const std::string month = g.month().to_string();
    for (NodeIndex u = 0; u < g.node_count(); ++u)
      for (const Arc& a : g.out_arcs(u)) {
        out += g.node(u).id;
        out += ',';
        out += g.node(a.node).id;
        std::snprintf(buf, sizeof buf, ",%.17g,", a.amount);
        out += buf;
        out += month;
        out += '\n';
      }
  }
  return out;
}

void save_dynamic(const DynamicNetwork& dynamic, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / kNodesFile, nodes_csv(dynamic));
  write_file_atomic(dir / kEdgesFile, edges_csv(dynamic));
}

std::string metrics_csv(const MetricsTimeseries& ts) {
  std::string out = "month";
  for (const auto& name : ts.metric_names) out += "," + name;
  out += '\n';
  for (const auto& r : ts.reports) {
    out += r.month.to_string();
    for (const auto& m : scalar_metrics(r)) out += "," + format_optional(m.value);
    out += '\n';
  }
  return out;
}

std::string phase_summary_csv(const MetricsTimeseries& ts) {
  std::string out = "metric";
  for (const auto& w : ts.windows) out += "," + w.label + "_mean," + w.label + "_sd";
  out += '\n';
  for (std::size_t m = 0; m < ts.metric_names.size(); ++m) {
    out += ts.metric_names[m];
    for (std::size_t w = 0; w < ts.windows.size(); ++w)
      out += "," + format_optional(ts.summary[w][m].mean) + "," + format_optional(ts.summary[w][m].sd);
    out += '\n';
  }
  return out;
}

std::string sim_summary_csv(const std::vector<SweepRow>& rows) {
  std::string out = "month,scenario,p,mean_final_ratio,sd,runs\n";
  for (const auto& row : rows) {
    if (!row.summary) continue;
    out += row.month.to_string() + "," + std::string(to_string(row.scenario)) + "," +
           format_number(row.seed_fraction) + "," + format_number(row.summary->mean_final_ratio) + "," +
           format_optional(row.summary->sd) + "," + std::to_string(row.summary->runs) + "\n";
  }
  return out;
}

std::string sim_summary_json(const std::vector<SweepRow>& rows) {
  using nlohmann::ordered_json;
  auto number = [](double v) { return ordered_json(std::stod(format_number(v))); };
  auto optional = [&](const std::optional<double>& v) { return v ? number(*v) : ordered_json(nullptr); };
  ordered_json arr = ordered_json::array();
  for (const auto& row : rows) {
    ordered_json j;
    j["month"] = row.month.to_string();
    j["scenario"] = std::string(to_string(row.scenario));
    j["p"] = number(row.seed_fraction);
    if (row.summary) {
      j["seeds"] = row.summary->seeds;
      j["runs"] = row.summary->runs;
      j["mean_final_ratio"] = number(row.summary->mean_final_ratio);
      j["sd"] = optional(row.summary->sd);
      j["mean_net_ratio"] = number(row.summary->mean_net_ratio);
      j["sd_net"] = optional(row.summary->sd_net);
    } else {
      j["error"] = row.error;
    }
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

}  // namespace gnet::io
