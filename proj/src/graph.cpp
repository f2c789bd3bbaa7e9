#include "gnet/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>

#include "gnet/error.hpp"

namespace gnet {

YearMonth YearMonth::parse(std::string_view text) {
  auto fail = [&] { return ValidationError("invalid month '" + std::string(text) + "', expected YYYY-MM"); };
  if (text.size() != 7 || text[4] != '-') throw fail();
  YearMonth ym;
  auto r1 = std::from_chars(text.data(), text.data() + 4, ym.year);
  auto r2 = std::from_chars(text.data() + 5, text.data() + 7, ym.month);
  if (r1.ec != std::errc{} || r1.ptr != text.data() + 4 || r2.ec != std::errc{} ||
      r2.ptr != text.data() + 7 || ym.month < 1 || ym.month > 12)
    throw fail();
  return ym;
}

YearMonth YearMonth::from_ordinal(int ordinal) {
  return YearMonth{ordinal / 12, ordinal % 12 + 1};
}

std::string YearMonth::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d", year, month);
  return buf;
}

namespace {

void validate_enterprise(const Enterprise& e) {
  if (e.id.empty()) throw ValidationError("enterprise with empty id");
  if (!(e.asset > 0.0))
    throw ValidationError("enterprise '" + e.id + "': asset must be positive");
  if (!(e.liability >= 0.0) || !(e.loan >= 0.0) || !(e.credit_line >= 0.0))
    throw ValidationError("enterprise '" + e.id + "': liability, loan and credit line must be non-negative");
}

std::string describe(const GuaranteeEdge& e) {
  return e.guarantor_id + "->" + e.debtor_id + " (" + e.month.to_string() + ")";
}

}  // namespace

NetworkSnapshot NetworkSnapshot::build(YearMonth month, std::vector<Enterprise> enterprises,
                                       const std::vector<GuaranteeEdge>& edges) {
  std::sort(enterprises.begin(), enterprises.end(),
            [](const Enterprise& a, const Enterprise& b) { return a.id < b.id; });
  std::unordered_map<std::string_view, NodeIndex> lookup;
  lookup.reserve(enterprises.size());
  for (std::size_t i = 0; i < enterprises.size(); ++i) {
    validate_enterprise(enterprises[i]);
    if (i > 0 && enterprises[i].id == enterprises[i - 1].id)
      throw ValidationError("duplicate enterprise id '" + enterprises[i].id + "'");
    lookup.emplace(enterprises[i].id, static_cast<NodeIndex>(i));
  }

  std::vector<IndexedEdge> indexed;
  indexed.reserve(edges.size());
  for (const auto& e : edges) {
    if (e.guarantor_id == e.debtor_id) throw ValidationError("self-guarantee edge " + describe(e));
    if (!(e.amount >= 0.0)) throw ValidationError("negative guarantee amount on edge " + describe(e));
    if (e.month != month)
      throw ValidationError("edge " + describe(e) + " does not belong to month " + month.to_string());
    auto g = lookup.find(e.guarantor_id);
    auto d = lookup.find(e.debtor_id);
    if (g == lookup.end() || d == lookup.end())
      throw StructuralError("edge " + describe(e) + " references unknown enterprise '" +
                            (g == lookup.end() ? e.guarantor_id : e.debtor_id) + "'");
    indexed.push_back({g->second, d->second, e.amount});
  }
  return from_indexed(month, std::move(enterprises), std::move(indexed));
}

NetworkSnapshot NetworkSnapshot::from_indexed(YearMonth month, std::vector<Enterprise> enterprises,
                                              std::vector<IndexedEdge> edges) {
  NetworkSnapshot s;
  s.month_ = month;
  const std::size_t n = enterprises.size();
  s.index_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    validate_enterprise(enterprises[i]);
    if (i > 0 && !(enterprises[i - 1].id < enterprises[i].id))
      throw ValidationError("enterprise ids must be unique and sorted ('" + enterprises[i].id + "')");
    s.index_.emplace(enterprises[i].id, static_cast<NodeIndex>(i));
  }
  for (const auto& e : edges) {
    if (e.guarantor >= n || e.debtor >= n) throw StructuralError("edge endpoint index out of range");
    if (e.guarantor == e.debtor)
      throw ValidationError("self-guarantee edge on '" + enterprises[e.guarantor].id + "'");
    if (!(e.amount >= 0.0)) throw ValidationError("negative guarantee amount");
  }
  s.nodes_ = std::move(enterprises);

  std::sort(edges.begin(), edges.end(), [](const IndexedEdge& a, const IndexedEdge& b) {
    return a.guarantor != b.guarantor ? a.guarantor < b.guarantor : a.debtor < b.debtor;
  });
  // merge parallel duplicates
  std::vector<IndexedEdge> merged;
  merged.reserve(edges.size());
  for (const auto& e : edges) {
    if (!merged.empty() && merged.back().guarantor == e.guarantor && merged.back().debtor == e.debtor)
      merged.back().amount += e.amount;
    else
      merged.push_back(e);
  }

  s.out_offsets_.assign(n + 1, 0);
  s.in_offsets_.assign(n + 1, 0);
  for (const auto& e : merged) {
    ++s.out_offsets_[e.guarantor + 1];
    ++s.in_offsets_[e.debtor + 1];
  }
  for (std::size_t i = 0; i < n; ++i) {
    s.out_offsets_[i + 1] += s.out_offsets_[i];
    s.in_offsets_[i + 1] += s.in_offsets_[i];
  }
  s.out_arcs_.resize(merged.size());
  s.in_arcs_.resize(merged.size());
  std::vector<std::size_t> out_fill(s.out_offsets_.begin(), s.out_offsets_.end() - 1);
  std::vector<std::size_t> in_fill(s.in_offsets_.begin(), s.in_offsets_.end() - 1);
  // merged is sorted by (guarantor, debtor), so both adjacency lists come out index-sorted
  for (const auto& e : merged) {
    s.out_arcs_[out_fill[e.guarantor]++] = Arc{e.debtor, e.amount};
    s.in_arcs_[in_fill[e.debtor]++] = Arc{e.guarantor, e.amount};
  }
  return s;
}

std::optional<NodeIndex> NetworkSnapshot::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

NodeIndex NetworkSnapshot::index_of(std::string_view id) const {
  auto i = find(id);
  if (!i) throw LookupError("unknown enterprise id '" + std::string(id) + "'");
  return *i;
}

std::optional<double> NetworkSnapshot::arc_amount(NodeIndex guarantor, NodeIndex debtor) const {
  auto arcs = out_arcs(guarantor);
  auto it = std::lower_bound(arcs.begin(), arcs.end(), debtor,
                             [](const Arc& a, NodeIndex v) { return a.node < v; });
  if (it == arcs.end() || it->node != debtor) return std::nullopt;
  return it->amount;
}

std::vector<GuaranteeEdge> NetworkSnapshot::export_edges() const {
  std::vector<GuaranteeEdge> out;
  out.reserve(edge_count());
  for (NodeIndex u = 0; u < node_count(); ++u)
    for (const Arc& a : out_arcs(u)) out.push_back({nodes_[u].id, nodes_[a.node].id, a.amount, month_});
  return out;
}

std::vector<IndexedEdge> NetworkSnapshot::indexed_edges() const {
  std::vector<IndexedEdge> out;
  out.reserve(edge_count());
  for (NodeIndex u = 0; u < node_count(); ++u)
    for (const Arc& a : out_arcs(u)) out.push_back({u, a.node, a.amount});
  return out;
}

NetworkSnapshot build_snapshot(YearMonth month, std::vector<Enterprise> enterprises,
                               const std::vector<GuaranteeEdge>& edges) {
  return NetworkSnapshot::build(month, std::move(enterprises), edges);
}

std::vector<Neighbor> neighbors(const NetworkSnapshot& snapshot, std::string_view id,
                                Direction direction) {
  const NodeIndex i = snapshot.index_of(id);
  auto arcs = direction == Direction::out ? snapshot.out_arcs(i) : snapshot.in_arcs(i);
  std::vector<Neighbor> out;
  out.reserve(arcs.size());
  for (const Arc& a : arcs) out.push_back({snapshot.node(a.node).id, a.amount});
  return out;
}

DynamicNetwork::DynamicNetwork(std::vector<NetworkSnapshot> snapshots) {
  for (auto& s : snapshots) push_back(std::move(s));
}

void DynamicNetwork::push_back(NetworkSnapshot snapshot) {
  if (!snapshots_.empty() && !(snapshots_.back().month() < snapshot.month()))
    throw ValidationError("snapshot months must be strictly increasing (" +
                          snapshots_.back().month().to_string() + " then " +
                          snapshot.month().to_string() + ")");
  snapshots_.push_back(std::move(snapshot));
}

std::vector<PhaseWindow> canonical_phase_windows() {
  return {
      {"phase1", {2007, 1}, {2008, 8}},
      {"phase2", {2008, 9}, {2008, 11}},
      {"phase3", {2008, 12}, {2010, 12}},
      {"phase4", {2011, 1}, {2012, 3}},
  };
}

PhasePartition phase_partition(const DynamicNetwork& dynamic, const std::vector<PhaseWindow>& windows) {
  for (std::size_t i = 0; i < windows.size(); ++i) {
    if (windows[i].end < windows[i].start)
      throw ConfigError("window '" + windows[i].label + "' ends before it starts");
    for (std::size_t j = 0; j < i; ++j)
      if (windows[i].start <= windows[j].end && windows[j].start <= windows[i].end)
        throw ConfigError("windows '" + windows[j].label + "' and '" + windows[i].label + "' overlap");
  }
  PhasePartition part;
  for (const auto& w : windows) part.groups.push_back({w, {}});
  for (std::size_t s = 0; s < dynamic.size(); ++s) {
    const YearMonth m = dynamic[s].month();
    auto it = std::find_if(part.groups.begin(), part.groups.end(),
                           [&](const PhasePartition::Group& g) { return g.window.contains(m); });
    if (it == part.groups.end())
      part.unassigned.push_back(s);
    else
      it->snapshots.push_back(s);
  }
  return part;
}

}  // namespace gnet
