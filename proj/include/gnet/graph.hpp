#pragma once

// Directed guarantee network: one immutable snapshot per month.
//
// An arc goes from the guarantor to the debtor. Amounts are in ten-thousand
// RMB. Nodes are stored in ascending id order, so node indices double as the
// deterministic "id order" used for tie-breaking elsewhere.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace gnet {

using NodeIndex = std::uint32_t;

/// Calendar month, encoded as "YYYY-MM".
struct YearMonth {
  int year = 1970;
  int month = 1;  // 1..12

  static YearMonth parse(std::string_view text);
  static YearMonth from_ordinal(int ordinal);

  std::string to_string() const;
  /// Months since year 0; consecutive months differ by one.
  int ordinal() const { return year * 12 + (month - 1); }
  YearMonth plus(int months) const { return from_ordinal(ordinal() + months); }

  friend bool operator==(const YearMonth&, const YearMonth&) = default;
  friend auto operator<=>(const YearMonth& a, const YearMonth& b) {
    return a.ordinal() <=> b.ordinal();
  }
};

struct Enterprise {
  std::string id;
  double asset = 1.0;
  double liability = 0.0;
  double loan = 0.0;
  double credit_line = 0.0;
  bool listed = false;
  bool defaulted = false;

  friend bool operator==(const Enterprise&, const Enterprise&) = default;
};

struct GuaranteeEdge {
  std::string guarantor_id;
  std::string debtor_id;
  double amount = 0.0;
  YearMonth month;

  friend bool operator==(const GuaranteeEdge&, const GuaranteeEdge&) = default;
};

/// One endpoint of an adjacency entry.
struct Arc {
  NodeIndex node;
  double amount;

  friend bool operator==(const Arc&, const Arc&) = default;
};

/// Index-based arc used by generators and rewiring.
struct IndexedEdge {
  NodeIndex guarantor;
  NodeIndex debtor;
  double amount = 0.0;
};

enum class Direction { out, in };

class NetworkSnapshot {
 public:
  NetworkSnapshot() = default;

  /// Validates and builds a snapshot. Duplicate (guarantor, debtor) pairs are
  /// merged by summing amounts; isolated nodes are kept.
  static NetworkSnapshot build(YearMonth month, std::vector<Enterprise> enterprises,
                               const std::vector<GuaranteeEdge>& edges);

  /// Same contract as build() for callers that already hold node indices.
  /// `enterprises` must be sorted by id.
  static NetworkSnapshot from_indexed(YearMonth month, std::vector<Enterprise> enterprises,
                                      std::vector<IndexedEdge> edges);

  YearMonth month() const { return month_; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return out_arcs_.size(); }

  std::span<const Enterprise> nodes() const { return nodes_; }
  const Enterprise& node(NodeIndex i) const { return nodes_[i]; }

  std::optional<NodeIndex> find(std::string_view id) const;
  /// Throws LookupError for unknown ids.
  NodeIndex index_of(std::string_view id) const;

  /// Debtors guaranteed by `i`, sorted by index.
  std::span<const Arc> out_arcs(NodeIndex i) const {
    return {out_arcs_.data() + out_offsets_[i], out_arcs_.data() + out_offsets_[i + 1]};
  }
  /// Guarantors of `i`, sorted by index.
  std::span<const Arc> in_arcs(NodeIndex i) const {
    return {in_arcs_.data() + in_offsets_[i], in_arcs_.data() + in_offsets_[i + 1]};
  }
  std::size_t out_degree(NodeIndex i) const { return out_offsets_[i + 1] - out_offsets_[i]; }
  std::size_t in_degree(NodeIndex i) const { return in_offsets_[i + 1] - in_offsets_[i]; }

  std::optional<double> arc_amount(NodeIndex guarantor, NodeIndex debtor) const;
  bool has_arc(NodeIndex guarantor, NodeIndex debtor) const {
    return arc_amount(guarantor, debtor).has_value();
  }

  /// Edge list in (guarantor, debtor) index order.
  std::vector<GuaranteeEdge> export_edges() const;
  std::vector<IndexedEdge> indexed_edges() const;

  friend bool operator==(const NetworkSnapshot& a, const NetworkSnapshot& b) {
    return a.month_ == b.month_ && a.nodes_ == b.nodes_ && a.out_offsets_ == b.out_offsets_ &&
           a.out_arcs_ == b.out_arcs_;
  }

 private:
  YearMonth month_;
  std::vector<Enterprise> nodes_;
  std::unordered_map<std::string, NodeIndex> index_;
  std::vector<std::size_t> out_offsets_{0};
  std::vector<Arc> out_arcs_;
  std::vector<std::size_t> in_offsets_{0};
  std::vector<Arc> in_arcs_;
};

/// Free-function spelling of NetworkSnapshot::build.
NetworkSnapshot build_snapshot(YearMonth month, std::vector<Enterprise> enterprises,
                               const std::vector<GuaranteeEdge>& edges);

struct Neighbor {
  std::string id;
  double amount;
  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// out: debtors guaranteed by `id`; in: guarantors of `id`.
std::vector<Neighbor> neighbors(const NetworkSnapshot& snapshot, std::string_view id,
                                Direction direction);

/// Month-ordered sequence of snapshots.
class DynamicNetwork {
 public:
  DynamicNetwork() = default;
  explicit DynamicNetwork(std::vector<NetworkSnapshot> snapshots);

  /// Throws ValidationError unless `snapshot` is strictly later than the last one.
  void push_back(NetworkSnapshot snapshot);

  std::size_t size() const { return snapshots_.size(); }
  bool empty() const { return snapshots_.empty(); }
  const NetworkSnapshot& operator[](std::size_t i) const { return snapshots_[i]; }
  auto begin() const { return snapshots_.begin(); }
  auto end() const { return snapshots_.end(); }

 private:
  std::vector<NetworkSnapshot> snapshots_;
};

struct PhaseWindow {
  std::string label;
  YearMonth start;  // inclusive
  YearMonth end;    // inclusive

  bool contains(YearMonth m) const { return start <= m && m <= end; }
  std::size_t month_count() const { return static_cast<std::size_t>(end.ordinal() - start.ordinal() + 1); }
  friend bool operator==(const PhaseWindow&, const PhaseWindow&) = default;
};

/// Pre-crisis, crisis, stimulus, post-stimulus windows (2007-01 .. 2012-03).
std::vector<PhaseWindow> canonical_phase_windows();

struct PhasePartition {
  struct Group {
    PhaseWindow window;
    std::vector<std::size_t> snapshots;  // indices into the DynamicNetwork
  };
  std::vector<Group> groups;  // same order as the requested windows
  std::vector<std::size_t> unassigned;
};

/// Assigns each snapshot to the window containing its month.
/// Throws ConfigError for overlapping or inverted windows.
PhasePartition phase_partition(const DynamicNetwork& dynamic, const std::vector<PhaseWindow>& windows);

}  // namespace gnet
