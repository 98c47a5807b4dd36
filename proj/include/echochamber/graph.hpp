#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "echochamber/error.hpp"

namespace echochamber {

using UserId = std::string;
using NodeIndex = std::uint32_t;
using Weight = std::uint64_t;

struct Edge {
  NodeIndex source = 0;
  NodeIndex target = 0;
  Weight weight = 1;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Adjacency entry seen from one endpoint.
struct Arc {
  NodeIndex node = 0;
  Weight weight = 1;
};

class GraphBuilder;

/// Immutable weighted directed graph.
///
/// Nodes are stored in lexicographic order of their ids, so the node index
/// of a user does not depend on the order in which interactions were read.
/// There are no self-loops and at most one edge per ordered pair.
class DirectedWeightedGraph {
 public:
  DirectedWeightedGraph() = default;

  std::size_t node_count() const { return ids_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  bool empty() const { return ids_.empty(); }

  const std::vector<UserId>& ids() const { return ids_; }
  const UserId& id(NodeIndex v) const { return ids_[v]; }
  std::optional<NodeIndex> find(const UserId& id) const;
  bool contains(const UserId& id) const { return find(id).has_value(); }

  /// Edges sorted by (source, target).
  const std::vector<Edge>& edges() const { return edges_; }

  std::span<const Arc> out_arcs(NodeIndex v) const {
    return {out_arcs_.data() + out_offsets_[v], out_arcs_.data() + out_offsets_[v + 1]};
  }
  std::span<const Arc> in_arcs(NodeIndex v) const {
    return {in_arcs_.data() + in_offsets_[v], in_arcs_.data() + in_offsets_[v + 1]};
  }
  std::size_t out_degree(NodeIndex v) const { return out_offsets_[v + 1] - out_offsets_[v]; }
  std::size_t in_degree(NodeIndex v) const { return in_offsets_[v + 1] - in_offsets_[v]; }

  /// Weight of edge u->v, 0 if absent.
  Weight weight(NodeIndex u, NodeIndex v) const;
  bool has_edge(NodeIndex u, NodeIndex v) const { return weight(u, v) != 0; }

  /// Edge set as (source id, target id) -> weight; handy for comparisons.
  std::map<std::pair<UserId, UserId>, Weight> edge_map() const;

  friend bool operator==(const DirectedWeightedGraph& a, const DirectedWeightedGraph& b) {
    return a.ids_ == b.ids_ && a.edges_ == b.edges_;
  }

 private:
  friend class GraphBuilder;
  friend DirectedWeightedGraph make_graph(std::vector<UserId> sorted_ids, std::vector<Edge> edges);

  std::vector<UserId> ids_;
  std::unordered_map<UserId, NodeIndex> index_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> out_offsets_{0};
  std::vector<Arc> out_arcs_;
  std::vector<std::size_t> in_offsets_{0};
  std::vector<Arc> in_arcs_;
};

/// Accumulates interactions into a DirectedWeightedGraph.
///
/// Repeated (u, v) interactions add up into one edge weight. Self-loops are
/// dropped and do not create nodes.
class GraphBuilder {
 public:
  void add_node(const UserId& id);
  /// Returns false when the interaction was a self-loop and was dropped.
  bool add_edge(const UserId& source, const UserId& target, Weight weight = 1);
  /// Keeps weight 1 on an existing edge instead of accumulating.
  bool add_unit_edge(const UserId& source, const UserId& target);
  /// Merge another builder's partial counts; associative and commutative.
  void merge(const GraphBuilder& other);

  DirectedWeightedGraph build() const;

 private:
  std::map<UserId, bool> nodes_;
  std::map<std::pair<UserId, UserId>, Weight> edges_;
};

/// Build from node-index edges over an already sorted id list.
DirectedWeightedGraph make_graph(std::vector<UserId> sorted_ids, std::vector<Edge> edges);

struct DegreeRecord {
  UserId user;
  std::size_t in_degree = 0;
  std::size_t out_degree = 0;
  Weight in_strength = 0;
  Weight out_strength = 0;
};

struct ReciprocityResult {
  double value = 0.0;
  /// Set when the graph had no edges and the value was defined as 0.
  bool empty_graph = false;
};

/// Edges with weight >= min_weight; nodes left isolated are dropped.
DirectedWeightedGraph threshold_edges(const DirectedWeightedGraph& g, Weight min_weight);

/// Largest weakly connected component; ties go to the component holding the
/// lexicographically smallest id.
DirectedWeightedGraph giant_component(const DirectedWeightedGraph& g);

/// Weak component label per node, numbered in order of first node index.
std::vector<std::uint32_t> weak_components(const DirectedWeightedGraph& g, std::size_t* count = nullptr);

bool is_weakly_connected(const DirectedWeightedGraph& g);

/// Subgraph induced by the given node subset (ids not in g are ignored).
DirectedWeightedGraph induced_subgraph(const DirectedWeightedGraph& g, std::span<const UserId> keep);
DirectedWeightedGraph induced_subgraph(const DirectedWeightedGraph& g, const std::vector<bool>& keep);

ReciprocityResult reciprocity(const DirectedWeightedGraph& g);

std::vector<DegreeRecord> degrees(const DirectedWeightedGraph& g);

/// Undirected weighted graph in CSR form, w'(u,v) = w(u,v) + w(v,u).
struct SymmetricGraph {
  std::vector<std::size_t> offsets{0};
  std::vector<NodeIndex> neighbors;
  std::vector<double> weights;

  std::size_t node_count() const { return offsets.size() - 1; }
};

SymmetricGraph symmetrize(const DirectedWeightedGraph& g);

// Edge-list interchange: `source<TAB>target<TAB>weight` per line, no header.
void write_edge_list(const DirectedWeightedGraph& g, std::ostream& out);
void write_edge_list(const DirectedWeightedGraph& g, const std::filesystem::path& path);
DirectedWeightedGraph read_edge_list(std::istream& in);
DirectedWeightedGraph read_edge_list(const std::filesystem::path& path);

}  // namespace echochamber
