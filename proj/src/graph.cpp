#include "echochamber/graph.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>

namespace echochamber {

std::optional<NodeIndex> DirectedWeightedGraph::find(const UserId& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Weight DirectedWeightedGraph::weight(NodeIndex u, NodeIndex v) const {
  auto arcs = out_arcs(u);
  auto it = std::lower_bound(arcs.begin(), arcs.end(), v,
                             [](const Arc& a, NodeIndex x) { return a.node < x; });
  if (it != arcs.end() && it->node == v) return it->weight;
  return 0;
}

std::map<std::pair<UserId, UserId>, Weight> DirectedWeightedGraph::edge_map() const {
  std::map<std::pair<UserId, UserId>, Weight> m;
  for (const auto& e : edges_) m[{ids_[e.source], ids_[e.target]}] = e.weight;
  return m;
}

void GraphBuilder::add_node(const UserId& id) {
  if (id.empty()) throw InvalidArgument("empty user id");
  nodes_.emplace(id, true);
}

bool GraphBuilder::add_edge(const UserId& source, const UserId& target, Weight weight) {
  if (source.empty() || target.empty()) throw InvalidArgument("empty user id");
  if (weight == 0) throw InvalidArgument("edge weight must be >= 1");
  if (source == target) return false;
  nodes_.emplace(source, true);
  nodes_.emplace(target, true);
  edges_[{source, target}] += weight;
  return true;
}

bool GraphBuilder::add_unit_edge(const UserId& source, const UserId& target) {
  if (source.empty() || target.empty()) throw InvalidArgument("empty user id");
  if (source == target) return false;
  nodes_.emplace(source, true);
  nodes_.emplace(target, true);
  edges_[{source, target}] = 1;
  return true;
}

void GraphBuilder::merge(const GraphBuilder& other) {
  for (const auto& [id, _] : other.nodes_) nodes_.emplace(id, true);
  for (const auto& [key, w] : other.edges_) edges_[key] += w;
}

DirectedWeightedGraph GraphBuilder::build() const {
  std::vector<UserId> ids;
  ids.reserve(nodes_.size());
  for (const auto& [id, _] : nodes_) ids.push_back(id);
  std::unordered_map<UserId, NodeIndex> index;
  index.reserve(ids.size());
  for (NodeIndex i = 0; i < ids.size(); ++i) index.emplace(ids[i], i);
  std::vector<Edge> edges;
  edges.reserve(edges_.size());
  for (const auto& [key, w] : edges_) edges.push_back({index.at(key.first), index.at(key.second), w});
  return make_graph(std::move(ids), std::move(edges));
}

DirectedWeightedGraph make_graph(std::vector<UserId> sorted_ids, std::vector<Edge> edges) {
  DirectedWeightedGraph g;
  const std::size_t n = sorted_ids.size();
  g.ids_ = std::move(sorted_ids);
  g.index_.reserve(n);
  for (NodeIndex i = 0; i < n; ++i) {
    if (g.ids_[i].empty()) throw InvalidArgument("empty user id");
    if (i > 0 && !(g.ids_[i - 1] < g.ids_[i])) throw InvalidArgument("node ids must be sorted and unique");
    g.index_.emplace(g.ids_[i], i);
  }

  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return a.source != b.source ? a.source < b.source : a.target < b.target;
  });
  // Merge parallel edges, drop self-loops.
  std::vector<Edge> merged;
  merged.reserve(edges.size());
  for (const auto& e : edges) {
    if (e.source >= n || e.target >= n) throw InvalidArgument("edge endpoint out of range");
    if (e.weight == 0) throw InvalidArgument("edge weight must be >= 1");
    if (e.source == e.target) continue;
    if (!merged.empty() && merged.back().source == e.source && merged.back().target == e.target) {
      merged.back().weight += e.weight;
    } else {
      merged.push_back(e);
    }
  }
  g.edges_ = std::move(merged);

  g.out_offsets_.assign(n + 1, 0);
  g.in_offsets_.assign(n + 1, 0);
  for (const auto& e : g.edges_) {
    ++g.out_offsets_[e.source + 1];
    ++g.in_offsets_[e.target + 1];
  }
  std::partial_sum(g.out_offsets_.begin(), g.out_offsets_.end(), g.out_offsets_.begin());
  std::partial_sum(g.in_offsets_.begin(), g.in_offsets_.end(), g.in_offsets_.begin());
  g.out_arcs_.resize(g.edges_.size());
  g.in_arcs_.resize(g.edges_.size());
  std::vector<std::size_t> in_fill(g.in_offsets_.begin(), g.in_offsets_.end() - 1);
  for (std::size_t k = 0; k < g.edges_.size(); ++k) {
    const auto& e = g.edges_[k];
    g.out_arcs_[k] = {e.target, e.weight};
    // Edges are sorted by source, so in-arcs come out sorted by source too.
    g.in_arcs_[in_fill[e.target]++] = {e.source, e.weight};
  }
  return g;
}

DirectedWeightedGraph induced_subgraph(const DirectedWeightedGraph& g, const std::vector<bool>& keep) {
  std::vector<UserId> ids;
  std::vector<NodeIndex> remap(g.node_count(), 0);
  for (NodeIndex v = 0; v < g.node_count(); ++v) {
    if (!keep[v]) continue;
    remap[v] = static_cast<NodeIndex>(ids.size());
    ids.push_back(g.id(v));
  }
  std::vector<Edge> edges;
  for (const auto& e : g.edges())
    if (keep[e.source] && keep[e.target]) edges.push_back({remap[e.source], remap[e.target], e.weight});
  return make_graph(std::move(ids), std::move(edges));
}

DirectedWeightedGraph induced_subgraph(const DirectedWeightedGraph& g, std::span<const UserId> keep_ids) {
  std::vector<bool> keep(g.node_count(), false);
  for (const auto& id : keep_ids)
    if (auto v = g.find(id)) keep[*v] = true;
  return induced_subgraph(g, keep);
}

DirectedWeightedGraph threshold_edges(const DirectedWeightedGraph& g, Weight min_weight) {
  if (min_weight < 1) throw InvalidArgument("min_weight must be >= 1");
  std::vector<bool> used(g.node_count(), false);
  std::vector<Edge> kept;
  for (const auto& e : g.edges()) {
    if (e.weight < min_weight) continue;
    kept.push_back(e);
    used[e.source] = used[e.target] = true;
  }
  std::vector<UserId> ids;
  std::vector<NodeIndex> remap(g.node_count(), 0);
  for (NodeIndex v = 0; v < g.node_count(); ++v) {
    if (!used[v]) continue;
    remap[v] = static_cast<NodeIndex>(ids.size());
    ids.push_back(g.id(v));
  }
  for (auto& e : kept) e = {remap[e.source], remap[e.target], e.weight};
  return make_graph(std::move(ids), std::move(kept));
}

std::vector<std::uint32_t> weak_components(const DirectedWeightedGraph& g, std::size_t* count) {
  constexpr auto kUnset = static_cast<std::uint32_t>(-1);
  std::vector<std::uint32_t> label(g.node_count(), kUnset);
  std::uint32_t next = 0;
  std::vector<NodeIndex> stack;
  for (NodeIndex s = 0; s < g.node_count(); ++s) {
    if (label[s] != kUnset) continue;
    label[s] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      NodeIndex v = stack.back();
      stack.pop_back();
      for (auto arcs : {g.out_arcs(v), g.in_arcs(v)}) {
        for (const auto& a : arcs) {
          if (label[a.node] != kUnset) continue;
          label[a.node] = next;
          stack.push_back(a.node);
        }
      }
    }
    ++next;
  }
  if (count) *count = next;
  return label;
}

bool is_weakly_connected(const DirectedWeightedGraph& g) {
  std::size_t count = 0;
  weak_components(g, &count);
  return count <= 1;
}

DirectedWeightedGraph giant_component(const DirectedWeightedGraph& g) {
  if (g.empty()) return {};
  std::size_t count = 0;
  auto label = weak_components(g, &count);
  std::vector<std::size_t> size(count, 0);
  for (auto c : label) ++size[c];
  // Components are numbered by their smallest node index, which is also the
  // lexicographically smallest id, so the first maximum wins ties.
  auto best = static_cast<std::uint32_t>(std::max_element(size.begin(), size.end()) - size.begin());
  std::vector<bool> keep(g.node_count());
  for (NodeIndex v = 0; v < g.node_count(); ++v) keep[v] = label[v] == best;
  return induced_subgraph(g, keep);
}

ReciprocityResult reciprocity(const DirectedWeightedGraph& g) {
  if (g.edge_count() == 0) return {0.0, true};
  std::size_t reciprocated = 0;
  for (const auto& e : g.edges())
    if (g.has_edge(e.target, e.source)) ++reciprocated;
  return {static_cast<double>(reciprocated) / static_cast<double>(g.edge_count()), false};
}

std::vector<DegreeRecord> degrees(const DirectedWeightedGraph& g) {
  std::vector<DegreeRecord> out;
  out.reserve(g.node_count());
  for (NodeIndex v = 0; v < g.node_count(); ++v) {
    DegreeRecord r{g.id(v), g.in_degree(v), g.out_degree(v), 0, 0};
    for (const auto& a : g.in_arcs(v)) r.in_strength += a.weight;
    for (const auto& a : g.out_arcs(v)) r.out_strength += a.weight;
    out.push_back(std::move(r));
  }
  return out;
}

SymmetricGraph symmetrize(const DirectedWeightedGraph& g) {
  SymmetricGraph s;
  const std::size_t n = g.node_count();
  s.offsets.assign(n + 1, 0);
  for (NodeIndex v = 0; v < n; ++v) {
    // Merge the sorted out- and in-arc lists.
    auto out = g.out_arcs(v);
    auto in = g.in_arcs(v);
    std::size_t i = 0, j = 0;
    while (i < out.size() || j < in.size()) {
      if (j == in.size() || (i < out.size() && out[i].node < in[j].node)) {
        s.neighbors.push_back(out[i].node);
        s.weights.push_back(static_cast<double>(out[i].weight));
        ++i;
      } else if (i == out.size() || in[j].node < out[i].node) {
        s.neighbors.push_back(in[j].node);
        s.weights.push_back(static_cast<double>(in[j].weight));
        ++j;
      } else {
        s.neighbors.push_back(out[i].node);
        s.weights.push_back(static_cast<double>(out[i].weight + in[j].weight));
        ++i;
        ++j;
      }
    }
    s.offsets[v + 1] = s.neighbors.size();
  }
  return s;
}

void write_edge_list(const DirectedWeightedGraph& g, std::ostream& out) {
  for (const auto& e : g.edges()) out << g.id(e.source) << '\t' << g.id(e.target) << '\t' << e.weight << '\n';
}

void write_edge_list(const DirectedWeightedGraph& g, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path.string());
  write_edge_list(g, out);
}

DirectedWeightedGraph read_edge_list(std::istream& in) {
  GraphBuilder builder;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto t1 = line.find('\t');
    auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos || line.find('\t', t2 + 1) != std::string::npos)
      throw ParseError("edge list line " + std::to_string(lineno) + ": expected 3 tab-separated fields");
    std::string_view ws(line.data() + t2 + 1, line.size() - t2 - 1);
    Weight w = 0;
    auto [ptr, ec] = std::from_chars(ws.data(), ws.data() + ws.size(), w);
    if (ec != std::errc{} || ptr != ws.data() + ws.size() || w == 0)
      throw ParseError("edge list line " + std::to_string(lineno) + ": weight must be a positive integer, got '" +
                       std::string(ws) + "'");
    UserId src = line.substr(0, t1);
    UserId dst = line.substr(t1 + 1, t2 - t1 - 1);
    if (src.empty() || dst.empty()) throw ParseError("edge list line " + std::to_string(lineno) + ": empty user id");
    builder.add_edge(src, dst, w);
  }
  return builder.build();
}

DirectedWeightedGraph read_edge_list(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open: " + path.string());
  return read_edge_list(in);
}

}  // namespace echochamber
