#include "echochamber/communities.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "echochamber/util.hpp"

namespace echochamber {

namespace {

// Undirected weighted graph with explicit self-loop weights. A node's degree
// counts its self-loop once; self[v] already holds twice the internal weight
// of the community it stands for.
struct LGraph {
  std::vector<std::size_t> offsets{0};
  std::vector<std::uint32_t> nb;
  std::vector<double> w;
  std::vector<double> self;

  std::size_t size() const { return self.size(); }
  double degree(std::size_t v) const {
    double k = self[v];
    for (std::size_t e = offsets[v]; e < offsets[v + 1]; ++e) k += w[e];
    return k;
  }
};

LGraph from_symmetric(const SymmetricGraph& s) {
  LGraph g;
  g.offsets = s.offsets;
  g.nb.assign(s.neighbors.begin(), s.neighbors.end());
  g.w = s.weights;
  g.self.assign(s.node_count(), 0.0);
  return g;
}

// One round of local moves. Returns true if any node changed community.
bool local_moves(const LGraph& g, std::vector<std::uint32_t>& comm) {
  const std::size_t n = g.size();
  std::vector<double> k(n), tot(n, 0.0);
  double m2 = 0.0;
  for (std::size_t v = 0; v < n; ++v) {
    k[v] = g.degree(v);
    tot[comm[v]] += k[v];
    m2 += k[v];
  }
  if (m2 == 0.0) return false;

  std::vector<double> link(n, 0.0);
  std::vector<char> seen(n, 0);
  std::vector<std::uint32_t> touched;
  bool any = false;
  for (bool moved = true; moved;) {
    moved = false;
    for (std::size_t v = 0; v < n; ++v) {
      const std::uint32_t own = comm[v];
      touched.clear();
      touched.push_back(own);
      seen[own] = 1;
      for (std::size_t e = g.offsets[v]; e < g.offsets[v + 1]; ++e) {
        const std::uint32_t c = comm[g.nb[e]];
        if (!seen[c]) {
          seen[c] = 1;
          touched.push_back(c);
        }
        link[c] += g.w[e];
      }
      tot[own] -= k[v];
      std::uint32_t best = own;
      double best_gain = link[own] - tot[own] * k[v] / m2;
      for (std::uint32_t c : touched) {
        const double gain = link[c] - tot[c] * k[v] / m2;
        if (gain > best_gain + 1e-12 * m2) {
          best_gain = gain;
          best = c;
        }
      }
      tot[best] += k[v];
      for (std::uint32_t c : touched) {
        link[c] = 0.0;
        seen[c] = 0;
      }
      if (best != own) {
        comm[v] = best;
        moved = true;
        any = true;
      }
    }
  }
  return any;
}

// Renumber to 0..k-1 in order of first appearance.
std::size_t compact(std::vector<std::uint32_t>& comm) {
  std::vector<std::uint32_t> map(comm.size(), UINT32_MAX);
  std::uint32_t next = 0;
  for (auto& c : comm) {
    if (map[c] == UINT32_MAX) map[c] = next++;
    c = map[c];
  }
  return next;
}

LGraph aggregate(const LGraph& g, const std::vector<std::uint32_t>& comm, std::size_t k) {
  std::vector<std::map<std::uint32_t, double>> rows(k);
  LGraph out;
  out.self.assign(k, 0.0);
  for (std::size_t v = 0; v < g.size(); ++v) {
    const auto cv = comm[v];
    out.self[cv] += g.self[v];
    for (std::size_t e = g.offsets[v]; e < g.offsets[v + 1]; ++e) {
      const auto cu = comm[g.nb[e]];
      if (cu == cv) out.self[cv] += g.w[e];
      else rows[cv][cu] += g.w[e];
    }
  }
  for (std::size_t c = 0; c < k; ++c) {
    for (const auto& [u, w] : rows[c]) {
      out.nb.push_back(u);
      out.w.push_back(w);
    }
    out.offsets.push_back(out.nb.size());
  }
  return out;
}

}  // namespace

double modularity(const DirectedWeightedGraph& g, std::span<const std::uint32_t> assignment) {
  if (assignment.size() != g.node_count()) throw InvalidArgument("assignment size does not match graph");
  const auto s = symmetrize(g);
  const std::size_t k = assignment.empty() ? 0 : *std::max_element(assignment.begin(), assignment.end()) + 1;
  std::vector<double> in(k, 0.0), tot(k, 0.0);
  double m2 = 0.0;
  for (std::size_t v = 0; v < s.node_count(); ++v)
    for (std::size_t e = s.offsets[v]; e < s.offsets[v + 1]; ++e) {
      tot[assignment[v]] += s.weights[e];
      m2 += s.weights[e];
      if (assignment[s.neighbors[e]] == assignment[v]) in[assignment[v]] += s.weights[e];
    }
  if (m2 == 0.0) return 0.0;
  double q = 0.0;
  for (std::size_t c = 0; c < k; ++c) q += in[c] / m2 - (tot[c] / m2) * (tot[c] / m2);
  return q;
}

CommunityResult detect_communities(const DirectedWeightedGraph& g) {
  if (g.empty()) throw InvalidArgument("community detection needs a non-empty graph");
  const std::size_t n = g.node_count();
  std::vector<std::uint32_t> node_comm(n);
  std::iota(node_comm.begin(), node_comm.end(), 0u);

  LGraph level = from_symmetric(symmetrize(g));
  while (true) {
    std::vector<std::uint32_t> comm(level.size());
    std::iota(comm.begin(), comm.end(), 0u);
    if (!local_moves(level, comm)) break;
    const std::size_t k = compact(comm);
    for (auto& c : node_comm) c = comm[c];
    if (k == level.size()) break;
    level = aggregate(level, comm, k);
  }

  CommunityResult r;
  const std::size_t k = compact(node_comm);
  std::vector<std::size_t> size(k, 0);
  for (auto c : node_comm) ++size[c];
  // After compact(), community ids already follow first (smallest) node index.
  std::vector<std::uint32_t> order(k);
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return size[a] > size[b]; });
  std::vector<std::uint32_t> rank(k);
  for (std::uint32_t i = 0; i < k; ++i) rank[order[i]] = i;
  r.assignment.resize(n);
  for (std::size_t v = 0; v < n; ++v) r.assignment[v] = rank[node_comm[v]];
  r.count = k;
  r.modularity = modularity(g, r.assignment);
  return r;
}

std::vector<CommunitySummary> summarize_communities(const DirectedWeightedGraph& g, const CommunityResult& result,
                                                    const std::map<UserId, double>& scores) {
  if (result.assignment.size() != g.node_count()) throw InvalidArgument("assignment size does not match graph");
  std::vector<CommunitySummary> out(result.count);
  std::vector<double> sum(result.count, 0.0);
  std::vector<std::size_t> scored(result.count, 0);
  std::vector<std::optional<NodeIndex>> top(result.count);
  for (NodeIndex v = 0; v < g.node_count(); ++v) {
    const auto c = result.assignment[v];
    ++out[c].size;
    if (auto it = scores.find(g.id(v)); it != scores.end()) {
      sum[c] += it->second;
      ++scored[c];
    }
    // Index order is id order, so keeping the first maximum breaks ties by id.
    if (!top[c] || g.in_degree(v) > g.in_degree(*top[c])) top[c] = v;
  }
  for (std::uint32_t c = 0; c < result.count; ++c) {
    out[c].community = c;
    if (scored[c] > 0) out[c].mean_leaning = sum[c] / static_cast<double>(scored[c]);
    out[c].top_user = g.id(*top[c]);
  }
  return out;
}

void write_community_csv(std::span<const CommunitySummary> summaries, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "community,size,mean_leaning,top_user\n";
  for (const auto& s : summaries)
    out << s.community << ',' << s.size << ',' << (s.mean_leaning ? format_double(*s.mean_leaning) : "") << ','
        << s.top_user << '\n';
}

void write_assignment_csv(const DirectedWeightedGraph& g, const CommunityResult& result,
                          const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "user,community\n";
  for (NodeIndex v = 0; v < g.node_count(); ++v) out << g.id(v) << ',' << result.assignment[v] << '\n';
}

}  // namespace echochamber
