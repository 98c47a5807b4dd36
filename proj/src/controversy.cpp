#include "echochamber/controversy.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <array>
#include <cmath>
#include <queue>

#include "echochamber/util.hpp"

namespace echochamber {

std::string_view to_string(RwcMethod m) { return m == RwcMethod::Exact ? "exact" : "montecarlo"; }

RwcReport RwcReport::from_probabilities(double pxx, double pxy, double pyx, double pyy) {
  RwcReport r;
  r.pxx = pxx;
  r.pxy = pxy;
  r.pyx = pyx;
  r.pyy = pyy;
  r.rwc = r.pxx * r.pyy - r.pxy * r.pyx;
  return r;
}

nlohmann::json RwcReport::to_json() const {
  return {{"pxx", pxx},   {"pxy", pxy},   {"pyx", pyx},           {"pyy", pyy},
          {"rwc", rwc},   {"method", std::string(to_string(method))}, {"hub_k", hub_k}, {"walks", walks}};
}

std::pair<double, double> mention_asymmetry(const RwcReport& report) { return {report.pxy, report.pyx}; }

std::vector<std::uint8_t> side_vector(const DirectedWeightedGraph& g, const std::map<UserId, int>& sides) {
  std::vector<std::uint8_t> side(g.node_count());
  for (NodeIndex v = 0; v < g.node_count(); ++v) {
    auto it = sides.find(g.id(v));
    if (it == sides.end()) throw InvalidArgument("node " + g.id(v) + " has no side");
    if (it->second != 0 && it->second != 1) throw InvalidArgument("side of " + g.id(v) + " must be 0 or 1");
    side[v] = static_cast<std::uint8_t>(it->second);
  }
  return side;
}

std::vector<NodeIndex> select_hubs(const DirectedWeightedGraph& g, std::span<const std::uint8_t> side, int which,
                                   std::size_t k) {
  std::vector<NodeIndex> members;
  std::vector<Weight> strength(g.node_count(), 0);
  for (NodeIndex v = 0; v < g.node_count(); ++v) {
    if (side[v] != which) continue;
    members.push_back(v);
    for (const auto& a : g.in_arcs(v)) strength[v] += a.weight;
  }
  std::sort(members.begin(), members.end(), [&](NodeIndex a, NodeIndex b) {
    if (g.in_degree(a) != g.in_degree(b)) return g.in_degree(a) > g.in_degree(b);
    if (strength[a] != strength[b]) return strength[a] > strength[b];
    return a < b;
  });
  members.resize(std::min(k, members.size()));
  return members;
}

namespace {

constexpr int kNoHub = -1;

// Hubs and start nodes shared by both solvers.
struct Chain {
  const DirectedWeightedGraph& g;
  std::vector<int> hub_side;  // side of the hub, kNoHub otherwise
  std::vector<Weight> out_strength;
  std::array<std::vector<NodeIndex>, 2> starts;

  Chain(const DirectedWeightedGraph& graph, std::span<const std::uint8_t> side, std::size_t hub_k) : g(graph) {
    if (side.size() != g.node_count()) throw InvalidArgument("side vector does not match the graph");
    if (hub_k < 1) throw InvalidArgument("hub_k must be >= 1");
    hub_side.assign(g.node_count(), kNoHub);
    for (int s = 0; s < 2; ++s) {
      std::size_t members = static_cast<std::size_t>(std::count(side.begin(), side.end(), static_cast<std::uint8_t>(s)));
      if (members < hub_k + 1)
        throw InvalidArgument(std::string("side ") + (s == 0 ? "X" : "Y") + " has " + std::to_string(members) +
                              " nodes; it needs more than hub_k = " + std::to_string(hub_k));
      for (NodeIndex h : select_hubs(g, side, s, hub_k)) hub_side[h] = s;
    }
    out_strength.assign(g.node_count(), 0);
    for (NodeIndex v = 0; v < g.node_count(); ++v) {
      for (const auto& a : g.out_arcs(v)) out_strength[v] += a.weight;
      if (hub_side[v] == kNoHub) starts[side[v]].push_back(v);
    }
  }

  bool hub(NodeIndex v) const { return hub_side[v] != kNoHub; }
  bool dangling(NodeIndex v) const { return out_strength[v] == 0; }
};

// Non-hub nodes from which a walk started on side `from` can be absorbed.
std::vector<bool> absorbable(const Chain& c, int from) {
  const auto& g = c.g;
  std::vector<bool> reach(g.node_count(), false);
  std::queue<NodeIndex> frontier;
  auto visit_predecessors = [&](NodeIndex v) {
    for (const auto& a : g.in_arcs(v))
      if (!c.hub(a.node) && !reach[a.node]) {
        reach[a.node] = true;
        frontier.push(a.node);
      }
  };
  auto drain = [&] {
    while (!frontier.empty()) {
      NodeIndex v = frontier.front();
      frontier.pop();
      visit_predecessors(v);
    }
  };
  for (NodeIndex v = 0; v < g.node_count(); ++v)
    if (c.hub(v)) visit_predecessors(v);
  drain();
  // A dangling node jumps to the start set, so it is absorbable as soon as
  // any start node is.
  bool start_reaches = std::any_of(c.starts[from].begin(), c.starts[from].end(), [&](NodeIndex s) { return reach[s]; });
  if (start_reaches) {
    for (NodeIndex v = 0; v < g.node_count(); ++v)
      if (!c.hub(v) && c.dangling(v) && !reach[v]) {
        reach[v] = true;
        frontier.push(v);
      }
    drain();
  }
  return reach;
}

struct Solution {
  double p[2] = {0.0, 0.0};
  double residual = 0.0;
};

// Unknowns: h(u) for absorbable non-hub u, plus the teleport value t (the
// mean of h over the start set) when any absorbable node is dangling.
Solution solve_side(const Chain& c, int from, const ExactSolverOptions& opts) {
  const auto& g = c.g;
  const auto reach = absorbable(c, from);
  constexpr std::uint32_t kAbsent = static_cast<std::uint32_t>(-1);
  std::vector<std::uint32_t> var(g.node_count(), kAbsent);
  std::uint32_t m = 0;
  bool any_dangling = false;
  for (NodeIndex v = 0; v < g.node_count(); ++v)
    if (reach[v]) {
      var[v] = m++;
      any_dangling = any_dangling || c.dangling(v);
    }
  const auto& starts = c.starts[from];
  const double start_share = 1.0 / static_cast<double>(starts.size());
  const std::uint32_t t = any_dangling ? m++ : kAbsent;

  Solution sol;
  if (m == 0) return sol;

  using Triplet = Eigen::Triplet<double>;
  std::vector<Triplet> entries;
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(m, 2);
  for (NodeIndex u = 0; u < g.node_count(); ++u) {
    if (var[u] == kAbsent) continue;
    const auto row = static_cast<int>(var[u]);
    entries.emplace_back(row, row, 1.0);
    if (c.dangling(u)) {
      entries.emplace_back(row, static_cast<int>(t), -1.0);
      continue;
    }
    const auto total = static_cast<double>(c.out_strength[u]);
    for (const auto& a : g.out_arcs(u)) {
      const double p = static_cast<double>(a.weight) / total;
      if (c.hub(a.node)) rhs(row, c.hub_side[a.node]) += p;
      else if (var[a.node] != kAbsent) entries.emplace_back(row, static_cast<int>(var[a.node]), -p);
    }
  }
  if (t != kAbsent) {
    entries.emplace_back(static_cast<int>(t), static_cast<int>(t), 1.0);
    for (NodeIndex s : starts)
      if (var[s] != kAbsent) entries.emplace_back(static_cast<int>(t), static_cast<int>(var[s]), -start_share);
  }

  Eigen::SparseMatrix<double> A(m, m);
  A.setFromTriplets(entries.begin(), entries.end());
  Eigen::MatrixXd h;
  auto residual_of = [&](const Eigen::MatrixXd& x) { return (A * x - rhs).cwiseAbs().maxCoeff(); };

  if (m < opts.dense_limit) {
    Eigen::MatrixXd dense(A);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(dense);
    h = lu.solve(rhs);
    for (int refine = 0; refine < 3 && residual_of(h) > opts.residual_tolerance; ++refine)
      h += lu.solve(rhs - A * h);
  } else {
    Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, Eigen::IncompleteLUT<double>> iterative;
    iterative.setTolerance(opts.residual_tolerance * 1e-2);
    iterative.setMaxIterations(2000);
    iterative.compute(A);
    h.resize(m, 2);
    bool ok = iterative.info() == Eigen::Success;
    for (int col = 0; ok && col < 2; ++col) {
      h.col(col) = iterative.solve(rhs.col(col));
      ok = iterative.info() == Eigen::Success;
    }
    if (!ok || residual_of(h) > opts.residual_tolerance) {
      Eigen::SparseLU<Eigen::SparseMatrix<double>> direct;
      direct.compute(A);
      if (direct.info() != Eigen::Success) throw Error("absorbing-chain system could not be factorized");
      h = direct.solve(rhs);
    }
  }
  sol.residual = residual_of(h);
  if (sol.residual > opts.residual_tolerance)
    throw Error("absorbing-chain solve did not reach the residual tolerance (" + format_double(sol.residual) + ")");

  for (int b = 0; b < 2; ++b) {
    double sum = 0.0;
    for (NodeIndex s : starts)
      if (var[s] != kAbsent) sum += h(var[s], b);
    sol.p[b] = sum * start_share;
  }
  return sol;
}

}  // namespace

RwcReport rwc_exact(const DirectedWeightedGraph& g, std::span<const std::uint8_t> side, std::size_t hub_k,
                    const ExactSolverOptions& opts) {
  const Chain chain(g, side, hub_k);
  const Solution x = solve_side(chain, 0, opts);
  const Solution y = solve_side(chain, 1, opts);
  RwcReport r = RwcReport::from_probabilities(x.p[0], x.p[1], y.p[0], y.p[1]);
  r.method = RwcMethod::Exact;
  r.hub_k = hub_k;
  r.residual = std::max(x.residual, y.residual);
  return r;
}

RwcReport rwc_exact(const DirectedWeightedGraph& g, const std::map<UserId, int>& sides, std::size_t hub_k,
                    const ExactSolverOptions& opts) {
  return rwc_exact(g, side_vector(g, sides), hub_k, opts);
}

RwcReport rwc_montecarlo(const DirectedWeightedGraph& g, std::span<const std::uint8_t> side, std::size_t hub_k,
                         std::size_t walks, std::uint64_t seed, unsigned threads) {
  if (walks < 1) throw InvalidArgument("walks must be >= 1");
  const Chain chain(g, side, hub_k);

  // Cumulative out-weights per node for inverse-CDF sampling.
  std::vector<std::size_t> offsets(g.node_count() + 1, 0);
  std::vector<Weight> cumulative;
  std::vector<NodeIndex> targets;
  for (NodeIndex v = 0; v < g.node_count(); ++v) {
    Weight acc = 0;
    for (const auto& a : g.out_arcs(v)) {
      acc += a.weight;
      cumulative.push_back(acc);
      targets.push_back(a.node);
    }
    offsets[v + 1] = cumulative.size();
  }

  constexpr std::size_t kChunk = 8192;
  constexpr int kMaxRestarts = 100;
  const std::size_t chunks = (walks + kChunk - 1) / kChunk;
  const std::size_t step_cap = 10 * g.node_count();
  // absorbed[side][chunk][hub side]
  std::vector<std::array<std::uint64_t, 2>> absorbed(2 * chunks, {0, 0});

  parallel_for(2 * chunks, threads, [&](std::size_t job) {
    const int from = static_cast<int>(job / chunks);
    const std::size_t chunk = job % chunks;
    Rng rng(derive_seed(seed, (static_cast<std::uint64_t>(from) << 32) | chunk));
    const auto& starts = chain.starts[from];
    std::uniform_int_distribution<std::size_t> pick_start(0, starts.size() - 1);
    const std::size_t count = std::min(kChunk, walks - chunk * kChunk);
    auto& out = absorbed[job];
    for (std::size_t w = 0; w < count; ++w) {
      NodeIndex node = starts[pick_start(rng)];
      std::size_t steps = 0;
      int restarts = 0;
      while (true) {
        if (chain.hub(node)) {
          ++out[static_cast<std::size_t>(chain.hub_side[node])];
          break;
        }
        if (chain.dangling(node)) {
          node = starts[pick_start(rng)];
        } else {
          const Weight total = chain.out_strength[node];
          const Weight r = std::uniform_int_distribution<Weight>(0, total - 1)(rng);
          auto begin = cumulative.begin() + static_cast<std::ptrdiff_t>(offsets[node]);
          auto end = cumulative.begin() + static_cast<std::ptrdiff_t>(offsets[node + 1]);
          auto it = std::upper_bound(begin, end, r);
          node = targets[static_cast<std::size_t>(it - cumulative.begin())];
        }
        if (++steps >= step_cap) {
          if (++restarts > kMaxRestarts) break;
          node = starts[pick_start(rng)];
          steps = 0;
        }
      }
    }
  });

  double p[2][2] = {{0, 0}, {0, 0}};
  for (int from = 0; from < 2; ++from) {
    std::uint64_t hits[2] = {0, 0};
    for (std::size_t chunk = 0; chunk < chunks; ++chunk)
      for (int b = 0; b < 2; ++b) hits[b] += absorbed[static_cast<std::size_t>(from) * chunks + chunk][b];
    for (int b = 0; b < 2; ++b) p[from][b] = static_cast<double>(hits[b]) / static_cast<double>(walks);
  }
  RwcReport r = RwcReport::from_probabilities(p[0][0], p[0][1], p[1][0], p[1][1]);
  r.method = RwcMethod::MonteCarlo;
  r.hub_k = hub_k;
  r.walks = walks;
  return r;
}

RwcReport rwc_montecarlo(const DirectedWeightedGraph& g, const std::map<UserId, int>& sides, std::size_t hub_k,
                         std::size_t walks, std::uint64_t seed, unsigned threads) {
  return rwc_montecarlo(g, side_vector(g, sides), hub_k, walks, seed, threads);
}

}  // namespace echochamber
