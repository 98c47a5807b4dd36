#include "echochamber/partition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <tuple>

#include "echochamber/util.hpp"

namespace echochamber {

void PartitionConfig::validate() const {
  if (runs < 1) throw InvalidArgument("runs must be >= 1");
  if (!(balance_ratio >= 1.0)) throw InvalidArgument("balance_ratio must be >= 1");
  if (!(balance_tolerance >= 0.0)) throw InvalidArgument("balance_tolerance must be >= 0");
  if (!(extremity_epsilon > 0.0 && extremity_epsilon < 0.5)) throw InvalidArgument("extremity_epsilon must lie in (0, 0.5)");
  if (coarsen_stop < 2) throw InvalidArgument("coarsen_stop must be >= 2");
  if (initial_tries < 1) throw InvalidArgument("initial_tries must be >= 1");
}

namespace {

// Undirected weighted graph at one coarsening level.
struct Level {
  std::vector<std::size_t> offsets{0};
  std::vector<NodeIndex> adj;
  std::vector<std::int64_t> ewgt;
  std::vector<std::int64_t> vwgt;
  // For every node of this level, its node in the next coarser level.
  std::vector<NodeIndex> coarse_of;

  std::size_t n() const { return vwgt.size(); }
  std::int64_t total_vwgt() const { return std::accumulate(vwgt.begin(), vwgt.end(), std::int64_t{0}); }
  std::int64_t max_vwgt() const { return vwgt.empty() ? 0 : *std::max_element(vwgt.begin(), vwgt.end()); }
};

Level finest_level(const DirectedWeightedGraph& g) {
  SymmetricGraph s = symmetrize(g);
  Level L;
  L.offsets = std::move(s.offsets);
  L.adj = std::move(s.neighbors);
  L.ewgt.reserve(s.weights.size());
  for (double w : s.weights) L.ewgt.push_back(static_cast<std::int64_t>(w));
  L.vwgt.assign(g.node_count(), 1);
  return L;
}

// Heavy-edge matching in random visiting order; unmatched nodes carry over alone.
Level coarsen(Level& fine, Rng& rng, std::int64_t max_vwgt) {
  const std::size_t n = fine.n();
  constexpr NodeIndex kUnmatched = static_cast<NodeIndex>(-1);
  std::vector<NodeIndex> order(n);
  std::iota(order.begin(), order.end(), NodeIndex{0});
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<NodeIndex> match(n, kUnmatched);
  for (NodeIndex u : order) {
    if (match[u] != kUnmatched) continue;
    NodeIndex best = kUnmatched;
    std::int64_t best_w = 0;
    for (std::size_t k = fine.offsets[u]; k < fine.offsets[u + 1]; ++k) {
      NodeIndex v = fine.adj[k];
      if (match[v] != kUnmatched || fine.vwgt[u] + fine.vwgt[v] > max_vwgt) continue;
      if (fine.ewgt[k] > best_w) {
        best_w = fine.ewgt[k];
        best = v;
      }
    }
    if (best == kUnmatched) {
      match[u] = u;
    } else {
      match[u] = best;
      match[best] = u;
    }
  }

  fine.coarse_of.assign(n, kUnmatched);
  std::vector<std::pair<NodeIndex, NodeIndex>> members;
  for (NodeIndex u = 0; u < n; ++u) {
    if (fine.coarse_of[u] != kUnmatched) continue;
    auto c = static_cast<NodeIndex>(members.size());
    fine.coarse_of[u] = c;
    fine.coarse_of[match[u]] = c;
    members.emplace_back(u, match[u]);
  }

  Level coarse;
  const std::size_t nc = members.size();
  coarse.vwgt.resize(nc);
  coarse.offsets.assign(nc + 1, 0);
  std::vector<std::int64_t> acc(nc, 0);
  std::vector<NodeIndex> touched;
  for (NodeIndex c = 0; c < nc; ++c) {
    auto [a, b] = members[c];
    coarse.vwgt[c] = fine.vwgt[a] + (a == b ? 0 : fine.vwgt[b]);
    for (NodeIndex u : {a, b}) {
      for (std::size_t k = fine.offsets[u]; k < fine.offsets[u + 1]; ++k) {
        NodeIndex cv = fine.coarse_of[fine.adj[k]];
        if (cv == c) continue;
        if (acc[cv] == 0) touched.push_back(cv);
        acc[cv] += fine.ewgt[k];
      }
      if (a == b) break;
    }
    std::sort(touched.begin(), touched.end());
    for (NodeIndex cv : touched) {
      coarse.adj.push_back(cv);
      coarse.ewgt.push_back(acc[cv]);
      acc[cv] = 0;
    }
    touched.clear();
    coarse.offsets[c + 1] = coarse.adj.size();
  }
  return coarse;
}

std::int64_t level_cut(const Level& L, const std::vector<std::uint8_t>& side) {
  std::int64_t cut = 0;
  for (NodeIndex u = 0; u < L.n(); ++u)
    for (std::size_t k = L.offsets[u]; k < L.offsets[u + 1]; ++k)
      if (L.adj[k] > u && side[u] != side[L.adj[k]]) cut += L.ewgt[k];
  return cut;
}

struct Balance {
  double target0 = 0;
  double allowed = 0;
  std::int64_t total = 0;

  double imbalance(std::int64_t w0) const { return std::abs(static_cast<double>(w0) - target0); }
  bool feasible(std::int64_t w0) const { return w0 > 0 && w0 < total && imbalance(w0) <= allowed; }
};

// Lexicographic quality of a state: feasible states first by cut, then
// infeasible ones by imbalance.
struct StateKey {
  bool feasible = false;
  double first = 0;
  double second = 0;

  bool better_than(const StateKey& o) const {
    if (feasible != o.feasible) return feasible;
    if (first != o.first) return first < o.first;
    return second < o.second;
  }
};

StateKey state_key(const Balance& bal, std::int64_t cut, std::int64_t w0) {
  if (bal.feasible(w0)) return {true, static_cast<double>(cut), bal.imbalance(w0)};
  return {false, bal.imbalance(w0) + (w0 > 0 && w0 < bal.total ? 0.0 : 1e18), static_cast<double>(cut)};
}

// Nodes bucketed by integer gain; the most recently inserted node of the
// highest non-empty bucket comes out first.
class GainBuckets {
 public:
  static constexpr NodeIndex kNone = static_cast<NodeIndex>(-1);

  void reset(std::size_t n, std::int64_t max_gain) {
    offset_ = max_gain;
    head_.assign(static_cast<std::size_t>(2 * max_gain + 1), kNone);
    next_.assign(n, kNone);
    prev_.assign(n, kNone);
    top_ = -1;
    size_ = 0;
  }
  bool empty() const { return size_ == 0; }

  void insert(NodeIndex v, std::int64_t gain) {
    const auto b = static_cast<std::size_t>(gain + offset_);
    next_[v] = head_[b];
    prev_[v] = kNone;
    if (head_[b] != kNone) prev_[head_[b]] = v;
    head_[b] = v;
    top_ = std::max(top_, static_cast<std::int64_t>(b));
    ++size_;
  }
  void remove(NodeIndex v, std::int64_t gain) {
    const auto b = static_cast<std::size_t>(gain + offset_);
    if (prev_[v] != kNone) next_[prev_[v]] = next_[v];
    else head_[b] = next_[v];
    if (next_[v] != kNone) prev_[next_[v]] = prev_[v];
    --size_;
  }
  NodeIndex top() {
    while (head_[static_cast<std::size_t>(top_)] == kNone) --top_;
    return head_[static_cast<std::size_t>(top_)];
  }

 private:
  std::int64_t offset_ = 0;
  std::vector<NodeIndex> head_, next_, prev_;
  std::int64_t top_ = -1;
  std::size_t size_ = 0;
};

class FmRefiner {
 public:
  FmRefiner(const Level& level, const Balance& balance, Rng& rng) : L_(level), bal_(balance), rng_(rng) {}

  // Runs passes until one brings no improvement. Never returns a state worse
  // (by StateKey) than the one it was given.
  void refine(std::vector<std::uint8_t>& side, int max_passes = 8) {
    for (int pass = 0; pass < max_passes; ++pass)
      if (!pass_once(side)) break;
  }

 private:
  bool pass_once(std::vector<std::uint8_t>& side) {
    const std::size_t n = L_.n();
    std::vector<NodeIndex> order(n);
    std::iota(order.begin(), order.end(), NodeIndex{0});
    std::shuffle(order.begin(), order.end(), rng_);

    std::vector<std::int64_t> gain(n, 0);
    std::int64_t cut = 0;
    std::int64_t w0 = 0;
    std::int64_t max_gain = 0;
    for (NodeIndex u = 0; u < n; ++u) {
      if (side[u] == 0) w0 += L_.vwgt[u];
      std::int64_t degree = 0;
      for (std::size_t k = L_.offsets[u]; k < L_.offsets[u + 1]; ++k) {
        degree += L_.ewgt[k];
        if (side[L_.adj[k]] != side[u]) {
          gain[u] += L_.ewgt[k];
          if (L_.adj[k] > u) cut += L_.ewgt[k];
        } else {
          gain[u] -= L_.ewgt[k];
        }
      }
      max_gain = std::max(max_gain, degree);
    }

    GainBuckets queue[2];
    queue[0].reset(n, max_gain);
    queue[1].reset(n, max_gain);
    for (NodeIndex u : order) queue[side[u]].insert(u, gain[u]);
    std::vector<bool> locked(n, false);
    std::vector<NodeIndex> moves;
    StateKey best = state_key(bal_, cut, w0);
    std::size_t best_len = 0;
    const std::size_t stall_limit = std::max<std::size_t>(50, n / 20);

    while (true) {
      int pick = -1;
      std::int64_t pick_gain = 0;
      double pick_imb = 0;
      const double cur_imb = bal_.imbalance(w0);
      for (int s = 0; s < 2; ++s) {
        if (queue[s].empty()) continue;
        NodeIndex v = queue[s].top();
        std::int64_t nw0 = s == 0 ? w0 - L_.vwgt[v] : w0 + L_.vwgt[v];
        double nimb = bal_.imbalance(nw0);
        bool ok = bal_.feasible(nw0) || (nimb < cur_imb && nw0 > 0 && nw0 < bal_.total);
        if (!ok) continue;
        if (pick < 0 || gain[v] > pick_gain || (gain[v] == pick_gain && nimb < pick_imb)) {
          pick = s;
          pick_gain = gain[v];
          pick_imb = nimb;
        }
      }
      if (pick < 0) break;

      NodeIndex v = queue[pick].top();
      queue[pick].remove(v, gain[v]);
      locked[v] = true;
      side[v] = static_cast<std::uint8_t>(1 - pick);
      w0 += pick == 0 ? -L_.vwgt[v] : L_.vwgt[v];
      cut -= gain[v];
      gain[v] = -gain[v];
      for (std::size_t k = L_.offsets[v]; k < L_.offsets[v + 1]; ++k) {
        NodeIndex u = L_.adj[k];
        std::int64_t delta = side[u] == side[v] ? -2 * L_.ewgt[k] : 2 * L_.ewgt[k];
        if (locked[u]) {
          gain[u] += delta;
          continue;
        }
        queue[side[u]].remove(u, gain[u]);
        gain[u] += delta;
        queue[side[u]].insert(u, gain[u]);
      }
      moves.push_back(v);

      StateKey key = state_key(bal_, cut, w0);
      if (key.better_than(best)) {
        best = key;
        best_len = moves.size();
      } else if (moves.size() - best_len > stall_limit) {
        break;
      }
    }
    for (std::size_t i = moves.size(); i > best_len; --i) side[moves[i - 1]] ^= 1;
    return best_len > 0;
  }

  const Level& L_;
  const Balance& bal_;
  Rng& rng_;
};

// Grow side 0 from a random seed node, always absorbing the side-1 node with
// the highest move gain, until side 0 reaches its target weight.
std::vector<std::uint8_t> grow_region(const Level& L, const Balance& bal, Rng& rng) {
  const std::size_t n = L.n();
  std::vector<std::uint8_t> side(n, 1);
  std::vector<NodeIndex> rank(n);
  std::iota(rank.begin(), rank.end(), NodeIndex{0});
  std::shuffle(rank.begin(), rank.end(), rng);
  std::vector<std::int64_t> gain(n, 0);
  for (NodeIndex u = 0; u < n; ++u)
    for (std::size_t k = L.offsets[u]; k < L.offsets[u + 1]; ++k) gain[u] -= L.ewgt[k];

  std::set<std::tuple<std::int64_t, NodeIndex, NodeIndex>> queue;
  for (NodeIndex u = 0; u < n; ++u) queue.emplace(-gain[u], rank[u], u);

  std::uniform_int_distribution<NodeIndex> pick(0, static_cast<NodeIndex>(n - 1));
  NodeIndex next = pick(rng);
  std::int64_t w0 = 0;
  while (true) {
    queue.erase({-gain[next], rank[next], next});
    side[next] = 0;
    w0 += L.vwgt[next];
    for (std::size_t k = L.offsets[next]; k < L.offsets[next + 1]; ++k) {
      NodeIndex u = L.adj[k];
      if (side[u] == 0) continue;
      queue.erase({-gain[u], rank[u], u});
      gain[u] += 2 * L.ewgt[k];
      queue.emplace(-gain[u], rank[u], u);
    }
    if (queue.size() <= 1 || static_cast<double>(w0) >= bal.target0) break;
    next = std::get<2>(*queue.begin());
    double overshoot = static_cast<double>(w0 + L.vwgt[next]) - bal.target0;
    if (overshoot > bal.target0 - static_cast<double>(w0)) break;
  }
  return side;
}

Balance make_balance(const Level& L, double ratio, double tolerance) {
  Balance b;
  b.total = L.total_vwgt();
  b.target0 = static_cast<double>(b.total) / (1.0 + ratio);
  b.allowed = std::max(tolerance * static_cast<double>(b.total), static_cast<double>(L.max_vwgt()) / 2.0);
  return b;
}

}  // namespace

std::map<UserId, int> Bipartition::as_map(const DirectedWeightedGraph& g) const {
  std::map<UserId, int> m;
  for (NodeIndex v = 0; v < g.node_count(); ++v) m[g.id(v)] = side[v];
  return m;
}

std::int64_t cut_weight(const DirectedWeightedGraph& g, std::span<const std::uint8_t> side) {
  std::int64_t cut = 0;
  for (const auto& e : g.edges())
    if (side[e.source] != side[e.target]) cut += static_cast<std::int64_t>(e.weight);
  return cut;
}

namespace {

void check_partitionable(const DirectedWeightedGraph& g, double balance_ratio, const PartitionConfig& cfg) {
  PartitionConfig checked = cfg;
  checked.balance_ratio = balance_ratio;
  checked.validate();
  if (g.node_count() < 2) throw InvalidArgument("bipartition needs at least two nodes");
  if (!is_weakly_connected(g))
    throw InvalidArgument("graph is not weakly connected; restrict it with giant_component first");
}

Bipartition bipartition_level(const Level& finest, double balance_ratio, std::uint64_t seed,
                              const PartitionConfig& cfg) {
  Rng rng(seed);
  std::vector<Level> levels;
  levels.push_back(finest);
  const auto total = static_cast<double>(levels.front().total_vwgt());
  const auto max_vwgt =
      std::max<std::int64_t>(1, static_cast<std::int64_t>(1.5 * total / static_cast<double>(cfg.coarsen_stop)));
  while (levels.back().n() > cfg.coarsen_stop) {
    Level next = coarsen(levels.back(), rng, max_vwgt);
    if (static_cast<double>(next.n()) > 0.95 * static_cast<double>(levels.back().n())) {
      levels.back().coarse_of.clear();
      break;
    }
    levels.push_back(std::move(next));
  }

  Bipartition result;
  const Level& coarsest = levels.back();
  const Balance coarse_bal = make_balance(coarsest, balance_ratio, cfg.balance_tolerance);
  std::vector<std::uint8_t> side;
  StateKey best_key;
  std::int64_t initial_cut = 0;
  for (unsigned attempt = 0; attempt < cfg.initial_tries; ++attempt) {
    auto candidate = grow_region(coarsest, coarse_bal, rng);
    std::int64_t grown_cut = level_cut(coarsest, candidate);
    FmRefiner(coarsest, coarse_bal, rng).refine(candidate);
    std::int64_t w0 = 0;
    for (NodeIndex u = 0; u < coarsest.n(); ++u)
      if (candidate[u] == 0) w0 += coarsest.vwgt[u];
    StateKey key = state_key(coarse_bal, level_cut(coarsest, candidate), w0);
    if (attempt == 0 || key.better_than(best_key)) {
      best_key = key;
      side = std::move(candidate);
      initial_cut = grown_cut;
    }
  }
  result.levels.push_back({coarsest.n(), initial_cut, level_cut(coarsest, side)});

  for (std::size_t li = levels.size() - 1; li-- > 0;) {
    const Level& fine = levels[li];
    std::vector<std::uint8_t> projected(fine.n());
    for (NodeIndex u = 0; u < fine.n(); ++u) projected[u] = side[fine.coarse_of[u]];
    side = std::move(projected);
    LevelTrace trace{fine.n(), level_cut(fine, side), 0};
    const Balance bal = make_balance(fine, balance_ratio, cfg.balance_tolerance);
    std::int64_t w0 = 0;
    for (NodeIndex u = 0; u < fine.n(); ++u)
      if (side[u] == 0) w0 += fine.vwgt[u];
    trace.rebalanced = !bal.feasible(w0);
    FmRefiner(fine, bal, rng).refine(side);
    trace.cut_after = level_cut(fine, side);
    result.levels.push_back(trace);
  }

  result.cut = level_cut(levels.front(), side);
  result.side0_size = static_cast<std::size_t>(std::count(side.begin(), side.end(), std::uint8_t{0}));
  result.side = std::move(side);
  return result;
}

}  // namespace

Bipartition bipartition_once(const DirectedWeightedGraph& g, double balance_ratio, std::uint64_t seed,
                             const PartitionConfig& cfg) {
  check_partitionable(g, balance_ratio, cfg);
  return bipartition_level(finest_level(g), balance_ratio, seed, cfg);
}

std::vector<LeaningScore> ensemble_leaning(const DirectedWeightedGraph& g, const PartitionConfig& cfg) {
  check_partitionable(g, cfg.balance_ratio, cfg);
  const Level finest = finest_level(g);
  std::vector<Bipartition> runs(cfg.runs);
  parallel_for(cfg.runs, cfg.threads, [&](std::size_t r) {
    runs[r] = bipartition_level(finest, cfg.balance_ratio, derive_seed(cfg.rng_seed, r), cfg);
  });

  const std::size_t n = g.node_count();
  std::vector<std::size_t> ones(n, 0);
  const auto& reference = runs.front().side;
  for (const auto& run : runs) {
    std::size_t agree = 0;
    for (std::size_t v = 0; v < n; ++v) agree += run.side[v] == reference[v];
    const bool flip = 2 * agree < n;
    for (std::size_t v = 0; v < n; ++v) ones[v] += (run.side[v] ^ static_cast<std::uint8_t>(flip)) == 1;
  }
  std::vector<LeaningScore> scores;
  scores.reserve(n);
  for (NodeIndex v = 0; v < n; ++v)
    scores.push_back({g.id(v), static_cast<double>(ones[v]) / static_cast<double>(cfg.runs), cfg.runs});
  return scores;
}

std::size_t extremity_count(std::span<const LeaningScore> scores, double epsilon) {
  return static_cast<std::size_t>(
      std::count_if(scores.begin(), scores.end(), [&](const LeaningScore& s) { return is_extreme(s.score, epsilon); }));
}

const BalanceCandidate& TuneResult::best() const {
  for (const auto& c : candidates)
    if (c.balance_ratio == best_ratio) return c;
  throw Error("tune result has no candidate for the best ratio");
}

TuneResult tune_balance(const DirectedWeightedGraph& g, std::span<const double> grid, const PartitionConfig& cfg) {
  if (grid.empty()) throw InvalidArgument("balance grid is empty");
  TuneResult result;
  bool have_best = false;
  std::size_t best_extreme = 0;
  for (double r : grid) {
    PartitionConfig run_cfg = cfg;
    run_cfg.balance_ratio = r;
    BalanceCandidate c{r, 0, ensemble_leaning(g, run_cfg)};
    c.extreme = extremity_count(c.scores, cfg.extremity_epsilon);
    if (!have_best || c.extreme > best_extreme || (c.extreme == best_extreme && r < result.best_ratio)) {
      have_best = true;
      best_extreme = c.extreme;
      result.best_ratio = r;
    }
    result.candidates.push_back(std::move(c));
  }
  return result;
}

StanceAssignment assign_stances(std::span<const LeaningScore> scores, const LabelMap& seeds, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 0.5)) throw InvalidArgument("epsilon must lie in (0, 0.5)");
  StanceAssignment out;
  std::map<UserId, double> by_user = score_map(scores);
  // Votes for "side 0 is Skeptic" versus "side 0 is Advocate".
  std::size_t zero_skeptic = 0, zero_advocate = 0;
  for (const auto& [user, label] : seeds) {
    if (label == StanceLabel::Unassigned) continue;
    auto it = by_user.find(user);
    if (it == by_user.end()) {
      out.warnings.push_back("seed user " + user + " has no leaning score; excluded");
      continue;
    }
    double x = it->second;
    if (!is_extreme(x, epsilon)) {
      out.warnings.push_back("seed user " + user + " is not extreme (score " + format_double(x) + "); excluded");
      continue;
    }
    bool side0 = x <= epsilon;
    bool skeptic = label == StanceLabel::Skeptic;
    if (side0 == skeptic) {
      ++zero_skeptic;
    } else {
      ++zero_advocate;
    }
  }
  if (zero_skeptic == 0 && zero_advocate == 0) throw InvalidArgument("no usable seed users");
  if (zero_skeptic == zero_advocate)
    throw InvalidArgument("seed users conflict: " + std::to_string(zero_skeptic) + " votes each way");
  out.flipped = zero_advocate > zero_skeptic;
  const StanceLabel side0 = out.flipped ? StanceLabel::Advocate : StanceLabel::Skeptic;
  for (const auto& s : scores) {
    StanceLabel l = StanceLabel::Unassigned;
    if (s.score <= epsilon) {
      l = side0;
    } else if (s.score >= 1.0 - epsilon) {
      l = opposite(side0);
    }
    out.labels[s.user] = l;
  }
  return out;
}

std::vector<LeaningScore> orient_scores(std::span<const LeaningScore> scores, const StanceAssignment& assignment) {
  std::vector<LeaningScore> out(scores.begin(), scores.end());
  if (assignment.flipped)
    for (auto& s : out) {
      if (s.runs > 0) {
        // Recompute from the run count so a double flip is exact.
        auto ones = std::llround(s.score * static_cast<double>(s.runs));
        s.score = static_cast<double>(static_cast<long long>(s.runs) - ones) / static_cast<double>(s.runs);
      } else {
        s.score = 1.0 - s.score;
      }
    }
  return out;
}

std::map<UserId, double> score_map(std::span<const LeaningScore> scores) {
  std::map<UserId, double> m;
  for (const auto& s : scores) m[s.user] = s.score;
  return m;
}

}  // namespace echochamber
