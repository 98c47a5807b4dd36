#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "echochamber/graph.hpp"
#include "echochamber/labels.hpp"

namespace echochamber {

struct PartitionConfig {
  std::size_t runs = 100;
  /// Target side sizes 1:r (side 0 is the smaller one).
  double balance_ratio = 1.0;
  /// Allowed deviation of side 0 from its target, as a fraction of nodes.
  double balance_tolerance = 0.03;
  std::size_t coarsen_stop = 100;
  double extremity_epsilon = 0.05;
  std::uint64_t rng_seed = 0;
  unsigned initial_tries = 4;
  unsigned threads = 1;

  void validate() const;
};

struct LevelTrace {
  std::size_t nodes = 0;
  std::int64_t cut_before = 0;  // after projection, before refinement
  std::int64_t cut_after = 0;
  /// The projected partition was outside this level's balance window, so
  /// refinement had to trade cut for balance.
  bool rebalanced = false;
};

struct Bipartition {
  std::vector<std::uint8_t> side;  // per node index, 0 or 1
  std::int64_t cut = 0;            // on the symmetrized graph
  std::size_t side0_size = 0;
  /// Coarsest level first.
  std::vector<LevelTrace> levels;

  std::map<UserId, int> as_map(const DirectedWeightedGraph& g) const;
};

/// One multilevel bipartition: heavy-edge matching coarsening, greedy region
/// growing at the coarsest level, Fiduccia-Mattheyses refinement on every level.
/// Throws InvalidArgument on a disconnected graph or fewer than two nodes.
Bipartition bipartition_once(const DirectedWeightedGraph& g, double balance_ratio, std::uint64_t seed,
                             const PartitionConfig& cfg = {});

/// Weighted cut of a side assignment on the symmetrized graph.
std::int64_t cut_weight(const DirectedWeightedGraph& g, std::span<const std::uint8_t> side);

struct LeaningScore {
  UserId user;
  double score = 0.0;
  std::size_t runs = 0;
};

/// Mean side assignment over cfg.runs bipartitions, each run polarity-aligned
/// to run 0 by majority overlap. Ordered by node index.
std::vector<LeaningScore> ensemble_leaning(const DirectedWeightedGraph& g, const PartitionConfig& cfg);

std::size_t extremity_count(std::span<const LeaningScore> scores, double epsilon);
inline bool is_extreme(double score, double epsilon) { return score <= epsilon || score >= 1.0 - epsilon; }

struct BalanceCandidate {
  double balance_ratio = 1.0;
  std::size_t extreme = 0;
  std::vector<LeaningScore> scores;
};

struct TuneResult {
  double best_ratio = 1.0;
  std::vector<BalanceCandidate> candidates;  // grid order

  const BalanceCandidate& best() const;
};

/// Runs the ensemble for every ratio in the grid and keeps the one with the
/// most extreme users; ties prefer the smaller ratio.
TuneResult tune_balance(const DirectedWeightedGraph& g, std::span<const double> grid, const PartitionConfig& cfg);

struct StanceAssignment {
  std::map<UserId, StanceLabel> labels;
  /// True when side 0 (score near 0) turned out to be the Advocate side.
  bool flipped = false;
  std::vector<std::string> warnings;
};

/// Gives the partition sides their meaning from seed users: the polarity that
/// the majority of extreme seeds agree with wins. Extreme users are labeled,
/// the rest are Unassigned. Throws InvalidArgument on a tied or empty vote.
StanceAssignment assign_stances(std::span<const LeaningScore> scores, const LabelMap& seeds, double epsilon);

/// Scores re-oriented so that 0 means Skeptic and 1 means Advocate.
std::vector<LeaningScore> orient_scores(std::span<const LeaningScore> scores, const StanceAssignment& assignment);

std::map<UserId, double> score_map(std::span<const LeaningScore> scores);

}  // namespace echochamber
