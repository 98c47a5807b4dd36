#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "echochamber/graph.hpp"
#include "json.hpp"

namespace echochamber {

enum class RwcMethod { Exact, MonteCarlo };

std::string_view to_string(RwcMethod m);

/// Walk probabilities between sides X (0) and Y (1). P_AB is the chance that a
/// walk started at an average non-hub user of side A ends at a hub of side B.
struct RwcReport {
  double pxx = 0.0;
  double pxy = 0.0;
  double pyx = 0.0;
  double pyy = 0.0;
  /// Always pxx * pyy - pxy * pyx on the fields above.
  double rwc = 0.0;
  RwcMethod method = RwcMethod::Exact;
  std::size_t hub_k = 0;
  std::size_t walks = 0;  // per side; 0 for the exact solver
  /// Largest absolute residual of the linear solves (exact method only).
  double residual = 0.0;

  static RwcReport from_probabilities(double pxx, double pxy, double pyx, double pyy);
  nlohmann::json to_json() const;
};

/// Per-node side (0 = X, 1 = Y) from a map that must cover every node.
std::vector<std::uint8_t> side_vector(const DirectedWeightedGraph& g, const std::map<UserId, int>& sides);

/// The k nodes of a side with the highest in-degree; ties by higher
/// in-strength, then by id.
std::vector<NodeIndex> select_hubs(const DirectedWeightedGraph& g, std::span<const std::uint8_t> side, int which,
                                   std::size_t k);

struct ExactSolverOptions {
  /// Dense LU below this many unknowns, sparse iterative solve above.
  std::size_t dense_limit = 2000;
  double residual_tolerance = 1e-10;
};

/// Absorbing-chain solution. Hubs absorb; other nodes follow out-edges in
/// proportion to weight; a node without out-edges sends the walker to a
/// uniformly random non-hub node of the side the walk started on. Nodes that
/// cannot reach any hub are never absorbed, so P_AX + P_AY can fall below 1.
/// Throws InvalidArgument when a side has fewer than hub_k + 1 nodes.
RwcReport rwc_exact(const DirectedWeightedGraph& g, std::span<const std::uint8_t> side, std::size_t hub_k,
                    const ExactSolverOptions& opts = {});
RwcReport rwc_exact(const DirectedWeightedGraph& g, const std::map<UserId, int>& sides, std::size_t hub_k,
                    const ExactSolverOptions& opts = {});

/// Simulates `walks` walks per side. A walk that runs 10 * |nodes| steps
/// restarts from a fresh start node; after 100 restarts it is counted as
/// unabsorbed. Results do not depend on `threads`.
RwcReport rwc_montecarlo(const DirectedWeightedGraph& g, std::span<const std::uint8_t> side, std::size_t hub_k,
                         std::size_t walks, std::uint64_t seed, unsigned threads = 1);
RwcReport rwc_montecarlo(const DirectedWeightedGraph& g, const std::map<UserId, int>& sides, std::size_t hub_k,
                         std::size_t walks, std::uint64_t seed, unsigned threads = 1);

/// (P_XY, P_YX).
std::pair<double, double> mention_asymmetry(const RwcReport& report);

}  // namespace echochamber
