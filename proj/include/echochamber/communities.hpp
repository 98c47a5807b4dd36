#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "echochamber/graph.hpp"

namespace echochamber {

struct CommunityResult {
  /// Community per node index. Communities are numbered by size descending,
  /// ties broken by their smallest node index.
  std::vector<std::uint32_t> assignment;
  std::size_t count = 0;
  double modularity = 0.0;
};

/// Modularity of an assignment on the symmetrized weighted graph.
double modularity(const DirectedWeightedGraph& g, std::span<const std::uint32_t> assignment);

/// Multilevel (Louvain) modularity maximization on symmetrized weights.
/// Nodes are visited in index order, so the result is deterministic.
/// Throws InvalidArgument on an empty graph.
CommunityResult detect_communities(const DirectedWeightedGraph& g);

struct CommunitySummary {
  std::uint32_t community = 0;
  std::size_t size = 0;
  std::optional<double> mean_leaning;  // over members with scores
  UserId top_user;                     // largest in-degree, ties by id
};

/// One summary per community, sorted by size descending.
std::vector<CommunitySummary> summarize_communities(const DirectedWeightedGraph& g, const CommunityResult& result,
                                                    const std::map<UserId, double>& scores);

/// `community,size,mean_leaning,top_user`
void write_community_csv(std::span<const CommunitySummary> summaries, const std::filesystem::path& path);
/// `user,community`
void write_assignment_csv(const DirectedWeightedGraph& g, const CommunityResult& result,
                          const std::filesystem::path& path);

}  // namespace echochamber
