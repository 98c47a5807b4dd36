#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "echochamber/graph.hpp"
#include "echochamber/labels.hpp"

namespace echochamber {

/// Mean leaning of a user's in- and out-neighbors (unweighted adjacency).
struct NeighborLeaning {
  UserId user;
  std::optional<double> in_avg;   // empty without scored in-neighbors
  std::optional<double> out_avg;  // empty without scored out-neighbors
  double own = 0.0;
};

/// One record per scored node, in node order. Unscored nodes are dropped from
/// the output and from every neighbor set.
std::vector<NeighborLeaning> neighbor_leanings(const DirectedWeightedGraph& g, const std::map<UserId, double>& scores);

/// Bin of a value in [0, 1] among `bins` equal-width bins; 1.0 lands in the last.
std::size_t leaning_bin(double value, std::size_t bins);

/// (in_avg, out_avg) histogram, in-bin major.
struct DensityGrid {
  std::size_t bins = 0;
  std::vector<std::uint64_t> counts;

  std::uint64_t at(std::size_t in_bin, std::size_t out_bin) const { return counts[in_bin * bins + out_bin]; }
  std::uint64_t total() const;
};

using RecordFilter = std::function<bool(const NeighborLeaning&)>;

/// Records lacking either average are skipped, as are those the filter rejects.
/// Throws InvalidArgument when bins < 2.
DensityGrid leaning_density(std::span<const NeighborLeaning> records, std::size_t bins, const RecordFilter& keep = {});

/// Keeps users carrying the given label.
RecordFilter label_filter(const LabelMap& labels, StanceLabel side);

struct Binning {
  enum class Kind { Log2, Linear };
  Kind kind = Kind::Log2;
  std::size_t width = 1;  // linear bins only

  /// Inclusive degree range of the bin holding `degree`. Log2 bins are
  /// [2^k, 2^(k+1) - 1], with degree 0 in its own bin.
  std::pair<std::size_t, std::size_t> bin_of(std::size_t degree) const;
};

struct SpectrumPoint {
  std::size_t bin_lo = 0;
  std::size_t bin_hi = 0;
  double mean = 0.0;
  std::size_t count = 0;
};

/// Degree of every node in the undirected simple projection.
std::vector<std::size_t> projected_degrees(const DirectedWeightedGraph& g);

/// Local clustering on the undirected simple projection. Nodes with projected
/// degree below 2 get 0.
std::vector<double> local_clustering(const DirectedWeightedGraph& g);

/// Mean local clustering per out-degree bin. Nodes with projected degree
/// below 2 are skipped unless include_low_degree is set.
std::vector<SpectrumPoint> clustering_spectrum(const DirectedWeightedGraph& g, const Binning& binning,
                                               bool include_low_degree = false);

/// Mean total (in + out) degree of each node's out-neighbors; empty for
/// nodes without out-edges.
std::vector<std::optional<double>> out_neighbor_degree(const DirectedWeightedGraph& g);

/// out_neighbor_degree averaged per out-degree bin.
std::vector<SpectrumPoint> knn_spectrum(const DirectedWeightedGraph& g, const Binning& binning);

/// Pearson correlation; 0 when either series is constant.
double pearson(std::span<const double> x, std::span<const double> y);

/// Correlation between own score and out-neighbor average, over users that
/// have one.
double echo_chamber_correlation(std::span<const NeighborLeaning> records);

/// `bin_lo,bin_hi,mean,count`
void write_spectrum_csv(std::span<const SpectrumPoint> points, const std::filesystem::path& path);
/// `in_bin,out_bin,count`, every cell including zeros.
void write_density_csv(const DensityGrid& grid, const std::filesystem::path& path);
/// `user,in_avg,out_avg,own` with empty fields for undefined averages.
void write_neighbor_leanings_csv(std::span<const NeighborLeaning> records, const std::filesystem::path& path);

}  // namespace echochamber
