#include "echochamber/echo_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "echochamber/util.hpp"

namespace echochamber {

std::vector<NeighborLeaning> neighbor_leanings(const DirectedWeightedGraph& g, const std::map<UserId, double>& scores) {
  std::vector<std::optional<double>> score(g.node_count());
  for (NodeIndex v = 0; v < g.node_count(); ++v) {
    auto it = scores.find(g.id(v));
    if (it != scores.end()) score[v] = it->second;
  }
  auto average = [&](std::span<const Arc> arcs) -> std::optional<double> {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& a : arcs)
      if (score[a.node]) {
        sum += *score[a.node];
        ++count;
      }
    if (count == 0) return std::nullopt;
    return sum / static_cast<double>(count);
  };
  std::vector<NeighborLeaning> out;
  for (NodeIndex v = 0; v < g.node_count(); ++v) {
    if (!score[v]) continue;
    out.push_back({g.id(v), average(g.in_arcs(v)), average(g.out_arcs(v)), *score[v]});
  }
  return out;
}

std::size_t leaning_bin(double value, std::size_t bins) {
  auto b = static_cast<std::size_t>(std::floor(std::clamp(value, 0.0, 1.0) * static_cast<double>(bins)));
  return std::min(b, bins - 1);
}

std::uint64_t DensityGrid::total() const {
  std::uint64_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

DensityGrid leaning_density(std::span<const NeighborLeaning> records, std::size_t bins, const RecordFilter& keep) {
  if (bins < 2) throw InvalidArgument("density needs at least 2 bins");
  DensityGrid grid;
  grid.bins = bins;
  grid.counts.assign(bins * bins, 0);
  for (const auto& r : records) {
    if (!r.in_avg || !r.out_avg) continue;
    if (keep && !keep(r)) continue;
    ++grid.counts[leaning_bin(*r.in_avg, bins) * bins + leaning_bin(*r.out_avg, bins)];
  }
  return grid;
}

RecordFilter label_filter(const LabelMap& labels, StanceLabel side) {
  return [&labels, side](const NeighborLeaning& r) {
    auto it = labels.find(r.user);
    return it != labels.end() && it->second == side;
  };
}

std::pair<std::size_t, std::size_t> Binning::bin_of(std::size_t degree) const {
  if (kind == Kind::Linear) {
    if (width < 1) throw InvalidArgument("linear bin width must be >= 1");
    const std::size_t lo = degree / width * width;
    return {lo, lo + width - 1};
  }
  if (degree == 0) return {0, 0};
  std::size_t lo = 1;
  while (lo <= degree / 2) lo *= 2;
  return {lo, 2 * lo - 1};
}

namespace {

// Sorted neighbor lists of the undirected simple projection.
std::vector<std::vector<NodeIndex>> projection(const DirectedWeightedGraph& g) {
  std::vector<std::vector<NodeIndex>> nb(g.node_count());
  for (NodeIndex v = 0; v < g.node_count(); ++v) {
    for (const auto& a : g.out_arcs(v)) nb[v].push_back(a.node);
    for (const auto& a : g.in_arcs(v)) nb[v].push_back(a.node);
    std::sort(nb[v].begin(), nb[v].end());
    nb[v].erase(std::unique(nb[v].begin(), nb[v].end()), nb[v].end());
  }
  return nb;
}

std::vector<SpectrumPoint> bin_values(const DirectedWeightedGraph& g, const Binning& binning,
                                      const std::vector<std::optional<double>>& values) {
  std::map<std::size_t, SpectrumPoint> bins;
  std::map<std::size_t, double> sums;
  for (NodeIndex v = 0; v < g.node_count(); ++v) {
    if (!values[v]) continue;
    auto [lo, hi] = binning.bin_of(g.out_degree(v));
    auto& p = bins[lo];
    p.bin_lo = lo;
    p.bin_hi = hi;
    ++p.count;
    sums[lo] += *values[v];
  }
  std::vector<SpectrumPoint> out;
  for (auto& [lo, p] : bins) {
    p.mean = sums[lo] / static_cast<double>(p.count);
    out.push_back(p);
  }
  return out;
}

}  // namespace

std::vector<std::size_t> projected_degrees(const DirectedWeightedGraph& g) {
  auto nb = projection(g);
  std::vector<std::size_t> k(nb.size());
  for (std::size_t v = 0; v < nb.size(); ++v) k[v] = nb[v].size();
  return k;
}

std::vector<double> local_clustering(const DirectedWeightedGraph& g) {
  const auto nb = projection(g);
  std::vector<double> c(g.node_count(), 0.0);
  std::vector<bool> mark(g.node_count(), false);
  for (NodeIndex v = 0; v < g.node_count(); ++v) {
    const std::size_t k = nb[v].size();
    if (k < 2) continue;
    for (NodeIndex u : nb[v]) mark[u] = true;
    std::uint64_t links = 0;  // each neighbor pair seen from both ends
    for (NodeIndex u : nb[v])
      for (NodeIndex w : nb[u])
        if (mark[w]) ++links;
    for (NodeIndex u : nb[v]) mark[u] = false;
    c[v] = static_cast<double>(links) / static_cast<double>(k * (k - 1));
  }
  return c;
}

std::vector<SpectrumPoint> clustering_spectrum(const DirectedWeightedGraph& g, const Binning& binning,
                                               bool include_low_degree) {
  const auto c = local_clustering(g);
  const auto k = projected_degrees(g);
  std::vector<std::optional<double>> values(g.node_count());
  for (NodeIndex v = 0; v < g.node_count(); ++v)
    if (include_low_degree || k[v] >= 2) values[v] = c[v];
  return bin_values(g, binning, values);
}

std::vector<std::optional<double>> out_neighbor_degree(const DirectedWeightedGraph& g) {
  std::vector<std::optional<double>> knn(g.node_count());
  for (NodeIndex v = 0; v < g.node_count(); ++v) {
    if (g.out_degree(v) == 0) continue;
    std::uint64_t sum = 0;
    for (const auto& a : g.out_arcs(v)) sum += g.in_degree(a.node) + g.out_degree(a.node);
    knn[v] = static_cast<double>(sum) / static_cast<double>(g.out_degree(v));
  }
  return knn;
}

std::vector<SpectrumPoint> knn_spectrum(const DirectedWeightedGraph& g, const Binning& binning) {
  return bin_values(g, binning, out_neighbor_degree(g));
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidArgument("pearson needs equally long series");
  if (x.empty()) return 0.0;
  const auto n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

double echo_chamber_correlation(std::span<const NeighborLeaning> records) {
  std::vector<double> own, nb;
  for (const auto& r : records)
    if (r.out_avg) {
      own.push_back(r.own);
      nb.push_back(*r.out_avg);
    }
  return pearson(own, nb);
}

namespace {

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

}  // namespace

void write_spectrum_csv(std::span<const SpectrumPoint> points, const std::filesystem::path& path) {
  auto out = open_csv(path);
  out << "bin_lo,bin_hi,mean,count\n";
  for (const auto& p : points) out << p.bin_lo << ',' << p.bin_hi << ',' << format_double(p.mean) << ',' << p.count << '\n';
}

void write_density_csv(const DensityGrid& grid, const std::filesystem::path& path) {
  auto out = open_csv(path);
  out << "in_bin,out_bin,count\n";
  for (std::size_t i = 0; i < grid.bins; ++i)
    for (std::size_t j = 0; j < grid.bins; ++j) out << i << ',' << j << ',' << grid.at(i, j) << '\n';
}

void write_neighbor_leanings_csv(std::span<const NeighborLeaning> records, const std::filesystem::path& path) {
  auto out = open_csv(path);
  out << "user,in_avg,out_avg,own\n";
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  for (const auto& r : records) out << r.user << ',' << opt(r.in_avg) << ',' << opt(r.out_avg) << ',' << format_double(r.own) << '\n';
}

}  // namespace echochamber
