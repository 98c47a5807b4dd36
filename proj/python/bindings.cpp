#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "echochamber/communities.hpp"
#include "echochamber/controversy.hpp"
#include "echochamber/echo_metrics.hpp"
#include "echochamber/graph.hpp"
#include "echochamber/partition.hpp"
#include "echochamber/pipeline.hpp"
#include "echochamber/synth.hpp"

namespace py = pybind11;
using namespace echochamber;

namespace {

using EdgeTuple = std::tuple<std::string, std::string, Weight>;

DirectedWeightedGraph from_edges(const std::vector<EdgeTuple>& edges) {
  GraphBuilder b;
  for (const auto& [s, t, w] : edges) b.add_edge(s, t, w);
  return b.build();
}

std::vector<EdgeTuple> edge_list(const DirectedWeightedGraph& g) {
  std::vector<EdgeTuple> out;
  for (const auto& e : g.edges()) out.emplace_back(g.id(e.source), g.id(e.target), e.weight);
  return out;
}

py::dict rwc_dict(const RwcReport& r) {
  py::dict d;
  d["pxx"] = r.pxx;
  d["pxy"] = r.pxy;
  d["pyx"] = r.pyx;
  d["pyy"] = r.pyy;
  d["rwc"] = r.rwc;
  d["method"] = std::string(to_string(r.method));
  d["hub_k"] = r.hub_k;
  d["walks"] = r.walks;
  return d;
}

PartitionConfig partition_config(std::size_t runs, double balance_ratio, std::uint64_t seed, unsigned threads) {
  PartitionConfig c;
  c.runs = runs;
  c.balance_ratio = balance_ratio;
  c.rng_seed = seed;
  c.threads = threads;
  return c;
}

}  // namespace

PYBIND11_MODULE(_echochamber, m) {
  m.doc() = "Echo-chamber analysis of polarized retweet networks";
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<pipeline::UsageError>(m, "UsageError", PyExc_ValueError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);

  py::class_<DirectedWeightedGraph>(m, "Graph")
      .def(py::init(&from_edges), py::arg("edges"), "Build from (source, target, weight) tuples.")
      .def_property_readonly("node_count", &DirectedWeightedGraph::node_count)
      .def_property_readonly("edge_count", &DirectedWeightedGraph::edge_count)
      .def_property_readonly("ids", &DirectedWeightedGraph::ids)
      .def("edges", &edge_list)
      .def("__len__", &DirectedWeightedGraph::node_count)
      .def("__eq__", [](const DirectedWeightedGraph& a, const DirectedWeightedGraph& b) { return a == b; });

  m.def("read_edge_list", py::overload_cast<const std::filesystem::path&>(&read_edge_list), py::arg("path"));
  m.def("write_edge_list", py::overload_cast<const DirectedWeightedGraph&, const std::filesystem::path&>(&write_edge_list),
        py::arg("graph"), py::arg("path"));
  m.def("threshold_edges", &threshold_edges, py::arg("graph"), py::arg("min_weight"));
  m.def("giant_component", &giant_component, py::arg("graph"));
  m.def("reciprocity", [](const DirectedWeightedGraph& g) { return reciprocity(g).value; }, py::arg("graph"));

  m.def(
      "ensemble_leaning",
      [](const DirectedWeightedGraph& g, std::size_t runs, double balance_ratio, std::uint64_t seed, unsigned threads) {
        std::map<UserId, double> out;
        for (const auto& s : ensemble_leaning(g, partition_config(runs, balance_ratio, seed, threads)))
          out[s.user] = s.score;
        return out;
      },
      py::arg("graph"), py::arg("runs") = 100, py::arg("balance_ratio") = 1.0, py::arg("seed") = 0,
      py::arg("threads") = 1, py::call_guard<py::gil_scoped_release>());
  m.def(
      "tune_balance",
      [](const DirectedWeightedGraph& g, const std::vector<double>& grid, std::size_t runs, std::uint64_t seed) {
        const auto r = tune_balance(g, grid, partition_config(runs, 1.0, seed, 1));
        std::vector<std::pair<double, std::size_t>> candidates;
        for (const auto& c : r.candidates) candidates.emplace_back(c.balance_ratio, c.extreme);
        return std::make_pair(r.best_ratio, candidates);
      },
      py::arg("graph"), py::arg("grid"), py::arg("runs") = 100, py::arg("seed") = 0,
      py::call_guard<py::gil_scoped_release>());

  m.def(
      "rwc_exact",
      [](const DirectedWeightedGraph& g, const std::map<UserId, int>& sides, std::size_t hub_k) {
        return rwc_dict(rwc_exact(g, sides, hub_k));
      },
      py::arg("graph"), py::arg("sides"), py::arg("hub_k") = 10);
  m.def(
      "rwc_montecarlo",
      [](const DirectedWeightedGraph& g, const std::map<UserId, int>& sides, std::size_t hub_k, std::size_t walks,
         std::uint64_t seed) { return rwc_dict(rwc_montecarlo(g, sides, hub_k, walks, seed, 1)); },
      py::arg("graph"), py::arg("sides"), py::arg("hub_k") = 10, py::arg("walks") = 100000, py::arg("seed") = 0);

  m.def(
      "detect_communities",
      [](const DirectedWeightedGraph& g) {
        const auto r = detect_communities(g);
        std::map<UserId, std::uint32_t> assignment;
        for (NodeIndex v = 0; v < g.node_count(); ++v) assignment[g.id(v)] = r.assignment[v];
        return std::make_pair(assignment, r.modularity);
      },
      py::arg("graph"));
  m.def(
      "echo_chamber_correlation",
      [](const DirectedWeightedGraph& g, const std::map<UserId, double>& scores) {
        return echo_chamber_correlation(neighbor_leanings(g, scores));
      },
      py::arg("graph"), py::arg("scores"));
  m.def("local_clustering", &local_clustering, py::arg("graph"));

  m.def(
      "generate_sbm",
      [](std::size_t n0, std::size_t n1, double p_in, double p_out, double cross_asymmetry, std::uint64_t seed) {
        synth::SbmConfig c;
        c.n0 = n0;
        c.n1 = n1;
        c.p_in = p_in;
        c.p_out = p_out;
        c.cross_asymmetry = cross_asymmetry;
        c.seed = seed;
        auto s = synth::generate_sbm(c);
        return std::make_pair(std::move(s.graph), std::move(s.planted));
      },
      py::arg("n0") = 100, py::arg("n1") = 100, py::arg("p_in") = 0.1, py::arg("p_out") = 0.01,
      py::arg("cross_asymmetry") = 0.0, py::arg("seed") = 0);

  m.def(
      "run_subcommand",
      [](const std::string& name, const std::map<std::string, std::string>& config) {
        pipeline::Config cfg;
        for (const auto& [k, v] : config) cfg.set(k, v);
        py::gil_scoped_release release;
        pipeline::run_subcommand(name, cfg);
      },
      py::arg("name"), py::arg("config") = std::map<std::string, std::string>{});
  m.def("subcommands", &pipeline::subcommands);
  m.def("config_defaults", [] {
    std::map<std::string, std::string> out;
    for (const auto& k : pipeline::config_keys()) out[k.name] = k.default_value;
    return out;
  });
  m.attr("__version__") = pipeline::version();
}
