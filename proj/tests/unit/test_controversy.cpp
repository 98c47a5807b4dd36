#include <random>

#include "doctest.h"
#include "echochamber/controversy.hpp"
#include "echochamber/synth.hpp"
#include "support/random_graphs.hpp"
#include "support/rwc_oracle.hpp"

using namespace echochamber;
using testing_support::node_name;

namespace {

// Two disconnected in-stars: 10 leaves point at one hub each.
DirectedWeightedGraph two_stars(std::map<UserId, int>& sides) {
  GraphBuilder b;
  for (int s = 0; s < 2; ++s) {
    std::string hub = std::string(s == 0 ? "x" : "y") + "hub";
    sides[hub] = s;
    for (int i = 0; i < 10; ++i) {
      std::string leaf = std::string(s == 0 ? "x" : "y") + std::to_string(i);
      b.add_edge(leaf, hub);
      sides[leaf] = s;
    }
  }
  return b.build();
}

std::map<UserId, int> random_sides(const DirectedWeightedGraph& g, std::mt19937_64& rng) {
  std::map<UserId, int> sides;
  std::bernoulli_distribution coin(0.5);
  for (const auto& id : g.ids()) sides[id] = coin(rng) ? 1 : 0;
  return sides;
}

void check_against_oracle(const DirectedWeightedGraph& g, const std::map<UserId, int>& sides, std::size_t hub_k) {
  auto r = rwc_exact(g, sides, hub_k);
  auto o = testing_support::oracle_rwc(g.edge_map(), sides, hub_k);
  CHECK(std::abs(r.pxx - o.p[0][0]) <= 1e-8);
  CHECK(std::abs(r.pxy - o.p[0][1]) <= 1e-8);
  CHECK(std::abs(r.pyx - o.p[1][0]) <= 1e-8);
  CHECK(std::abs(r.pyy - o.p[1][1]) <= 1e-8);
  CHECK(r.rwc == r.pxx * r.pyy - r.pxy * r.pyx);
  CHECK(r.residual <= 1e-10);
}

}  // namespace

TEST_CASE("two disconnected stars are fully polarized") {
  std::map<UserId, int> sides;
  auto g = two_stars(sides);
  auto exact = rwc_exact(g, sides, 1);
  CHECK(exact.pxx == doctest::Approx(1.0));
  CHECK(exact.pyy == doctest::Approx(1.0));
  CHECK(exact.pxy == 0.0);
  CHECK(exact.pyx == 0.0);
  CHECK(exact.rwc == doctest::Approx(1.0));
  for (std::size_t walks : {1u, 7u, 1000u}) {
    auto mc = rwc_montecarlo(g, sides, 1, walks, 3);
    CHECK(mc.rwc == 1.0);
    CHECK(mc.walks == walks);
  }
}

TEST_CASE("report fields") {
  auto r = RwcReport::from_probabilities(0.9, 0.1, 0.1, 0.9);
  CHECK(r.rwc == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(r.rwc == 0.9 * 0.9 - 0.1 * 0.1);
  auto j = r.to_json();
  for (const char* key : {"pxx", "pxy", "pyx", "pyy", "rwc", "method", "hub_k", "walks"}) CHECK(j.contains(key));
  CHECK(j["method"] == "exact");

  auto a = mention_asymmetry(RwcReport::from_probabilities(0.9, 0.1, 0.3, 0.7));
  CHECK(a.first == 0.1);
  CHECK(a.second == 0.3);
  auto sym = mention_asymmetry(RwcReport::from_probabilities(0.8, 0.2, 0.2, 0.8));
  CHECK(sym.first == sym.second);
}

TEST_CASE("hubs are chosen by in-degree, then in-strength, then id") {
  GraphBuilder b;
  b.add_edge("a", "h1");
  b.add_edge("b", "h1");
  b.add_edge("a", "h2", 5);
  b.add_edge("c", "h2");
  b.add_edge("a", "h3", 5);
  b.add_edge("b", "h3");
  auto g = b.build();
  std::vector<std::uint8_t> side(g.node_count(), 0);
  auto hubs = select_hubs(g, side, 0, 2);
  REQUIRE(hubs.size() == 2);
  CHECK(g.id(hubs[0]) == "h2");
  CHECK(g.id(hubs[1]) == "h3");
}

TEST_CASE("rwc_exact matches the dense oracle") {
  SUBCASE("50-node planted graph, hub_k = 3") {
    synth::SbmConfig c;
    c.n0 = 25;
    c.n1 = 25;
    c.p_in = 0.2;
    c.p_out = 0.03;
    c.seed = 5;
    auto sbm = synth::generate_sbm(c);
    check_against_oracle(sbm.graph, sbm.planted, 3);
  }
  SUBCASE("random graphs with dangling nodes and closed cycles") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t n = 20 + static_cast<std::size_t>(trial) * 9;
      const double p = trial % 2 == 0 ? 1.5 / static_cast<double>(n) : 6.0 / static_cast<double>(n);
      auto g = testing_support::random_graph(rng, n, p, 4);
      auto sides = random_sides(g, rng);
      int count[2] = {0, 0};
      for (const auto& [_, s] : sides) ++count[s];
      if (count[0] < 6 || count[1] < 6) continue;
      check_against_oracle(g, sides, 1 + static_cast<std::size_t>(trial) % 5);
    }
  }
}

TEST_CASE("sparse and dense solvers agree") {
  std::mt19937_64 rng(23);
  auto g = testing_support::random_graph(rng, 150, 0.03, 3);
  auto sides = random_sides(g, rng);
  auto dense = rwc_exact(g, sides, 4);
  ExactSolverOptions sparse_opts;
  sparse_opts.dense_limit = 0;
  auto sparse = rwc_exact(g, sides, 4, sparse_opts);
  CHECK(std::abs(dense.pxx - sparse.pxx) <= 1e-9);
  CHECK(std::abs(dense.pxy - sparse.pxy) <= 1e-9);
  CHECK(std::abs(dense.pyx - sparse.pyx) <= 1e-9);
  CHECK(std::abs(dense.pyy - sparse.pyy) <= 1e-9);
  CHECK(sparse.residual <= 1e-10);
}

TEST_CASE("absorption probabilities sum to one when every node reaches a hub") {
  synth::SbmConfig c;
  c.n0 = 40;
  c.n1 = 60;
  c.p_in = 0.15;
  c.p_out = 0.02;
  c.seed = 2;
  auto sbm = synth::generate_sbm(c);
  auto r = rwc_exact(sbm.graph, sbm.planted, 5);
  CHECK(r.pxx + r.pxy == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(r.pyx + r.pyy == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("invariances") {
  synth::SbmConfig c;
  c.n0 = 30;
  c.n1 = 45;
  c.p_in = 0.12;
  c.p_out = 0.02;
  c.weight_law = synth::WeightLaw::Geometric;
  c.seed = 8;
  auto sbm = synth::generate_sbm(c);
  auto base = rwc_exact(sbm.graph, sbm.planted, 4);

  SUBCASE("relabeling nodes") {
    // Reverse the lexicographic order of the ids.
    GraphBuilder b;
    std::map<UserId, int> sides;
    auto rename = [](const UserId& id) { return "z" + std::to_string(999999 - std::stoi(id.substr(1))); };
    for (const auto& [key, w] : sbm.graph.edge_map()) b.add_edge(rename(key.first), rename(key.second), w);
    for (const auto& [id, s] : sbm.planted) sides[rename(id)] = s;
    auto r = rwc_exact(b.build(), sides, 4);
    CHECK(r.rwc == doctest::Approx(base.rwc).epsilon(1e-12));
  }
  SUBCASE("scaling weights") {
    GraphBuilder b;
    for (const auto& [key, w] : sbm.graph.edge_map()) b.add_edge(key.first, key.second, 3 * w);
    auto r = rwc_exact(b.build(), sbm.planted, 4);
    CHECK(r.rwc == doctest::Approx(base.rwc).epsilon(1e-12));
  }
  SUBCASE("swapping sides") {
    std::map<UserId, int> swapped;
    for (const auto& [id, s] : sbm.planted) swapped[id] = 1 - s;
    auto r = rwc_exact(sbm.graph, swapped, 4);
    CHECK(r.rwc == doctest::Approx(base.rwc).epsilon(1e-12));
    CHECK(r.pxy == doctest::Approx(base.pyx).epsilon(1e-12));
    CHECK(r.pyx == doctest::Approx(base.pxy).epsilon(1e-12));
  }
}

TEST_CASE("rwc_montecarlo") {
  synth::SbmConfig c;
  c.n0 = 80;
  c.n1 = 120;
  c.p_in = 0.06;
  c.p_out = 0.008;
  c.seed = 4;
  auto sbm = synth::generate_sbm(c);
  auto exact = rwc_exact(sbm.graph, sbm.planted, 5);
  auto mc = rwc_montecarlo(sbm.graph, sbm.planted, 5, 100000, 42);
  CHECK(std::abs(mc.pxx - exact.pxx) <= 0.02);
  CHECK(std::abs(mc.pxy - exact.pxy) <= 0.02);
  CHECK(std::abs(mc.pyx - exact.pyx) <= 0.02);
  CHECK(std::abs(mc.pyy - exact.pyy) <= 0.02);
  CHECK(std::abs(mc.rwc - exact.rwc) <= 0.02);
  CHECK(mc.method == RwcMethod::MonteCarlo);

  auto again = rwc_montecarlo(sbm.graph, sbm.planted, 5, 100000, 42, 3);
  CHECK(again.to_json() == mc.to_json());
}

TEST_CASE("input validation") {
  std::map<UserId, int> sides;
  auto g = two_stars(sides);
  CHECK_THROWS_AS(rwc_exact(g, sides, 11), InvalidArgument);
  CHECK_THROWS_AS(rwc_exact(g, sides, 0), InvalidArgument);
  auto missing = sides;
  missing.erase("x3");
  CHECK_THROWS_AS(rwc_exact(g, missing, 1), InvalidArgument);
  CHECK_THROWS_AS(rwc_montecarlo(g, sides, 1, 0, 1), InvalidArgument);
}
