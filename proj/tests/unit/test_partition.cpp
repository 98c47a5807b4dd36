#include <algorithm>
#include <random>

#include "doctest.h"
#include "echochamber/partition.hpp"
#include "echochamber/synth.hpp"
#include "support/random_graphs.hpp"

using namespace echochamber;
using testing_support::node_name;

namespace {

synth::SbmGraph planted(std::size_t n0, std::size_t n1, double p_in, double p_out, std::uint64_t seed) {
  synth::SbmConfig c;
  c.n0 = n0;
  c.n1 = n1;
  c.p_in = p_in;
  c.p_out = p_out;
  c.seed = seed;
  return synth::generate_sbm(c);
}

// Agreement with the planted blocks up to a global flip.
double agreement(const std::vector<int>& block, const std::vector<std::uint8_t>& side) {
  std::size_t same = 0;
  for (std::size_t i = 0; i < block.size(); ++i) same += block[i] == side[i];
  const auto n = static_cast<double>(block.size());
  return std::max(same / n, 1.0 - same / n);
}

std::int64_t brute_cut(const DirectedWeightedGraph& g, const std::vector<std::uint8_t>& side) {
  std::int64_t cut = 0;
  for (const auto& [key, w] : g.edge_map())
    if (side[*g.find(key.first)] != side[*g.find(key.second)]) cut += static_cast<std::int64_t>(w);
  return cut;
}

}  // namespace

TEST_CASE("bipartition_once separates two joined cliques") {
  auto g = testing_support::two_cliques(10);
  auto p = bipartition_once(g, 1.0, 7);
  CHECK(p.cut == 1);
  CHECK(p.side0_size == 10);
  for (std::size_t i = 1; i < 10; ++i) CHECK(p.side[i] == p.side[0]);
  for (std::size_t i = 10; i < 20; ++i) CHECK(p.side[i] != p.side[0]);
}

TEST_CASE("bipartition_once on a single edge") {
  GraphBuilder b;
  b.add_edge("a", "b");
  auto p = bipartition_once(b.build(), 1.0, 1);
  CHECK(p.side[0] != p.side[1]);
  CHECK(p.cut == 1);
}

TEST_CASE("bipartition_once rejects disconnected and tiny graphs") {
  GraphBuilder b;
  b.add_edge("a", "b");
  b.add_edge("c", "d");
  CHECK_THROWS_AS(bipartition_once(b.build(), 1.0, 1), InvalidArgument);
  GraphBuilder one;
  one.add_node("a");
  CHECK_THROWS_AS(bipartition_once(one.build(), 1.0, 1), InvalidArgument);
}

TEST_CASE("bipartition_once recovers a planted partition") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto sbm = planted(100, 100, 0.1, 0.005, seed);
    REQUIRE(is_weakly_connected(sbm.graph));
    auto p = bipartition_once(sbm.graph, 1.0, seed);
    CHECK(agreement(sbm.block, p.side) >= 0.98);
  }
}

TEST_CASE("bipartition_once honors balance, reports its cut and never worsens a level") {
  std::mt19937_64 rng(5);
  PartitionConfig cfg;
  cfg.coarsen_stop = 20;
  for (int trial = 0; trial < 30; ++trial) {
    auto g = giant_component(testing_support::random_graph(rng, 150, 0.03, 3));
    const double ratio = trial % 3 == 0 ? 1.0 : (trial % 3 == 1 ? 1.54 : 2.0);
    auto p = bipartition_once(g, ratio, static_cast<std::uint64_t>(trial), cfg);
    const double n = static_cast<double>(g.node_count());
    const double target = n / (1.0 + ratio);
    CHECK(std::abs(static_cast<double>(p.side0_size) - target) <= cfg.balance_tolerance * n + 1.0);
    CHECK(p.side0_size > 0);
    CHECK(p.side0_size < g.node_count());
    CHECK(p.cut == brute_cut(g, p.side));
    CHECK(p.cut == cut_weight(g, p.side));
    CHECK(p.levels.size() >= 1);
    for (const auto& level : p.levels)
      if (!level.rebalanced) CHECK(level.cut_after <= level.cut_before);
  }
}

TEST_CASE("with default coarsening no level needs rebalancing") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto sbm = planted(300, 450, 0.03, 0.002, seed);
    auto g = giant_component(sbm.graph);
    auto p = bipartition_once(g, 1.5, seed);
    CHECK(p.levels.size() > 1);
    for (const auto& level : p.levels) {
      CHECK_FALSE(level.rebalanced);
      CHECK(level.cut_after <= level.cut_before);
    }
  }
}

TEST_CASE("refined cut is locally minimal under balance-preserving single moves") {
  std::mt19937_64 rng(9);
  PartitionConfig cfg;
  for (int trial = 0; trial < 20; ++trial) {
    auto g = giant_component(testing_support::random_graph(rng, 120, 0.04, 2));
    auto p = bipartition_once(g, 1.0, static_cast<std::uint64_t>(trial), cfg);
    const double n = static_cast<double>(g.node_count());
    const double target = n / 2.0;
    const double allowed = std::max(cfg.balance_tolerance * n, 0.5);
    for (std::size_t v = 0; v < g.node_count(); ++v) {
      auto moved = p.side;
      moved[v] ^= 1;
      const double size0 = static_cast<double>(std::count(moved.begin(), moved.end(), 0));
      if (std::abs(size0 - target) > allowed || size0 == 0 || size0 == n) continue;
      CHECK(cut_weight(g, moved) >= p.cut);
    }
  }
}

TEST_CASE("ensemble_leaning") {
  PartitionConfig cfg;
  cfg.runs = 20;
  SUBCASE("joined cliques get extreme, opposite scores") {
    auto g = testing_support::two_cliques(10);
    auto scores = ensemble_leaning(g, cfg);
    REQUIRE(scores.size() == 20);
    for (const auto& s : scores) {
      CHECK((s.score == 0.0 || s.score == 1.0));
      CHECK(s.runs == 20);
    }
    for (std::size_t i = 1; i < 10; ++i) CHECK(scores[i].score == scores[0].score);
    for (std::size_t i = 10; i < 20; ++i) CHECK(scores[i].score != scores[0].score);
  }
  SUBCASE("complete graph has no stable cut") {
    cfg.runs = 100;
    auto scores = ensemble_leaning(testing_support::complete_graph(20), cfg);
    auto mid = std::count_if(scores.begin(), scores.end(), [](const LeaningScore& s) { return s.score > 0.2 && s.score < 0.8; });
    CHECK(mid >= 16);
  }
  SUBCASE("planted partition is mostly extreme") {
    cfg.runs = 50;
    auto sbm = planted(100, 100, 0.1, 0.005, 3);
    auto scores = ensemble_leaning(sbm.graph, cfg);
    CHECK(extremity_count(scores, 0.05) >= 190);
  }
  SUBCASE("deterministic and independent of the worker count") {
    auto sbm = planted(60, 90, 0.1, 0.01, 4);
    cfg.rng_seed = 77;
    auto a = ensemble_leaning(sbm.graph, cfg);
    cfg.threads = 3;
    auto b = ensemble_leaning(sbm.graph, cfg);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].score == b[i].score);
  }
}

TEST_CASE("tune_balance") {
  PartitionConfig cfg;
  cfg.runs = 20;
  SUBCASE("single value grid") {
    std::vector<double> grid = {1.3};
    auto r = tune_balance(testing_support::two_cliques(6), grid, cfg);
    CHECK(r.best_ratio == 1.3);
    CHECK(r.candidates.size() == 1);
  }
  SUBCASE("symmetric cliques prefer 1.0") {
    std::vector<double> grid = {1.0, 3.0};
    auto r = tune_balance(testing_support::two_cliques(10), grid, cfg);
    CHECK(r.best_ratio == 1.0);
    CHECK(r.best().extreme == 20);
  }
  SUBCASE("planted 1:1.54 blocks") {
    auto sbm = planted(200, 308, 0.05, 0.002, 8);
    std::vector<double> grid = {1.0, 1.54};
    auto r = tune_balance(giant_component(sbm.graph), grid, cfg);
    CHECK(r.best_ratio == 1.54);
  }
  SUBCASE("empty grid") { CHECK_THROWS_AS(tune_balance(testing_support::two_cliques(4), std::vector<double>{}, cfg), InvalidArgument); }
}

TEST_CASE("assign_stances") {
  std::vector<LeaningScore> scores = {{"a", 0.0, 100}, {"b", 1.0, 100}, {"c", 0.5, 100}, {"d", 0.97, 100}};
  SUBCASE("one seed fixes the polarity") {
    auto r = assign_stances(scores, {{"a", StanceLabel::Skeptic}}, 0.05);
    CHECK(r.labels.at("a") == StanceLabel::Skeptic);
    CHECK(r.labels.at("b") == StanceLabel::Advocate);
    CHECK(r.labels.at("c") == StanceLabel::Unassigned);
    CHECK(r.labels.at("d") == StanceLabel::Advocate);
    CHECK_FALSE(r.flipped);
  }
  SUBCASE("seeds on side 0 as Advocate flip the meaning") {
    auto r = assign_stances(scores, {{"a", StanceLabel::Advocate}, {"c", StanceLabel::Skeptic}}, 0.05);
    CHECK(r.flipped);
    CHECK(r.labels.at("a") == StanceLabel::Advocate);
    CHECK(r.labels.at("b") == StanceLabel::Skeptic);
    CHECK(r.warnings.size() == 1);  // c is not extreme

    auto oriented = orient_scores(scores, r);
    CHECK(oriented[0].score == 1.0);
    CHECK(oriented[1].score == 0.0);
    CHECK(oriented[3].score == doctest::Approx(0.03).epsilon(1e-12));
  }
  SUBCASE("tied votes are an error") {
    CHECK_THROWS_AS(assign_stances(scores, {{"a", StanceLabel::Skeptic}, {"b", StanceLabel::Skeptic}}, 0.05),
                    InvalidArgument);
    CHECK_THROWS_AS(assign_stances(scores, {{"c", StanceLabel::Skeptic}}, 0.05), InvalidArgument);
  }
  SUBCASE("planted blocks with three seeds each") {
    PartitionConfig cfg;
    cfg.runs = 30;
    cfg.balance_ratio = 1.5;
    auto sbm = planted(100, 150, 0.08, 0.004, 12);
    auto g = giant_component(sbm.graph);
    auto s = ensemble_leaning(g, cfg);
    LabelMap seeds;
    for (std::size_t i = 0; i < 3; ++i) {
      seeds[synth::user_id(i * 7)] = StanceLabel::Skeptic;
      seeds[synth::user_id(100 + i * 11)] = StanceLabel::Advocate;
    }
    auto r = assign_stances(s, seeds, 0.05);
    for (const auto& ls : s) {
      if (!is_extreme(ls.score, 0.05)) continue;
      auto expected = sbm.planted.at(ls.user) == 0 ? StanceLabel::Skeptic : StanceLabel::Advocate;
      CHECK(r.labels.at(ls.user) == expected);
    }
  }
}
