#include <random>
#include <set>

#include "doctest.h"
#include "echochamber/communities.hpp"
#include "echochamber/synth.hpp"
#include "support/random_graphs.hpp"

using namespace echochamber;

namespace {

void check_partition(const DirectedWeightedGraph& g, const CommunityResult& r) {
  REQUIRE(r.assignment.size() == g.node_count());
  std::vector<std::size_t> size(r.count, 0);
  for (auto c : r.assignment) {
    REQUIRE(c < r.count);
    ++size[c];
  }
  for (std::size_t c = 0; c < r.count; ++c) {
    CHECK(size[c] >= 1);
    if (c > 0) CHECK(size[c] <= size[c - 1]);
  }
  std::vector<std::uint32_t> singletons(g.node_count());
  for (std::uint32_t i = 0; i < singletons.size(); ++i) singletons[i] = i;
  CHECK(r.modularity >= modularity(g, singletons));
  CHECK(r.modularity == doctest::Approx(modularity(g, r.assignment)));
}

// Modularity from its textbook definition over all node pairs.
double oracle_modularity(const DirectedWeightedGraph& g, const std::vector<std::uint32_t>& comm) {
  const std::size_t n = g.node_count();
  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  for (const auto& e : g.edges()) {
    a[e.source][e.target] += static_cast<double>(e.weight);
    a[e.target][e.source] += static_cast<double>(e.weight);
  }
  std::vector<double> k(n, 0.0);
  double m2 = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      k[i] += a[i][j];
      m2 += a[i][j];
    }
  double q = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (comm[i] == comm[j]) q += a[i][j] - k[i] * k[j] / m2;
  return q / m2;
}

}  // namespace

TEST_CASE("two joined cliques") {
  auto g = testing_support::two_cliques(10);
  auto r = detect_communities(g);
  check_partition(g, r);
  REQUIRE(r.count == 2);
  for (std::size_t v = 0; v < 20; ++v) CHECK(r.assignment[v] == (v < 10 ? 0u : 1u));

  std::map<UserId, double> scores;
  for (std::size_t v = 0; v < 10; ++v) scores[g.id(v)] = 0.0;
  for (std::size_t v = 10; v < 15; ++v) scores[g.id(v)] = 1.0;
  auto s = summarize_communities(g, r, scores);
  REQUIRE(s.size() == 2);
  CHECK(s[0].size == 10);
  CHECK(s[1].size == 10);
  CHECK(*s[0].mean_leaning == 0.0);
  CHECK(*s[1].mean_leaning == 1.0);
  // The joining edge gives node k one extra in-arc.
  CHECK(s[1].top_user == testing_support::node_name(10));
  CHECK(s[0].top_user == testing_support::node_name(0));
}

TEST_CASE("complete graph is one community") {
  for (std::size_t n : {3u, 8u, 25u}) {
    auto g = testing_support::complete_graph(n);
    auto r = detect_communities(g);
    check_partition(g, r);
    CHECK(r.count == 1);
  }
}

TEST_CASE("planted four-block graph") {
  // Two SBMs side by side give four blocks with sparse links only within each pair.
  std::vector<synth::SbmGraph> parts;
  GraphBuilder b;
  std::map<UserId, int> block;
  for (int half = 0; half < 2; ++half) {
    synth::SbmConfig c;
    c.n0 = 60;
    c.n1 = 60;
    c.p_in = 0.15;
    c.p_out = 0.004;
    c.seed = 40 + half;
    auto sbm = synth::generate_sbm(c);
    const std::string prefix = half == 0 ? "a" : "b";
    for (const auto& [key, w] : sbm.graph.edge_map()) b.add_edge(prefix + key.first, prefix + key.second, w);
    for (const auto& [id, k] : sbm.planted) block[prefix + id] = 2 * half + k;
  }
  // A few links between the halves.
  std::mt19937_64 rng(5);
  std::vector<UserId> ids;
  for (const auto& [id, _] : block) ids.push_back(id);
  std::uniform_int_distribution<std::size_t> pick(0, ids.size() - 1);
  for (int i = 0; i < 30; ++i) b.add_edge(ids[pick(rng)], ids[pick(rng)]);
  auto g = b.build();
  auto r = detect_communities(g);
  check_partition(g, r);

  std::uint64_t agree = 0, pairs = 0;
  for (NodeIndex i = 0; i < g.node_count(); ++i)
    for (NodeIndex j = i + 1; j < g.node_count(); ++j) {
      ++pairs;
      agree += (block[g.id(i)] == block[g.id(j)]) == (r.assignment[i] == r.assignment[j]);
    }
  CHECK(static_cast<double>(agree) / static_cast<double>(pairs) >= 0.95);
}

TEST_CASE("random graphs") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    auto g = testing_support::random_graph(rng, 40 + trial * 5, 0.08, 4);
    auto r = detect_communities(g);
    check_partition(g, r);
    CHECK(r.modularity == doctest::Approx(oracle_modularity(g, r.assignment)).epsilon(1e-12));
    auto again = detect_communities(g);
    CHECK(again.assignment == r.assignment);
    std::size_t total = 0;
    for (const auto& s : summarize_communities(g, r, {})) {
      total += s.size;
      CHECK_FALSE(s.mean_leaning);
    }
    CHECK(total == g.node_count());
  }
}

TEST_CASE("errors") {
  CHECK_THROWS_AS(detect_communities(DirectedWeightedGraph{}), InvalidArgument);
  auto g = testing_support::two_cliques(3);
  std::vector<std::uint32_t> short_assignment(2, 0);
  CHECK_THROWS_AS(modularity(g, short_assignment), InvalidArgument);
}
