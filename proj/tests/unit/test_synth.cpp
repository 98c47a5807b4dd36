#include <cmath>
#include <filesystem>
#include <set>

#include "doctest.h"
#include "echochamber/controversy.hpp"
#include "echochamber/ingest.hpp"
#include "echochamber/synth.hpp"
#include "echochamber/vectorize.hpp"

using namespace echochamber;
using namespace echochamber::synth;

TEST_CASE("sbm structure") {
  SUBCASE("no cross edges without p_out") {
    SbmConfig c;
    c.p_out = 0.0;
    c.p_in = 0.2;
    c.seed = 1;
    auto s = generate_sbm(c);
    CHECK(s.graph.node_count() == 200);
    for (const auto& e : s.graph.edges()) CHECK(s.block[e.source] == s.block[e.target]);
    std::size_t comps = 0;
    weak_components(s.graph, &comps);
    CHECK(comps <= 2);
  }
  SUBCASE("cross-edge count within binomial bounds") {
    for (double asym : {0.0, 1.5}) {
      SbmConfig c;
      c.n0 = 150;
      c.n1 = 250;
      c.p_out = 0.01;
      c.cross_asymmetry = asym;
      c.seed = 7;
      auto s = generate_sbm(c);
      double cross01 = 0, cross10 = 0;
      for (const auto& e : s.graph.edges()) {
        if (s.block[e.source] == 0 && s.block[e.target] == 1) ++cross01;
        if (s.block[e.source] == 1 && s.block[e.target] == 0) ++cross10;
      }
      const double pairs = 150.0 * 250.0;
      const double p01 = c.p_out * (1 + asym);
      CHECK(std::abs(cross01 - pairs * p01) <= 3 * std::sqrt(pairs * p01 * (1 - p01)));
      CHECK(std::abs(cross10 - pairs * c.p_out) <= 3 * std::sqrt(pairs * c.p_out * (1 - c.p_out)));
    }
  }
  SUBCASE("weights, ids and determinism") {
    SbmConfig c;
    c.seed = 3;
    auto a = generate_sbm(c);
    auto b = generate_sbm(c);
    CHECK(a.graph == b.graph);
    for (const auto& e : a.graph.edges()) CHECK(e.weight == 2);
    CHECK(a.planted.at(user_id(0)) == 0);
    CHECK(a.planted.at(user_id(199)) == 1);
    c.seed = 4;
    CHECK_FALSE(generate_sbm(c).graph == a.graph);

    c.weight_law = WeightLaw::Geometric;
    c.weight_mean = 3.0;
    auto g = generate_sbm(c);
    double sum = 0;
    for (const auto& e : g.graph.edges()) {
      CHECK(e.weight >= 1);
      sum += static_cast<double>(e.weight);
    }
    const double n = static_cast<double>(g.graph.edge_count());
    // Geometric on 1, 2, ... with mean 3 has variance 6.
    CHECK(std::abs(sum / n - 3.0) <= 3 * std::sqrt(6.0 / n));
  }
  SUBCASE("undirected mode is symmetric") {
    SbmConfig c;
    c.directed = false;
    c.seed = 2;
    auto s = generate_sbm(c);
    for (const auto& e : s.graph.edges()) CHECK(s.graph.weight(e.target, e.source) == e.weight);
    c.cross_asymmetry = 1.0;
    CHECK_THROWS_AS(generate_sbm(c), InvalidArgument);
  }
  SUBCASE("validation") {
    SbmConfig c;
    c.p_out = 0.5;
    c.p_in = 0.1;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    c = SbmConfig{};
    c.n0 = 0;
    CHECK_THROWS_AS(generate_sbm(c), InvalidArgument);
  }
}

TEST_CASE("cross asymmetry shows up in the walk probabilities") {
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SbmConfig c;
    c.n0 = 150;
    c.n1 = 150;
    c.p_in = 0.05;
    c.p_out = 0.005;
    c.cross_asymmetry = 4.0;
    c.seed = seed;
    auto s = generate_sbm(c);
    auto r = rwc_exact(s.graph, s.planted, 5);
    wins += r.pxy > r.pyx;
  }
  CHECK(wins >= 9);
}

TEST_CASE("word pools") {
  for (double overlap : {0.0, 0.2, 1.0}) {
    auto pools = word_pools(100, overlap, 5);
    REQUIRE(pools[0].size() == 100);
    REQUIRE(pools[1].size() == 100);
    std::set<std::string> a(pools[0].begin(), pools[0].end()), b(pools[1].begin(), pools[1].end());
    CHECK(a.size() == 100);
    std::size_t shared = 0;
    for (const auto& w : a) shared += b.count(w);
    CHECK(shared == static_cast<std::size_t>(std::lround(overlap * 100)));
    for (const auto& w : a) CHECK_FALSE(stance::italian_stopwords().contains(w));
  }
}

TEST_CASE("text corpus") {
  TextCorpusConfig c;
  c.users_per_side = 20;
  c.tweets_per_user = 10;
  c.vocab_overlap = 0.0;
  c.seed = 9;
  auto corpus = generate_text_corpus(c);
  REQUIRE(corpus.histories.size() == 40);
  std::set<std::string> words[2];
  stance::VectorizerOptions o;
  for (const auto& h : corpus.histories) {
    const int side = stance::class_of(h.label);
    CHECK(h.user[0] == (side == 1 ? 'a' : 's'));
    CHECK(h.tweets.size() == 10);
    for (const auto& t : h.tweets) CHECK(t.timestamp < h.split_point);
    CHECK(corpus.profiles.count(h.user) == 1);
    for (const auto& w : stance::document_tokens(h, o)) words[side].insert(w);
  }
  for (const auto& w : words[0]) CHECK(words[1].count(w) == 0);
  auto again = generate_text_corpus(c);
  CHECK(again.histories[7].tweets[3].text == corpus.histories[7].tweets[3].text);
  c.vocab_overlap = 1.5;
  CHECK_THROWS_AS(generate_text_corpus(c), InvalidArgument);
}

TEST_CASE("scenario files read back through ingest") {
  ScenarioConfig c;
  c.retweet.n0 = 40;
  c.retweet.n1 = 60;
  c.retweet.p_in = 0.1;
  c.text.tweets_per_user = 5;
  c.outsiders_per_side = 5;
  c.seed = 12;
  auto s = generate_scenario(c);
  auto dir = std::filesystem::temp_directory_path() / "echochamber_scenario";
  std::filesystem::remove_all(dir);
  write_scenario(s, dir);
  for (const char* f : {"tweets.ndjson", "historical.ndjson", "follows.tsv", "profiles.ndjson", "seeds.csv", "planted.csv"})
    CHECK(std::filesystem::exists(dir / f));
  auto tweets = read_tweets(dir / "tweets.ndjson");
  CHECK(tweets.parse_errors == 0);
  CHECK(tweets.records.size() == s.tweets.size());
  for (const auto& t : tweets.records) {
    CHECK(t.timestamp >= c.window_start);
    CHECK(t.timestamp < c.window_end);
  }
  CHECK(read_follows(dir / "follows.tsv").records.size() == s.follows.size());
  CHECK(read_profiles(dir / "profiles.ndjson").size() == s.profiles.size());
  auto seeds = read_label_csv(dir / "seeds.csv");
  CHECK(seeds == s.seeds);
  CHECK(seeds.size() == 6);
  CHECK(read_label_csv(dir / "planted.csv") == s.planted);

  auto net = build_retweet_network(tweets.records);
  for (const auto& [id, label] : s.seeds) CHECK(s.planted.at(id) == label);
  CHECK(net.node_count() <= 100);
  std::filesystem::remove_all(dir);
}
