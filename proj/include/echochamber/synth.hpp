#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "echochamber/graph.hpp"
#include "echochamber/ingest.hpp"
#include "echochamber/labels.hpp"
#include "echochamber/stance.hpp"

namespace echochamber::synth {

enum class WeightLaw { Constant, Geometric };

struct SbmConfig {
  std::size_t n0 = 100;
  std::size_t n1 = 100;
  double p_in = 0.1;
  double p_out = 0.01;
  bool directed = true;
  WeightLaw weight_law = WeightLaw::Constant;
  /// The constant weight, or the mean of the geometric law (support 1, 2, ...).
  double weight_mean = 2.0;
  /// Block 0 -> block 1 pairs use p_out * (1 + cross_asymmetry), capped at 1.
  /// Directed graphs only.
  double cross_asymmetry = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SbmGraph {
  DirectedWeightedGraph graph;
  /// Planted block per user; ids are "u000000".. with block 0 first.
  std::map<UserId, int> planted;
  /// Planted block per node index of `graph`.
  std::vector<int> block;
};

std::string user_id(std::size_t i);

/// Every ordered pair gets an edge independently with its block probability.
/// Isolated nodes are kept.
SbmGraph generate_sbm(const SbmConfig& cfg);

/// Per-side tweeting habits.
struct SideBehavior {
  double retweet_rate = 0.3;
  double mention_rate = 0.3;
  double hashtag_rate = 0.3;
  double url_rate = 0.2;
  /// Chance that a word is written in capitals.
  double uppercase_rate = 0.05;
  double question_rate = 0.1;
  double exclamation_rate = 0.1;
};

struct TextCorpusConfig {
  std::size_t users_per_side = 500;
  /// Fraction of each side's word pool shared with the other side.
  double vocab_overlap = 0.2;
  std::size_t tweets_per_user = 50;
  std::size_t vocab_per_side = 300;
  std::size_t words_per_tweet = 8;
  /// Index 0 is the Skeptic side, 1 the Advocate side.
  std::array<SideBehavior, 2> behavior{};
  Timestamp start = 1577836800;  // 2020-01-01
  std::uint64_t seed = 0;

  void validate() const;
};

struct TextCorpus {
  /// Skeptic users ("s000000"..) then Advocate users ("a000000"..); the split
  /// point of each history is one second after its last tweet.
  std::vector<stance::UserHistory> histories;
  ProfileMap profiles;
  std::array<std::vector<std::string>, 2> pools;
};

/// Word pools for the two sides: `vocab_per_side` letter-only pseudo-words
/// each, of which round(overlap * vocab_per_side) are shared.
std::array<std::vector<std::string>, 2> word_pools(std::size_t vocab_per_side, double overlap, std::uint64_t seed);

TextCorpus generate_text_corpus(const TextCorpusConfig& cfg);

/// A complete synthetic data set in the ingest formats.
struct ScenarioConfig {
  /// Retweet network; its block sizes define the in-network users.
  SbmConfig retweet{.n0 = 200, .n1 = 300, .p_in = 0.05, .p_out = 0.002};
  double mention_p_in = 0.02;
  double mention_p_out = 0.004;
  double mention_asymmetry = 2.0;
  double follow_p_in = 0.05;
  double follow_p_out = 0.005;
  /// Historical tweets per user and word pools; users_per_side is ignored.
  TextCorpusConfig text{.tweets_per_user = 20};
  /// Users outside the network with only historical tweets, per side.
  std::size_t outsiders_per_side = 25;
  /// Seed users per side: the highest in-degree members of each block.
  std::size_t seeds_per_side = 3;
  Timestamp window_start = 1609459200;  // 2021-01-01
  Timestamp window_end = 1617235200;    // 2021-04-01
  std::uint64_t seed = 0;
};

struct Scenario {
  std::vector<TweetRecord> tweets;      // collection window
  std::vector<TweetRecord> historical;  // before and during the window
  std::vector<FollowRecord> follows;
  ProfileMap profiles;
  LabelMap seeds;
  /// Block 0 is Skeptic, block 1 Advocate; includes outsiders ("x...").
  LabelMap planted;
};

Scenario generate_scenario(const ScenarioConfig& cfg);

/// tweets.ndjson, historical.ndjson, follows.tsv, profiles.ndjson, seeds.csv
/// and planted.csv under `dir`.
void write_scenario(const Scenario& s, const std::filesystem::path& dir);

}  // namespace echochamber::synth
