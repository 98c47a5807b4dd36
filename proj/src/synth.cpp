#include "echochamber/synth.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "echochamber/util.hpp"
#include "echochamber/vectorize.hpp"

namespace echochamber::synth {

namespace {

constexpr Timestamp kDay = 86400;

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

std::string numbered(char prefix, std::size_t i) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%c%06zu", prefix, i);
  return buf;
}

Weight draw_weight(const SbmConfig& cfg, Rng& rng) {
  if (cfg.weight_law == WeightLaw::Constant) return static_cast<Weight>(std::llround(cfg.weight_mean));
  std::geometric_distribution<Weight> extra(1.0 / cfg.weight_mean);
  return 1 + extra(rng);
}

const std::array<std::vector<std::string>, 2>& side_domains() {
  static const std::array<std::vector<std::string>, 2> kDomains = {{
      {"byoblu.com", "youtube.com", "imolaoggi.it", "ilprimatonazionale.it", "databaseitalia.it"},
      {"repubblica.it", "corriere.it", "ilfattoquotidiano.it", "ansa.it", "youtube.com"},
  }};
  return kDomains;
}

struct TweetFactory {
  const TextCorpusConfig& cfg;
  const std::array<std::vector<std::string>, 2>& pools;
  std::size_t next_id = 0;

  std::string word(int side, Rng& rng) const {
    const auto& pool = pools[static_cast<std::size_t>(side)];
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    return pool[pick(rng)];
  }

  std::string body(int side, Rng& rng) const {
    const auto& b = cfg.behavior[static_cast<std::size_t>(side)];
    std::bernoulli_distribution upper(b.uppercase_rate);
    std::string text;
    for (std::size_t k = 0; k < cfg.words_per_tweet; ++k) {
      std::string w = word(side, rng);
      if (upper(rng))
        for (auto& c : w) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      if (!text.empty()) text += ' ';
      text += w;
    }
    if (std::bernoulli_distribution(b.question_rate)(rng)) text += '?';
    if (std::bernoulli_distribution(b.exclamation_rate)(rng)) text += '!';
    return text;
  }

  /// A tweet in the user's side voice. Retweet and mention targets are drawn
  /// from `others` when given.
  TweetRecord make(const UserId& user, int side, Timestamp ts, const std::vector<UserId>& others, Rng& rng) {
    const auto& b = cfg.behavior[static_cast<std::size_t>(side)];
    TweetRecord t;
    t.tweet_id = numbered('t', next_id++);
    t.user_id = user;
    t.timestamp = ts;
    std::string prefix;
    std::uniform_int_distribution<std::size_t> pick_other(0, others.empty() ? 0 : others.size() - 1);
    if (!others.empty() && std::bernoulli_distribution(b.retweet_rate)(rng)) {
      t.retweeted_user_id = others[pick_other(rng)];
      prefix = "RT @" + *t.retweeted_user_id + ": ";
    }
    t.text = prefix + body(side, rng);
    if (!others.empty() && std::bernoulli_distribution(b.mention_rate)(rng)) {
      const UserId& m = others[pick_other(rng)];
      if (m != user) {
        t.mentioned_user_ids.push_back(m);
        t.text += " @" + m;
      }
    }
    decorate(t, side, rng);
    return t;
  }

  /// Hashtag and link at the side's rates.
  void decorate(TweetRecord& t, int side, Rng& rng) {
    const auto& b = cfg.behavior[static_cast<std::size_t>(side)];
    if (std::bernoulli_distribution(b.hashtag_rate)(rng)) {
      std::string tag = word(side, rng);
      t.hashtags.push_back(tag);
      t.text += " #" + tag;
    }
    if (std::bernoulli_distribution(b.url_rate)(rng)) {
      const auto& domains = side_domains()[static_cast<std::size_t>(side)];
      std::uniform_int_distribution<std::size_t> pick(0, domains.size() - 1);
      std::string url = "https://www." + domains[pick(rng)] + "/" + numbered('p', next_id);
      t.urls.push_back(url);
      t.text += " " + url;
    }
  }
};

AccountProfile make_profile(const UserId& user, std::size_t tweets, Timestamp reference, Rng& rng) {
  AccountProfile p;
  p.user = user;
  p.created_at = reference - std::uniform_int_distribution<Timestamp>(30, 3000)(rng) * kDay;
  p.followers = std::geometric_distribution<std::uint64_t>(1.0 / 200.0)(rng);
  p.friends = std::geometric_distribution<std::uint64_t>(1.0 / 300.0)(rng);
  p.statuses = tweets + std::uniform_int_distribution<std::uint64_t>(0, 2000)(rng);
  return p;
}

bool tweet_order(const TweetRecord& a, const TweetRecord& b) {
  return a.timestamp != b.timestamp ? a.timestamp < b.timestamp : a.tweet_id < b.tweet_id;
}

}  // namespace

void SbmConfig::validate() const {
  if (n0 < 1 || n1 < 1) throw InvalidArgument("block sizes must be at least 1");
  if (!is_probability(p_in) || !is_probability(p_out)) throw InvalidArgument("p_in and p_out must lie in [0, 1]");
  if (p_out > p_in) throw InvalidArgument("p_out must not exceed p_in");
  if (!(cross_asymmetry >= 0.0)) throw InvalidArgument("cross_asymmetry must be >= 0");
  if (!directed && cross_asymmetry > 0.0) throw InvalidArgument("cross_asymmetry needs a directed graph");
  if (!(weight_mean >= 1.0)) throw InvalidArgument("weight_mean must be >= 1");
}

std::string user_id(std::size_t i) { return numbered('u', i); }

SbmGraph generate_sbm(const SbmConfig& cfg) {
  cfg.validate();
  const std::size_t n = cfg.n0 + cfg.n1;
  std::vector<UserId> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = user_id(i);
  auto block_of = [&](std::size_t i) { return i < cfg.n0 ? 0 : 1; };
  const double p01 = std::min(1.0, cfg.p_out * (1.0 + cfg.cross_asymmetry));

  Rng rng(cfg.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = cfg.directed ? 0 : i + 1; j < n; ++j) {
      if (i == j) continue;
      const int bi = block_of(i), bj = block_of(j);
      const double p = bi == bj ? cfg.p_in : (bi == 0 ? p01 : cfg.p_out);
      if (u(rng) >= p) continue;
      const Weight w = draw_weight(cfg, rng);
      edges.push_back({static_cast<NodeIndex>(i), static_cast<NodeIndex>(j), w});
      if (!cfg.directed) edges.push_back({static_cast<NodeIndex>(j), static_cast<NodeIndex>(i), w});
    }
  }
  SbmGraph out;
  out.graph = make_graph(ids, std::move(edges));
  out.block.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.block[i] = block_of(i);
    out.planted.emplace(ids[i], block_of(i));
  }
  return out;
}

void TextCorpusConfig::validate() const {
  if (!(vocab_overlap >= 0.0 && vocab_overlap <= 1.0)) throw InvalidArgument("vocab_overlap must lie in [0, 1]");
  if (vocab_per_side < 1 || words_per_tweet < 1 || tweets_per_user < 1)
    throw InvalidArgument("vocabulary, words per tweet and tweets per user must be positive");
  for (const auto& b : behavior)
    for (double p : {b.retweet_rate, b.mention_rate, b.hashtag_rate, b.url_rate, b.uppercase_rate, b.question_rate,
                     b.exclamation_rate})
      if (!is_probability(p)) throw InvalidArgument("behavior rates must lie in [0, 1]");
}

std::array<std::vector<std::string>, 2> word_pools(std::size_t vocab_per_side, double overlap, std::uint64_t seed) {
  static constexpr std::string_view kConsonants = "bcdfglmnprstvz";
  static constexpr std::string_view kVowels = "aeiou";
  const std::size_t shared = static_cast<std::size_t>(std::llround(overlap * static_cast<double>(vocab_per_side)));
  const std::size_t needed = 2 * vocab_per_side - shared;

  // Three consonant-vowel syllables give 70^3 distinct six-letter words.
  const std::size_t syllables = kConsonants.size() * kVowels.size();
  const std::size_t space = syllables * syllables * syllables;
  if (needed > space) throw InvalidArgument("vocabulary too large for the word generator");
  std::vector<std::size_t> codes(space);
  for (std::size_t i = 0; i < space; ++i) codes[i] = i;
  Rng rng(seed);
  std::shuffle(codes.begin(), codes.end(), rng);

  const auto& stop = stance::italian_stopwords();
  std::vector<std::string> words;
  for (std::size_t code : codes) {
    if (words.size() == needed) break;
    std::string w;
    for (int s = 0; s < 3; ++s) {
      const std::size_t syl = code % syllables;
      code /= syllables;
      w += kConsonants[syl / kVowels.size()];
      w += kVowels[syl % kVowels.size()];
    }
    if (!stop.contains(w)) words.push_back(std::move(w));
  }
  std::array<std::vector<std::string>, 2> pools;
  const std::size_t own = vocab_per_side - shared;
  pools[0].assign(words.begin(), words.begin() + static_cast<std::ptrdiff_t>(own));
  pools[1].assign(words.begin() + static_cast<std::ptrdiff_t>(own),
                  words.begin() + static_cast<std::ptrdiff_t>(2 * own));
  for (std::size_t k = 2 * own; k < needed; ++k) {
    pools[0].push_back(words[k]);
    pools[1].push_back(words[k]);
  }
  return pools;
}

TextCorpus generate_text_corpus(const TextCorpusConfig& cfg) {
  cfg.validate();
  TextCorpus corpus;
  corpus.pools = word_pools(cfg.vocab_per_side, cfg.vocab_overlap, derive_seed(cfg.seed, 0));
  TweetFactory factory{cfg, corpus.pools};
  Rng rng(derive_seed(cfg.seed, 1));

  std::array<std::vector<UserId>, 2> users;
  for (int side = 0; side < 2; ++side)
    for (std::size_t i = 0; i < cfg.users_per_side; ++i) users[side].push_back(numbered(side == 0 ? 's' : 'a', i));

  for (int side = 0; side < 2; ++side) {
    for (const auto& user : users[static_cast<std::size_t>(side)]) {
      stance::UserHistory h;
      h.user = user;
      h.label = side == 0 ? StanceLabel::Skeptic : StanceLabel::Advocate;
      Timestamp ts = cfg.start;
      for (std::size_t k = 0; k < cfg.tweets_per_user; ++k) {
        ts += std::uniform_int_distribution<Timestamp>(600, 2 * kDay)(rng);
        h.tweets.push_back(factory.make(user, side, ts, users[static_cast<std::size_t>(side)], rng));
      }
      h.split_point = ts + 1;
      corpus.profiles.emplace(user, make_profile(user, cfg.tweets_per_user, cfg.start, rng));
      corpus.histories.push_back(std::move(h));
    }
  }
  return corpus;
}

Scenario generate_scenario(const ScenarioConfig& cfg) {
  if (cfg.window_end <= cfg.window_start) throw InvalidArgument("empty collection window");
  cfg.text.validate();
  const std::size_t n0 = cfg.retweet.n0, n1 = cfg.retweet.n1, n = n0 + n1;

  SbmConfig rt = cfg.retweet;
  rt.seed = derive_seed(cfg.seed, 1);
  const SbmGraph retweets = generate_sbm(rt);

  SbmConfig mention = cfg.retweet;
  mention.p_in = cfg.mention_p_in;
  mention.p_out = cfg.mention_p_out;
  mention.cross_asymmetry = cfg.mention_asymmetry;
  mention.directed = true;
  mention.weight_law = WeightLaw::Geometric;
  mention.weight_mean = 1.5;
  mention.seed = derive_seed(cfg.seed, 2);
  const SbmGraph mentions = generate_sbm(mention);

  SbmConfig follow = cfg.retweet;
  follow.p_in = cfg.follow_p_in;
  follow.p_out = cfg.follow_p_out;
  follow.cross_asymmetry = 0.0;
  follow.directed = true;
  follow.weight_law = WeightLaw::Constant;
  follow.weight_mean = 1.0;
  follow.seed = derive_seed(cfg.seed, 3);
  const SbmGraph follows = generate_sbm(follow);

  Scenario s;
  const auto pools = word_pools(cfg.text.vocab_per_side, cfg.text.vocab_overlap, derive_seed(cfg.seed, 4));
  TweetFactory factory{cfg.text, pools};
  Rng rng(derive_seed(cfg.seed, 5));
  std::uniform_int_distribution<Timestamp> in_window(cfg.window_start, cfg.window_end - 1);

  // Interactions inside the window. Node indices follow the sorted ids, which
  // match the generation order because ids are zero-padded.
  const auto& rg = retweets.graph;
  for (const auto& e : rg.edges()) {
    const int side = retweets.block[e.target];
    for (Weight k = 0; k < e.weight; ++k) {
      TweetRecord t;
      t.tweet_id = numbered('t', factory.next_id++);
      t.user_id = rg.id(e.source);
      t.timestamp = in_window(rng);
      t.retweeted_user_id = rg.id(e.target);
      t.text = "RT @" + rg.id(e.target) + ": " + factory.body(side, rng);
      factory.decorate(t, side, rng);
      s.tweets.push_back(std::move(t));
    }
  }
  const auto& mg = mentions.graph;
  for (const auto& e : mg.edges()) {
    const int side = mentions.block[e.source];
    for (Weight k = 0; k < e.weight; ++k) {
      TweetRecord t;
      t.tweet_id = numbered('t', factory.next_id++);
      t.user_id = mg.id(e.source);
      t.timestamp = in_window(rng);
      t.mentioned_user_ids.push_back(mg.id(e.target));
      t.text = "@" + mg.id(e.target) + " " + factory.body(side, rng);
      factory.decorate(t, side, rng);
      s.tweets.push_back(std::move(t));
    }
  }
  for (const auto& e : follows.graph.edges())
    s.follows.push_back({follows.graph.id(e.source), follows.graph.id(e.target)});

  // Historical timelines. Retweets and mentions there point at accounts
  // outside the study ("e..."), so split points come from the window.
  std::array<std::vector<UserId>, 2> externals;
  for (int side = 0; side < 2; ++side)
    for (std::size_t i = 0; i < 20; ++i) externals[side].push_back(numbered('e', static_cast<std::size_t>(side) * 20 + i));
  const Timestamp history_start = cfg.window_start - 180 * kDay;
  std::uniform_int_distribution<Timestamp> in_history(history_start, cfg.window_end - 1);
  auto emit_history = [&](const UserId& user, int side) {
    for (std::size_t k = 0; k < cfg.text.tweets_per_user; ++k)
      s.historical.push_back(
          factory.make(user, side, in_history(rng), externals[static_cast<std::size_t>(side)], rng));
    s.profiles.emplace(user, make_profile(user, cfg.text.tweets_per_user, history_start, rng));
    s.planted.emplace(user, side == 0 ? StanceLabel::Skeptic : StanceLabel::Advocate);
  };
  for (std::size_t i = 0; i < n; ++i) emit_history(user_id(i), i < n0 ? 0 : 1);
  for (int side = 0; side < 2; ++side)
    for (std::size_t i = 0; i < cfg.outsiders_per_side; ++i)
      emit_history(numbered('x', static_cast<std::size_t>(side) * cfg.outsiders_per_side + i), side);

  // Seeds: most retweeted members of each block, ties by id.
  for (int side = 0; side < 2; ++side) {
    std::vector<NodeIndex> members;
    for (NodeIndex v = 0; v < rg.node_count(); ++v)
      if (retweets.block[v] == side) members.push_back(v);
    std::stable_sort(members.begin(), members.end(),
                     [&](NodeIndex a, NodeIndex b) { return rg.in_degree(a) > rg.in_degree(b); });
    for (std::size_t k = 0; k < std::min(cfg.seeds_per_side, members.size()); ++k)
      s.seeds.emplace(rg.id(members[k]), side == 0 ? StanceLabel::Skeptic : StanceLabel::Advocate);
  }

  std::sort(s.tweets.begin(), s.tweets.end(), tweet_order);
  std::sort(s.historical.begin(), s.historical.end(), tweet_order);
  return s;
}

void write_scenario(const Scenario& s, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_tweets(s.tweets, dir / "tweets.ndjson");
  write_tweets(s.historical, dir / "historical.ndjson");
  write_follows(s.follows, dir / "follows.tsv");
  write_profiles(s.profiles, dir / "profiles.ndjson");
  auto write_labels = [&](const LabelMap& labels, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open for writing: " + path.string());
    out << "user,label\n";
    for (const auto& [user, label] : labels) out << user << ',' << to_string(label) << '\n';
  };
  write_labels(s.seeds, dir / "seeds.csv");
  write_labels(s.planted, dir / "planted.csv");
}

}  // namespace echochamber::synth
