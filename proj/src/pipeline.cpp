#include "echochamber/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include "echochamber/communities.hpp"
#include "echochamber/controversy.hpp"
#include "echochamber/echo_metrics.hpp"
#include "echochamber/evaluation.hpp"
#include "echochamber/ingest.hpp"
#include "echochamber/partition.hpp"
#include "echochamber/synth.hpp"
#include "echochamber/util.hpp"
#include "json.hpp"

#ifndef ECHOCHAMBER_VERSION
#define ECHOCHAMBER_VERSION "unknown"
#endif

namespace echochamber::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> kKeys = {
      {"tweets", "", "collection-window tweets (NDJSON)"},
      {"historical", "", "historical tweets (NDJSON)"},
      {"follows", "", "follow edges (TSV follower, followee)"},
      {"profiles", "", "account profiles (NDJSON)"},
      {"seeds", "", "seed users with known stance (CSV user,label)"},
      {"labels", "", "precomputed stance labels (CSV ending in a label column); skips partitioning"},
      {"model", "", "model file for score; defaults to the one train writes"},
      {"outdir", "out", "artifact root"},
      {"seed", "0", "global seed"},
      {"threads", "1", "worker cap; 0 uses every core"},
      {"edge_threshold", "2", "minimum retweet count kept in the network"},
      {"runs", "100", "bipartitions in the leaning ensemble"},
      {"balance_ratio", "1.0", "target side-size ratio 1:r"},
      {"balance_tolerance", "0.03", "allowed side-size deviation as a node fraction"},
      {"coarsen_stop", "100", "stop coarsening below this many nodes"},
      {"epsilon", "0.05", "extremity margin around 0 and 1"},
      {"balance_grid", "1.0,1.25,1.54,2.0", "ratios tried by tune"},
      {"hub_k", "10", "hubs per side for random-walk controversy"},
      {"rwc_method", "exact", "exact, montecarlo or both"},
      {"walks", "100000", "Monte Carlo walks per side"},
      {"binning", "log2", "spectrum binning: log2 or linear"},
      {"bin_width", "1", "linear bin width"},
      {"density_bins", "20", "bins per axis of the neighbor-leaning densities"},
      {"earliest_split", "0", "drop users whose split point is earlier (UTC seconds)"},
      {"features", "bow", "aggregate, bow or combined"},
      {"classifier", "logistic", "logistic or forest"},
      {"l2_lambda", "1.0", "logistic L2 penalty"},
      {"trees", "200", "forest size"},
      {"min_split", "8", "forest minimum samples per split"},
      {"max_depth", "30", "forest depth limit"},
      {"min_df", "10", "bag-of-words document-frequency cutoff"},
      {"folds", "5", "cross-validation folds"},
      {"importance_repeats", "10", "shuffles per feature for permutation importance"},
      {"synth_n0", "200", "synthetic Skeptic users in the network"},
      {"synth_n1", "300", "synthetic Advocate users in the network"},
      {"synth_p_in", "0.05", "synthetic within-side retweet probability"},
      {"synth_p_out", "0.002", "synthetic cross-side retweet probability"},
      {"synth_mention_asymmetry", "2.0", "extra Skeptic-to-Advocate mention rate"},
      {"synth_tweets_per_user", "20", "synthetic historical tweets per user"},
      {"synth_vocab_overlap", "0.2", "shared fraction of the synthetic word pools"},
      {"synth_outsiders", "25", "synthetic out-of-network users per side"},
      {"synth_seeds", "3", "synthetic seed users per side"},
  };
  return kKeys;
}

Config::Config() {
  for (const auto& k : config_keys()) values_[k.name] = k.default_value;
}

void Config::set(std::string_view key, std::string value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw UsageError("unknown configuration key '" + std::string(key) + "'");
  it->second = std::move(value);
}

void Config::load_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read config file " + path.string());
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto text = trim(line);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos)
      throw UsageError(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
    try {
      set(trim(text.substr(0, eq)), trim(text.substr(eq + 1)));
    } catch (const UsageError& e) {
      throw UsageError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

const std::string& Config::get(std::string_view key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw UsageError("unknown configuration key '" + std::string(key) + "'");
  return it->second;
}

double Config::get_double(std::string_view key) const {
  const auto& s = get(key);
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    throw UsageError(std::string(key) + ": expected a number, got '" + s + "'");
  return v;
}

std::uint64_t Config::get_u64(std::string_view key) const {
  const auto& s = get(key);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw UsageError(std::string(key) + ": expected a non-negative integer, got '" + s + "'");
  return v;
}

bool Config::get_bool(std::string_view key) const {
  const auto& s = get(key);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw UsageError(std::string(key) + ": expected true or false, got '" + s + "'");
}

std::vector<double> Config::get_list(std::string_view key) const {
  std::vector<double> out;
  for (const auto& part : split(get(key), ',')) {
    const auto t = trim(part);
    double v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
      throw UsageError(std::string(key) + ": expected comma-separated numbers, got '" + get(key) + "'");
    out.push_back(v);
  }
  return out;
}

std::string Config::canonical() const {
  std::string s;
  for (const auto& [k, v] : values_)
    if (k != "outdir" && k != "threads") s += k + "=" + v + "\n";
  return s;
}

std::string Config::hash() const { return fnv1a_hex(canonical()); }

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> kNames = {"build-nets", "partition", "tune",  "rwc",   "communities",
                                                  "echo",       "spectra",   "content-stats", "dataset", "train",
                                                  "eval",       "score",     "synth", "report"};
  return kNames;
}

const std::vector<std::string>& report_steps() {
  static const std::vector<std::string> kSteps = {"build-nets", "partition", "rwc",   "communities", "echo",
                                                  "spectra",    "content-stats", "dataset", "eval", "train",
                                                  "score"};
  return kSteps;
}

std::string version() { return ECHOCHAMBER_VERSION; }

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

void write_json(const json& j, const fs::path& path) { open_out(path) << j.dump(2) << '\n'; }

struct Oriented {
  std::vector<LeaningScore> scores;  // 0 = Skeptic, 1 = Advocate
  std::map<UserId, double> score_of;
  LabelMap labels;
  std::size_t extreme = 0;
  std::vector<std::string> warnings;
};

// Lazily loaded inputs and stage results shared by the steps of one run.
class Pipeline {
 public:
  explicit Pipeline(const Config& cfg) : cfg_(cfg) {}

  const Config& cfg() const { return cfg_; }

  fs::path input(std::string_view key) const {
    const auto p = cfg_.get_path(key);
    if (p.empty()) throw UsageError("configuration key '" + std::string(key) + "' is required");
    if (!fs::exists(p)) throw Error(std::string(key) + ": no such file: " + p.string());
    return p;
  }

  const ParsedStream<TweetRecord>& tweets() {
    if (!tweets_) tweets_ = read_tweets(input("tweets"));
    return *tweets_;
  }
  const ParsedStream<TweetRecord>& historical() {
    if (!historical_) historical_ = read_tweets(input("historical"));
    return *historical_;
  }
  const ProfileMap& profiles() {
    if (!profiles_) profiles_ = cfg_.get_path("profiles").empty() ? ProfileMap{} : read_profiles(input("profiles"));
    return *profiles_;
  }
  const LabelMap& seeds() {
    if (!seeds_) seeds_ = read_label_csv(input("seeds"));
    return *seeds_;
  }

  const DirectedWeightedGraph& retweet_raw() {
    if (!retweet_raw_) retweet_raw_ = build_retweet_network(tweets().records);
    return *retweet_raw_;
  }
  /// Thresholded retweet network, giant weak component.
  const DirectedWeightedGraph& network() {
    if (!network_) {
      network_ = giant_component(threshold_edges(retweet_raw(), cfg_.get_u64("edge_threshold")));
      if (network_->node_count() < 2) throw Error("retweet network is empty after thresholding");
    }
    return *network_;
  }

  PartitionConfig partition_config() const {
    PartitionConfig p;
    p.runs = cfg_.get_size("runs");
    p.balance_ratio = cfg_.get_double("balance_ratio");
    p.balance_tolerance = cfg_.get_double("balance_tolerance");
    p.coarsen_stop = cfg_.get_size("coarsen_stop");
    p.extremity_epsilon = cfg_.get_double("epsilon");
    p.rng_seed = cfg_.get_u64("seed");
    p.threads = threads();
    try {
      p.validate();
    } catch (const InvalidArgument& e) {
      throw UsageError(e.what());
    }
    return p;
  }

  unsigned threads() const { return static_cast<unsigned>(cfg_.get_u64("threads")); }

  const Oriented& oriented() {
    if (oriented_) return *oriented_;
    if (!cfg_.get_path("labels").empty()) {
      Oriented o;
      o.labels = read_label_csv(input("labels"));
      for (const auto& [u, l] : o.labels) {
        if (l == StanceLabel::Unassigned) continue;
        o.scores.push_back({u, l == StanceLabel::Advocate ? 1.0 : 0.0, 0});
        o.score_of[u] = o.scores.back().score;
      }
      o.extreme = o.scores.size();
      oriented_ = std::move(o);
      return *oriented_;
    }
    const auto raw = ensemble_leaning(network(), partition_config());
    const double eps = cfg_.get_double("epsilon");
    auto assignment = assign_stances(raw, seeds(), eps);
    Oriented o;
    o.scores = orient_scores(raw, assignment);
    o.score_of = score_map(o.scores);
    o.labels = std::move(assignment.labels);
    o.extreme = extremity_count(o.scores, eps);
    o.warnings = std::move(assignment.warnings);
    oriented_ = std::move(o);
    return *oriented_;
  }

  /// Thresholded retweet network restricted to labeled users.
  DirectedWeightedGraph labeled_network() {
    std::vector<UserId> keep;
    for (const auto& [u, _] : sides()) keep.push_back(u);
    return induced_subgraph(threshold_edges(retweet_raw(), cfg_.get_u64("edge_threshold")), keep);
  }

  /// Skeptic -> 0, Advocate -> 1, over labeled users only.
  std::map<UserId, int> sides() {
    std::map<UserId, int> s;
    for (const auto& [u, l] : oriented().labels)
      if (l != StanceLabel::Unassigned) s[u] = l == StanceLabel::Advocate ? 1 : 0;
    return s;
  }

  const std::vector<stance::UserHistory>& dataset() {
    if (dataset_) return *dataset_;
    auto all = stance::build_dataset(tweets().records, historical().records, oriented().labels,
                                     static_cast<Timestamp>(cfg_.get_u64("earliest_split")));
    std::vector<stance::UserHistory> kept;
    dropped_empty_ = 0;
    for (auto& h : all) {
      if (h.tweets.empty()) ++dropped_empty_;
      else kept.push_back(std::move(h));
    }
    dataset_ = std::move(kept);
    return *dataset_;
  }
  std::size_t dropped_empty() {
    dataset();
    return dropped_empty_;
  }

  std::unique_ptr<stance::Featurizer> make_featurizer() {
    const auto& kind = cfg_.get("features");
    auto tagger = std::make_shared<stance::HeuristicItalianTagger>();
    stance::VectorizerOptions o;
    o.min_df = cfg_.get_size("min_df");
    const ProfileMap* prof = &profiles();
    if (kind == "aggregate") return std::make_unique<stance::AggregateFeaturizer>(prof, tagger, true);
    if (kind == "bow") return std::make_unique<stance::BowFeaturizer>(o);
    if (kind == "combined")
      return std::make_unique<stance::CombinedFeaturizer>(
          std::make_unique<stance::AggregateFeaturizer>(prof, tagger, true), std::make_unique<stance::BowFeaturizer>(o));
    throw UsageError("features: expected aggregate, bow or combined, got '" + kind + "'");
  }

  std::unique_ptr<stance::Classifier> make_classifier() const {
    const auto& kind = cfg_.get("classifier");
    if (kind == "logistic") {
      stance::LogisticConfig c;
      c.l2_lambda = cfg_.get_double("l2_lambda");
      return std::make_unique<stance::LogisticClassifier>(c);
    }
    if (kind == "forest") {
      stance::ForestConfig c;
      c.trees = cfg_.get_size("trees");
      c.min_samples_split = cfg_.get_size("min_split");
      c.max_depth = cfg_.get_size("max_depth");
      c.seed = cfg_.get_u64("seed");
      c.threads = threads();
      return std::make_unique<stance::ForestClassifier>(c);
    }
    throw UsageError("classifier: expected logistic or forest, got '" + kind + "'");
  }

  /// Path of the model written by `train` in the same output root.
  fs::path trained_model_path() const { return fs::path(cfg_.get("outdir")) / "train" / "model.json"; }
  /// Set while `report` runs, so `score` uses the model trained in the bundle.
  std::optional<fs::path> model_override;

 private:
  const Config& cfg_;
  std::optional<ParsedStream<TweetRecord>> tweets_, historical_;
  std::optional<ProfileMap> profiles_;
  std::optional<LabelMap> seeds_;
  std::optional<DirectedWeightedGraph> retweet_raw_, network_;
  std::optional<Oriented> oriented_;
  std::optional<std::vector<stance::UserHistory>> dataset_;
  std::size_t dropped_empty_ = 0;
};

json graph_summary(const DirectedWeightedGraph& g) {
  auto r = reciprocity(g);
  return {{"nodes", g.node_count()}, {"edges", g.edge_count()}, {"reciprocity", r.value}};
}

void step_build_nets(Pipeline& p, const fs::path& dir) {
  const auto& tweets = p.tweets();
  const auto& raw = p.retweet_raw();
  const auto mention = build_mention_network(tweets.records);
  write_edge_list(raw, dir / "retweet.tsv");
  write_edge_list(mention, dir / "mention.tsv");
  write_edge_list(p.network(), dir / "retweet_filtered.tsv");
  json j = {{"tweets", tweets.records.size()},
            {"tweet_parse_errors", tweets.parse_errors},
            {"edge_threshold", p.cfg().get_u64("edge_threshold")},
            {"retweet", graph_summary(raw)},
            {"mention", graph_summary(mention)},
            {"retweet_filtered", graph_summary(p.network())}};
  if (!p.cfg().get_path("follows").empty()) {
    const auto follows = read_follows(p.input("follows"));
    const auto fg = build_follow_network(follows.records);
    write_edge_list(fg, dir / "follow.tsv");
    j["follow"] = graph_summary(fg);
    j["follow_parse_errors"] = follows.parse_errors;
  }
  write_json(j, dir / "summary.json");
}

void write_scores(const Oriented& o, const fs::path& path) {
  auto out = open_out(path);
  out << "user,score,label\n";
  for (const auto& s : o.scores) out << s.user << ',' << format_double(s.score) << ',' << to_string(o.labels.at(s.user)) << '\n';
}

void step_partition(Pipeline& p, const fs::path& dir) {
  const auto& o = p.oriented();
  write_scores(o, dir / "scores.csv");
  std::size_t counts[3] = {0, 0, 0};
  for (const auto& [_, l] : o.labels) ++counts[static_cast<int>(l)];
  const auto n = o.scores.size();
  write_json({{"nodes", n},
              {"runs", p.cfg().get_u64("runs")},
              {"balance_ratio", p.cfg().get_double("balance_ratio")},
              {"epsilon", p.cfg().get_double("epsilon")},
              {"extreme", o.extreme},
              {"extreme_fraction", n ? static_cast<double>(o.extreme) / static_cast<double>(n) : 0.0},
              {"skeptic", counts[0]},
              {"advocate", counts[1]},
              {"unassigned", counts[2]},
              {"warnings", o.warnings}},
             dir / "summary.json");
}

void step_tune(Pipeline& p, const fs::path& dir) {
  const auto grid = p.cfg().get_list("balance_grid");
  if (grid.empty()) throw UsageError("balance_grid is empty");
  const auto r = tune_balance(p.network(), grid, p.partition_config());
  auto out = open_out(dir / "tune.csv");
  out << "balance_ratio,extreme,extreme_fraction\n";
  const auto n = static_cast<double>(p.network().node_count());
  for (const auto& c : r.candidates)
    out << format_double(c.balance_ratio) << ',' << c.extreme << ',' << format_double(static_cast<double>(c.extreme) / n)
        << '\n';
  write_json({{"best_ratio", r.best_ratio}, {"nodes", p.network().node_count()}}, dir / "tune.json");
}

json rwc_json(const DirectedWeightedGraph& g, const std::map<UserId, int>& sides, const Config& cfg, unsigned threads) {
  const auto hub_k = cfg.get_size("hub_k");
  const auto& method = cfg.get("rwc_method");
  if (method != "exact" && method != "montecarlo" && method != "both")
    throw UsageError("rwc_method: expected exact, montecarlo or both, got '" + method + "'");
  json j = {{"nodes", g.node_count()}, {"edges", g.edge_count()}, {"x", "skeptic"}, {"y", "advocate"}};
  if (method != "montecarlo") j["exact"] = rwc_exact(g, sides, hub_k).to_json();
  if (method != "exact")
    j["montecarlo"] = rwc_montecarlo(g, sides, hub_k, cfg.get_size("walks"), cfg.get_u64("seed"), threads).to_json();
  return j;
}

void step_rwc(Pipeline& p, const fs::path& dir) {
  const auto sides = p.sides();
  std::vector<UserId> keep;
  for (const auto& [u, _] : sides) keep.push_back(u);
  const auto rt = p.labeled_network();
  std::map<UserId, int> rt_sides;
  for (const auto& id : rt.ids()) rt_sides[id] = sides.at(id);
  write_json(rwc_json(rt, rt_sides, p.cfg(), p.threads()), dir / "rwc_retweet.json");
  const auto mention = induced_subgraph(build_mention_network(p.tweets().records), keep);
  std::map<UserId, int> present;
  for (const auto& id : mention.ids()) present[id] = sides.at(id);
  auto j = rwc_json(mention, present, p.cfg(), p.threads());
  const auto& r = j.contains("exact") ? j["exact"] : j["montecarlo"];
  j["asymmetry"] = {{"p_skeptic_to_advocate", r["pxy"]}, {"p_advocate_to_skeptic", r["pyx"]}};
  write_json(j, dir / "rwc_mention.json");
}

void step_communities(Pipeline& p, const fs::path& dir) {
  const auto& g = p.network();
  const auto r = detect_communities(g);
  const auto s = summarize_communities(g, r, p.oriented().score_of);
  write_community_csv(s, dir / "communities.csv");
  write_assignment_csv(g, r, dir / "assignment.csv");
  write_json({{"communities", r.count}, {"modularity", r.modularity}, {"nodes", g.node_count()}},
             dir / "summary.json");
}

void step_echo(Pipeline& p, const fs::path& dir) {
  const auto& o = p.oriented();
  const auto recs = neighbor_leanings(p.network(), o.score_of);
  const auto bins = p.cfg().get_size("density_bins");
  write_neighbor_leanings_csv(recs, dir / "neighbor_leanings.csv");
  try {
    write_density_csv(leaning_density(recs, bins), dir / "density_all.csv");
  } catch (const InvalidArgument& e) {
    throw UsageError(std::string("density_bins: ") + e.what());
  }
  write_density_csv(leaning_density(recs, bins, label_filter(o.labels, StanceLabel::Skeptic)), dir / "density_skeptic.csv");
  write_density_csv(leaning_density(recs, bins, label_filter(o.labels, StanceLabel::Advocate)), dir / "density_advocate.csv");
  write_json({{"users", recs.size()}, {"correlation_own_vs_out_neighbors", echo_chamber_correlation(recs)}},
             dir / "summary.json");
}

void step_spectra(Pipeline& p, const fs::path& dir) {
  Binning b;
  const auto& kind = p.cfg().get("binning");
  if (kind == "linear") {
    b.kind = Binning::Kind::Linear;
    b.width = p.cfg().get_size("bin_width");
    if (b.width < 1) throw UsageError("bin_width must be >= 1");
  } else if (kind != "log2") {
    throw UsageError("binning: expected log2 or linear, got '" + kind + "'");
  }
  write_spectrum_csv(clustering_spectrum(p.network(), b), dir / "clustering.csv");
  write_spectrum_csv(knn_spectrum(p.network(), b), dir / "knn.csv");
}

void write_ranked(const std::vector<RankedCount>& rows, const fs::path& path) {
  auto out = open_out(path);
  out << "token,skeptic,advocate,total\n";
  for (const auto& r : rows)
    out << r.token << ',' << r.counts.skeptic << ',' << r.counts.advocate << ',' << r.counts.total() << '\n';
}

void step_content_stats(Pipeline& p, const fs::path& dir) {
  const auto stats = content_stats(p.tweets().records, p.oriented().labels);
  write_ranked(stats.ranked_hashtags(), dir / "hashtags.csv");
  write_ranked(stats.ranked_domains(), dir / "domains.csv");
}

void step_dataset(Pipeline& p, const fs::path& dir) {
  const auto& ds = p.dataset();
  auto out = open_out(dir / "dataset.csv");
  out << "user,label,split_point,tweets\n";
  std::size_t counts[2] = {0, 0};
  for (const auto& h : ds) {
    out << h.user << ',' << to_string(h.label) << ',' << h.split_point << ',' << h.tweets.size() << '\n';
    ++counts[stance::class_of(h.label)];
  }
  write_json({{"users", ds.size()},
              {"skeptic", counts[0]},
              {"advocate", counts[1]},
              {"dropped_empty_history", p.dropped_empty()},
              {"majority_baseline", ds.empty() ? 0.0 : static_cast<double>(std::max(counts[0], counts[1])) /
                                                           static_cast<double>(ds.size())}},
             dir / "summary.json");
}

void step_eval(Pipeline& p, const fs::path& dir) {
  const auto& ds = p.dataset();
  const auto r = stance::evaluate_cv(
      ds, [&] { return p.make_featurizer(); }, [&] { return p.make_classifier(); }, p.cfg().get_size("folds"),
      p.cfg().get_u64("seed"));
  auto out = open_out(dir / "folds.csv");
  out << "fold,accuracy,auc,f1\n";
  for (std::size_t i = 0; i < r.folds.size(); ++i)
    out << i << ',' << format_double(r.folds[i].accuracy) << ',' << format_double(r.folds[i].auc) << ','
        << format_double(r.folds[i].f1) << '\n';
  write_json({{"features", p.cfg().get("features")},
              {"classifier", p.cfg().get("classifier")},
              {"folds", r.fold_count},
              {"users", ds.size()},
              {"accuracy", r.accuracy},
              {"auc", r.auc},
              {"f1", r.f1}},
             dir / "eval.json");
}

void step_train(Pipeline& p, const fs::path& dir) {
  const auto& ds = p.dataset();
  stance::TrainedModel m;
  m.featurizer_kind = p.cfg().get("features");
  m.classifier_kind = p.cfg().get("classifier");
  m.config_hash = p.cfg().hash();
  m.featurizer = p.make_featurizer();
  m.classifier = p.make_classifier();
  std::vector<std::size_t> all(ds.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  m.featurizer->fit(ds, all);
  const auto X = m.featurizer->transform(ds);
  const auto y = stance::labels_of(ds);
  m.classifier->fit(X, y);
  stance::save_model(m, dir / "model.json");

  const auto names = m.featurizer->feature_names();
  std::vector<stance::FeatureImportance> imp;
  if (const auto* lr = dynamic_cast<const stance::LogisticClassifier*>(m.classifier.get()))
    imp = stance::coefficient_ranking(lr->model(), names);
  else
    imp = stance::permutation_importance(*m.classifier, X, y, names, p.cfg().get_size("importance_repeats"),
                                         p.cfg().get_u64("seed"));
  auto out = open_out(dir / "importance.csv");
  out << "feature,importance\n";
  for (const auto& f : imp) out << f.feature << ',' << format_double(f.importance) << '\n';
}

void step_score(Pipeline& p, const fs::path& dir) {
  fs::path model_path = p.model_override ? *p.model_override : p.cfg().get_path("model");
  if (model_path.empty()) model_path = p.trained_model_path();
  if (!fs::exists(model_path)) throw Error("model: no such file: " + model_path.string());
  const auto model = stance::load_model(model_path, &p.profiles());

  // Users with history who are not part of the labeled network.
  const auto& labels = p.oriented().labels;
  std::set<UserId> users;
  for (const auto& t : p.historical().records)
    if (!labels.contains(t.user_id)) users.insert(t.user_id);
  const std::vector<UserId> list(users.begin(), users.end());
  std::vector<stance::UserHistory> hs;
  for (auto& h : stance::full_histories(p.historical().records, list))
    if (!h.tweets.empty()) hs.push_back(std::move(h));
  auto out = open_out(dir / "predictions.csv");
  out << "user,score,label\n";
  if (hs.empty()) return;
  const auto scores = model.score(hs);
  for (std::size_t i = 0; i < hs.size(); ++i)
    out << hs[i].user << ',' << format_double(scores[i]) << ',' << (scores[i] >= 0.5 ? "advocate" : "skeptic") << '\n';
}

void step_synth(Pipeline& p, const fs::path& dir) {
  const auto& c = p.cfg();
  synth::ScenarioConfig s;
  s.retweet.n0 = c.get_size("synth_n0");
  s.retweet.n1 = c.get_size("synth_n1");
  s.retweet.p_in = c.get_double("synth_p_in");
  s.retweet.p_out = c.get_double("synth_p_out");
  s.mention_asymmetry = c.get_double("synth_mention_asymmetry");
  s.text.tweets_per_user = c.get_size("synth_tweets_per_user");
  s.text.vocab_overlap = c.get_double("synth_vocab_overlap");
  s.outsiders_per_side = c.get_size("synth_outsiders");
  s.seeds_per_side = c.get_size("synth_seeds");
  s.seed = c.get_u64("seed");
  synth::Scenario sc;
  try {
    sc = synth::generate_scenario(s);
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  synth::write_scenario(sc, dir);
}

using Step = void (*)(Pipeline&, const fs::path&);

Step find_step(std::string_view name) {
  static const std::map<std::string, Step, std::less<>> kSteps = {
      {"build-nets", step_build_nets}, {"partition", step_partition}, {"tune", step_tune},
      {"rwc", step_rwc},               {"communities", step_communities}, {"echo", step_echo},
      {"spectra", step_spectra},       {"content-stats", step_content_stats}, {"dataset", step_dataset},
      {"train", step_train},           {"eval", step_eval},           {"score", step_score},
      {"synth", step_synth}};
  auto it = kSteps.find(name);
  return it == kSteps.end() ? nullptr : it->second;
}

json file_listing(const fs::path& root) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) files.push_back(fs::relative(e.path(), root));
  std::sort(files.begin(), files.end());
  json list = json::array();
  for (const auto& f : files) {
    std::ifstream in(root / f, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    const auto data = ss.str();
    list.push_back({{"path", f.generic_string()}, {"bytes", data.size()}, {"fnv1a", fnv1a_hex(data)}});
  }
  return list;
}

void run_report(Pipeline& p, const fs::path& dir) {
  p.model_override = dir / "train" / "model.json";
  for (const auto& step : report_steps()) {
    fs::create_directories(dir / step);
    find_step(step)(p, dir / step);
  }
  json manifest = {{"version", version()},
                   {"config_hash", p.cfg().hash()},
                   {"seed", p.cfg().get_u64("seed")},
                   {"steps", report_steps()},
                   {"config", p.cfg().values()},
                   {"files", file_listing(dir)}};
  write_json(manifest, dir / "manifest.json");
}

}  // namespace

void run_subcommand(std::string_view name, const Config& cfg) {
  const bool report = name == "report";
  const Step step = find_step(name);
  if (!report && !step) throw UsageError("unknown subcommand '" + std::string(name) + "'");

  const fs::path root = cfg.get_path("outdir");
  if (root.empty()) throw UsageError("outdir must not be empty");
  const fs::path target = root / std::string(name);
  const fs::path tmp = root / ("." + std::string(name) + ".partial");
  fs::remove_all(tmp);
  fs::create_directories(tmp);
  try {
    Pipeline p(cfg);
    if (report) run_report(p, tmp);
    else step(p, tmp);
  } catch (...) {
    std::error_code ec;
    fs::remove_all(tmp, ec);
    throw;
  }
  fs::remove_all(target);
  fs::rename(tmp, target);
}

}  // namespace echochamber::pipeline
