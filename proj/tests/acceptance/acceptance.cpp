// Acceptance gate. Prints one PASS/FAIL line per criterion and exits nonzero
// if any fails. Pass criterion names as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "echochamber/classifiers.hpp"
#include "echochamber/controversy.hpp"
#include "echochamber/echo_metrics.hpp"
#include "echochamber/evaluation.hpp"
#include "echochamber/partition.hpp"
#include "echochamber/pipeline.hpp"
#include "echochamber/synth.hpp"
#include "support/random_graphs.hpp"
#include "support/rwc_oracle.hpp"

using namespace echochamber;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

synth::SbmGraph skewed_sbm(std::uint64_t seed) {
  synth::SbmConfig c;
  c.n0 = 1000;
  c.n1 = 1540;
  c.p_in = 0.02;
  c.p_out = 0.001;
  c.seed = seed;
  return synth::generate_sbm(c);
}

Outcome planted_recovery() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto sbm = skewed_sbm(1);
  const auto g = giant_component(sbm.graph);
  PartitionConfig cfg;
  cfg.runs = 100;
  cfg.balance_ratio = 1.54;
  const auto scores = ensemble_leaning(g, cfg);
  const double secs = seconds_since(t0);

  const std::size_t extreme = extremity_count(scores, 0.05);
  std::size_t match = 0;
  for (const auto& s : scores) match += (s.score >= 0.5 ? 1 : 0) == sbm.planted.at(s.user);
  const double n = static_cast<double>(sbm.graph.node_count());
  const double ext = static_cast<double>(extreme) / n;
  const double agree = static_cast<double>(std::max(match, scores.size() - match)) / n;
  return {ext >= 0.90 && agree >= 0.95 && secs <= 120.0,
          fmt("extreme %.4f (>= 0.90), agreement %.4f (>= 0.95), %.1f s (<= 120), giant %zu of %zu", ext, agree,
              secs, g.node_count(), sbm.graph.node_count())};
}

Outcome balance_tuning() {
  const std::vector<double> grid{1.0, 1.25, 1.54, 2.0};
  int hits = 0;
  std::string picks;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto g = giant_component(skewed_sbm(100 + seed).graph);
    PartitionConfig cfg;
    cfg.runs = 100;
    cfg.rng_seed = seed;
    const auto r = tune_balance(g, grid, cfg);
    hits += r.best_ratio == 1.54;
    picks += fmt("%s%g", picks.empty() ? "" : ",", r.best_ratio);
  }
  return {hits >= 8, fmt("1.54 chosen in %d of 10 seeds (>= 8); picks %s", hits, picks.c_str())};
}

std::map<UserId, int> random_sides(const DirectedWeightedGraph& g, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(0.5);
  std::map<UserId, int> s;
  for (const auto& id : g.ids()) s[id] = coin(rng) ? 1 : 0;
  return s;
}

Outcome rwc_exactness() {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> size(20, 200);
  std::uniform_real_distribution<double> density(0.01, 0.08);
  double worst = 0.0;
  bool identity = true;
  int graphs = 0;
  while (graphs < 20) {
    const auto g = testing_support::random_graph(rng, size(rng), density(rng), 4);
    auto sides = random_sides(g, rng);
    int counts[2] = {0, 0};
    for (const auto& [_, s] : sides) ++counts[s];
    const std::size_t k = 1 + graphs % 5;
    if (counts[0] <= static_cast<int>(k) || counts[1] <= static_cast<int>(k)) continue;
    ++graphs;
    const auto r = rwc_exact(g, sides, k);
    std::map<std::pair<std::string, std::string>, std::uint64_t> edges;
    for (const auto& [key, w] : g.edge_map()) edges[key] = w;
    const auto o = testing_support::oracle_rwc(edges, sides, k);
    worst = std::max({worst, std::abs(r.pxx - o.p[0][0]), std::abs(r.pxy - o.p[0][1]), std::abs(r.pyx - o.p[1][0]),
                      std::abs(r.pyy - o.p[1][1]), std::abs(r.rwc - o.rwc())});
    identity = identity && r.rwc == r.pxx * r.pyy - r.pxy * r.pyx;
  }
  return {worst <= 1e-8 && identity,
          fmt("max |exact - oracle| %.3g over 20 graphs (<= 1e-8); field identity %s", worst,
              identity ? "exact" : "violated")};
}

Outcome rwc_montecarlo_agreement() {
  double worst = 0.0;
  std::size_t max_n = 0;
  std::string sizes;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    synth::SbmConfig c;
    c.n0 = 100 + 50 * seed;
    c.n1 = 200;
    c.p_in = 0.03;
    c.p_out = 0.004;
    c.seed = seed;
    const auto s = synth::generate_sbm(c);
    const auto ex = rwc_exact(s.graph, s.planted, 10);
    const auto mc = rwc_montecarlo(s.graph, s.planted, 10, 100000, seed, 1);
    worst = std::max({worst, std::abs(ex.rwc - mc.rwc), std::abs(ex.pxx - mc.pxx), std::abs(ex.pxy - mc.pxy),
                      std::abs(ex.pyx - mc.pyx), std::abs(ex.pyy - mc.pyy)});
    sizes += fmt("%s%zu", sizes.empty() ? "" : ",", s.graph.node_count());
    max_n = std::max(max_n, s.graph.node_count());
  }
  return {worst <= 0.02 && max_n <= 500, fmt("max |MC - exact| %.4f (<= 0.02), 1e5 walks per side, n = %s", worst, sizes.c_str())};
}

Outcome rwc_endpoints() {
  synth::SbmConfig c;
  c.n0 = 200;
  c.n1 = 300;
  c.p_in = 0.05;
  c.p_out = 0.0;
  c.seed = 5;
  auto s = synth::generate_sbm(c);
  const double disconnected = rwc_exact(s.graph, s.planted, 10).rwc;

  std::mt19937_64 rng(77);
  double sum = 0.0;
  for (std::uint64_t t = 0; t < 20; ++t) {
    synth::SbmConfig h;
    h.n0 = 150;
    h.n1 = 150;
    h.p_in = 0.03;
    h.p_out = 0.03;
    h.seed = 1000 + t;
    auto hs = synth::generate_sbm(h);
    sum += rwc_exact(hs.graph, random_sides(hs.graph, rng), 10).rwc;
  }
  const double homogeneous = sum / 20.0;

  std::vector<double> sweep;
  bool monotone = true;
  for (double p_out : {0.0005, 0.001, 0.002, 0.004, 0.008}) {
    c.p_out = p_out;
    s = synth::generate_sbm(c);
    sweep.push_back(rwc_exact(s.graph, s.planted, 10).rwc);
    if (sweep.size() > 1) monotone = monotone && sweep.back() <= sweep[sweep.size() - 2] + 0.01;
  }
  std::string trace;
  for (double v : sweep) trace += fmt("%s%.3f", trace.empty() ? "" : ",", v);
  return {disconnected >= 0.95 && std::abs(homogeneous) <= 0.05 && monotone,
          fmt("disconnected %.4f (>= 0.95); homogeneous mean %.4f (|.| <= 0.05); sweep %s %s", disconnected,
              homogeneous, trace.c_str(), monotone ? "non-increasing" : "NOT non-increasing")};
}

Outcome asymmetry_detection() {
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    synth::SbmConfig c;
    c.n0 = 200;
    c.n1 = 300;
    c.p_in = 0.05;
    c.p_out = 0.002;
    c.cross_asymmetry = 4.0;
    c.seed = 50 + seed;
    const auto s = synth::generate_sbm(c);
    const auto r = rwc_exact(s.graph, s.planted, 10);
    wins += r.pxy > r.pyx;
  }
  return {wins >= 9, fmt("P_XY > P_YX in %d of 10 seeds (>= 9)", wins)};
}

Outcome echo_correlation() {
  synth::SbmConfig c;
  c.n0 = 1000;
  c.n1 = 1540;
  c.p_in = 0.02;
  c.p_out = 0.001;
  c.seed = 9;
  const auto s = synth::generate_sbm(c);
  std::map<UserId, double> scores;
  for (const auto& [id, b] : s.planted) scores[id] = b;
  const double r = echo_chamber_correlation(neighbor_leanings(s.graph, scores));
  return {r >= 0.9, fmt("corr(own, out-neighbor mean) %.4f (>= 0.9), p_in/p_out = 20", r)};
}

// Brute-force references, independent of the library code paths.
double oracle_reciprocity(const std::set<std::pair<std::size_t, std::size_t>>& arcs) {
  if (arcs.empty()) return 0.0;
  std::size_t mutual = 0;
  for (const auto& [u, v] : arcs) mutual += arcs.count({v, u});
  return static_cast<double>(mutual) / static_cast<double>(arcs.size());
}

double oracle_auc(const std::vector<int>& y, const std::vector<double>& s) {
  double wins = 0, pairs = 0;
  for (std::size_t i = 0; i < y.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j)
      if (y[i] == 1 && y[j] == 0) {
        pairs += 1;
        wins += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
      }
  return wins / pairs;
}

Outcome metric_oracles() {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::size_t> size(10, 200);
  std::uniform_real_distribution<double> density(0.01, 0.15);
  double err[4] = {0, 0, 0, 0};
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = size(rng);
    const auto edges = testing_support::random_edges(rng, n, density(rng), 3);
    const auto g = testing_support::build(edges);

    std::map<std::string, std::size_t> idx;
    for (const auto& e : edges) {
      idx.emplace(e.source, idx.size());
      idx.emplace(e.target, idx.size());
    }
    const std::size_t m = idx.size();
    std::set<std::pair<std::size_t, std::size_t>> arcs;
    std::vector<std::vector<bool>> adj(m, std::vector<bool>(m, false));
    std::vector<std::vector<std::size_t>> outs(m);
    std::vector<double> total(m, 0.0);
    for (const auto& e : edges) {
      const auto u = idx.at(e.source), v = idx.at(e.target);
      arcs.insert({u, v});
      adj[u][v] = adj[v][u] = true;
      outs[u].push_back(v);
      total[u] += 1;
      total[v] += 1;
    }
    err[0] = std::max(err[0], std::abs(reciprocity(g).value - oracle_reciprocity(arcs)));

    const auto cc = local_clustering(g);
    const auto knn = out_neighbor_degree(g);
    for (const auto& [name, i] : idx) {
      const auto v = *g.find(name);
      std::size_t k = 0, tri = 0;
      for (std::size_t a = 0; a < m; ++a) k += adj[i][a];
      for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = a + 1; b < m; ++b) tri += adj[i][a] && adj[i][b] && adj[a][b];
      const double c = k < 2 ? 0.0 : static_cast<double>(tri) / (static_cast<double>(k * (k - 1)) / 2.0);
      err[1] = std::max(err[1], std::abs(cc[v] - c));
      if (outs[i].empty()) {
        if (knn[v]) err[2] = std::max(err[2], 1.0);
        continue;
      }
      double sum = 0;
      for (auto u : outs[i]) sum += total[u];
      err[2] = std::max(err[2], knn[v] ? std::abs(*knn[v] - sum / static_cast<double>(outs[i].size())) : 1.0);
    }

    std::bernoulli_distribution coin(0.5);
    std::uniform_int_distribution<int> level(0, 20);
    std::vector<int> y(n);
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = coin(rng);
      s[i] = level(rng) / 20.0;
    }
    y[0] = 0;
    y[1] = 1;
    err[3] = std::max(err[3], std::abs(stance::roc_auc(y, s) - oracle_auc(y, s)));
  }
  const bool ok = std::all_of(std::begin(err), std::end(err), [](double e) { return e <= 1e-12; });
  return {ok, fmt("max error over 50 instances: reciprocity %.2g, clustering %.2g, knn %.2g, auc %.2g (<= 1e-12)",
                  err[0], err[1], err[2], err[3])};
}

FeatureMatrix dense(const std::vector<std::vector<double>>& rows) {
  FeatureMatrix X(rows[0].size());
  for (const auto& r : rows) X.add_dense_row(r);
  return X;
}

Outcome logistic_training() {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  double worst_fd = 0.0;
  bool monotone = true;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<std::vector<double>> rows(60, std::vector<double>(6));
    std::vector<int> y;
    for (auto& r : rows) {
      for (auto& x : r) x = gauss(rng);
      y.push_back(coin(rng));
    }
    const auto X = dense(rows);
    const stance::ClassWeights w{0.8, 1.3};
    std::vector<double> p(7), grad(7);
    for (auto& x : p) x = gauss(rng);
    stance::logistic_objective(X, y, w, 0.5, p, grad);
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double h = 1e-5;
      auto plus = p, minus = p;
      plus[j] += h;
      minus[j] -= h;
      const double fd =
          (stance::logistic_objective(X, y, w, 0.5, plus, {}) - stance::logistic_objective(X, y, w, 0.5, minus, {})) /
          (2 * h);
      worst_fd = std::max(worst_fd, std::abs(fd - grad[j]) / std::max(1.0, std::abs(grad[j])));
    }
    const auto m = stance::train_logistic(X, y, stance::LogisticConfig{});
    for (std::size_t i = 1; i < m.objective_trace.size(); ++i)
      monotone = monotone && m.objective_trace[i] <= m.objective_trace[i - 1];
  }
  const auto X = dense({{0, 0}, {1, 0}, {0, 1}, {1, 1}, {3, 3}, {4, 3}, {3, 4}, {4, 4}});
  const std::vector<int> y{0, 0, 0, 0, 1, 1, 1, 1};
  stance::LogisticConfig cfg;
  cfg.l2_lambda = 0.01;
  const double acc = stance::accuracy(y, stance::train_logistic(X, y, cfg).predict_proba(X));
  return {worst_fd <= 1e-5 && monotone && acc == 1.0,
          fmt("finite-difference relative error %.2g (<= 1e-5); objective %s; separable accuracy %.3f (= 1)", worst_fd,
              monotone ? "monotone" : "NOT monotone", acc)};
}

Outcome text_pipeline() {
  synth::TextCorpusConfig c;
  c.users_per_side = 500;
  c.tweets_per_user = 50;
  c.vocab_overlap = 0.2;
  c.seed = 21;
  const auto corpus = synth::generate_text_corpus(c);
  const auto bow = stance::evaluate_cv(
      corpus.histories, [] { return std::make_unique<stance::BowFeaturizer>(); },
      [] { return std::make_unique<stance::LogisticClassifier>(); }, 5, 21);

  // Same vocabulary on both sides: only behavior separates them.
  synth::TextCorpusConfig b;
  b.users_per_side = 300;
  b.tweets_per_user = 30;
  b.vocab_overlap = 1.0;
  b.behavior[0].retweet_rate = 0.5;
  b.behavior[0].uppercase_rate = 0.12;
  b.behavior[1].retweet_rate = 0.2;
  b.behavior[1].uppercase_rate = 0.03;
  b.seed = 22;
  const auto skewed = synth::generate_text_corpus(b);
  const auto profiles = &skewed.profiles;
  const auto forest = stance::evaluate_cv(
      skewed.histories,
      [profiles] {
        return std::make_unique<stance::AggregateFeaturizer>(
            profiles, std::make_shared<stance::HeuristicItalianTagger>(), false);
      },
      [] { return std::make_unique<stance::ForestClassifier>(); }, 5, 22);
  const auto y = stance::labels_of(skewed.histories);
  const double ones = static_cast<double>(std::count(y.begin(), y.end(), 1)) / static_cast<double>(y.size());
  const double majority = std::max(ones, 1.0 - ones);
  return {bow.accuracy >= 0.95 && forest.accuracy >= majority + 0.10,
          fmt("BoW logistic 5-fold accuracy %.4f (>= 0.95); aggregate forest %.4f vs majority %.4f (margin >= 0.10)",
              bow.accuracy, forest.accuracy, majority)};
}

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    files[fs::relative(e.path(), root).generic_string()] = s.str();
  }
  return files;
}

std::map<std::string, std::string> report_run(const fs::path& base, const std::string& threads) {
  fs::remove_all(base);
  pipeline::Config cfg;
  cfg.set("outdir", base.string());
  cfg.set("seed", "17");
  cfg.set("threads", threads);
  pipeline::run_subcommand("synth", cfg);
  const auto in = base / "synth";
  cfg.set("tweets", (in / "tweets.ndjson").string());
  cfg.set("historical", (in / "historical.ndjson").string());
  cfg.set("follows", (in / "follows.tsv").string());
  cfg.set("profiles", (in / "profiles.ndjson").string());
  cfg.set("seeds", (in / "seeds.csv").string());
  cfg.set("balance_ratio", "1.5");
  cfg.set("min_df", "3");
  cfg.set("trees", "50");
  cfg.set("rwc_method", "both");
  cfg.set("walks", "20000");
  pipeline::run_subcommand("report", cfg);
  auto files = snapshot(base);
  fs::remove_all(base);
  return files;
}

// Names of files that differ or exist in only one snapshot.
std::vector<std::string> differences(const std::map<std::string, std::string>& a,
                                     const std::map<std::string, std::string>& b) {
  std::set<std::string> names;
  for (const auto& [n, _] : a) names.insert(n);
  for (const auto& [n, _] : b) names.insert(n);
  std::vector<std::string> out;
  for (const auto& n : names)
    if (!a.count(n) || !b.count(n) || a.at(n) != b.at(n)) out.push_back(n);
  return out;
}

Outcome determinism() {
  const auto base = fs::temp_directory_path() / "echochamber_acceptance_determinism";
  const auto first = report_run(base, "1");
  const auto second = report_run(base, "1");
  const auto threaded = report_run(base, "4");
  const auto same = differences(first, second);
  // The manifest records the thread count; everything else must match.
  auto across = differences(first, threaded);
  std::erase(across, "report/manifest.json");
  return {!first.empty() && same.empty() && across.empty(),
          fmt("%zu artifacts; identical reruns differ in %zu%s%s; threads 1 vs 4 differ in %zu besides the manifest",
              first.size(), same.size(), same.empty() ? "" : ", first ", same.empty() ? "" : same[0].c_str(),
              across.size())};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"planted-recovery", planted_recovery},
      {"balance-tuning", balance_tuning},
      {"rwc-exactness", rwc_exactness},
      {"rwc-montecarlo", rwc_montecarlo_agreement},
      {"rwc-endpoints-monotonicity", rwc_endpoints},
      {"asymmetry-detection", asymmetry_detection},
      {"echo-chamber-correlation", echo_correlation},
      {"metric-oracles", metric_oracles},
      {"logistic-training", logistic_training},
      {"text-pipeline", text_pipeline},
      {"determinism", determinism},
  };
  const std::set<std::string> only(argv + 1, argv + argc);
  int failed = 0, ran = 0;
  for (const auto& [name, check] : criteria) {
    if (!only.empty() && !only.count(name)) continue;
    ++ran;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d of %d criteria passed\n", ran - failed, ran);
  return failed == 0 && ran > 0 ? 0 : 1;
}
