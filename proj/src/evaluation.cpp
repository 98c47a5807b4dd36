#include "echochamber/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "echochamber/util.hpp"

namespace echochamber::stance {

using nlohmann::json;

double accuracy(std::span<const int> y, std::span<const double> scores, double threshold) {
  if (y.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < y.size(); ++i) correct += (scores[i] >= threshold ? 1 : 0) == y[i];
  return static_cast<double>(correct) / static_cast<double>(y.size());
}

double roc_auc(std::span<const int> y, std::span<const double> scores) {
  const std::size_t n = y.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Sum of 1-based average ranks of the positives, kept doubled to stay integral.
  std::uint64_t doubled_rank_sum = 0;
  std::uint64_t pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const std::uint64_t doubled_avg = (i + 1) + j;  // 2 * mean of ranks i+1..j
    for (std::size_t k = i; k < j; ++k) {
      if (y[order[k]] == 1) {
        doubled_rank_sum += doubled_avg;
        ++pos;
      }
    }
    i = j;
  }
  const std::uint64_t neg = n - pos;
  if (pos == 0 || neg == 0) throw InvalidArgument("AUC needs both classes");
  // (rank_sum - pos(pos+1)/2) / (pos * neg), numerator doubled.
  const double doubled_u = static_cast<double>(doubled_rank_sum - pos * (pos + 1));
  return doubled_u / 2.0 / static_cast<double>(pos * neg);
}

double f1_positive(std::span<const int> y, std::span<const double> scores, double threshold) {
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    if (predicted && y[i] == 1) ++tp;
    if (predicted && y[i] == 0) ++fp;
    if (!predicted && y[i] == 1) ++fn;
  }
  if (tp == 0) return 0.0;
  return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
}

std::vector<std::size_t> stratified_folds(std::span<const int> y, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw InvalidArgument("need at least two folds");
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < y.size(); ++i) by_class[y[i] == 1].push_back(i);
  for (auto& c : by_class)
    if (c.size() < k)
      throw InvalidArgument("each class needs at least " + std::to_string(k) + " examples for " + std::to_string(k) +
                            "-fold cross-validation");
  Rng rng(seed);
  std::vector<std::size_t> fold(y.size(), 0);
  std::size_t dealt = 0;
  for (auto& c : by_class) {
    std::shuffle(c.begin(), c.end(), rng);
    for (std::size_t i : c) fold[i] = dealt++ % k;
  }
  return fold;
}

// ---- featurizers ----------------------------------------------------------------

AggregateFeaturizer::AggregateFeaturizer(const ProfileMap* profiles, std::shared_ptr<const PosTagger> tagger,
                                         bool standardize)
    : profiles_(profiles),
      tagger_(tagger ? std::move(tagger) : std::make_shared<HeuristicItalianTagger>()),
      standardize_(standardize) {}

std::vector<AggregateFeatures> AggregateFeaturizer::raw(std::span<const UserHistory> histories) const {
  std::vector<AggregateFeatures> out;
  out.reserve(histories.size());
  for (const auto& h : histories) {
    const AccountProfile* p = nullptr;
    if (profiles_) {
      auto it = profiles_->find(h.user);
      if (it != profiles_->end()) p = &it->second;
    }
    out.push_back(aggregate_features(h, p, *tagger_));
  }
  return out;
}

void AggregateFeaturizer::fit(std::span<const UserHistory> histories, std::span<const std::size_t> train) {
  mean_.assign(kAggregateFeatureCount, 0.0);
  scale_.assign(kAggregateFeatureCount, 1.0);
  if (!standardize_) return;
  std::vector<UserHistory> subset;
  subset.reserve(train.size());
  for (auto i : train) subset.push_back(histories[i]);
  auto feats = raw(subset);
  const auto n = static_cast<double>(feats.size());
  for (std::size_t j = 0; j < kAggregateFeatureCount; ++j) {
    double s = 0.0;
    for (const auto& f : feats) s += f.values[j];
    mean_[j] = s / n;
    double v = 0.0;
    for (const auto& f : feats) v += (f.values[j] - mean_[j]) * (f.values[j] - mean_[j]);
    const double sd = std::sqrt(v / n);
    scale_[j] = sd > 0.0 ? sd : 1.0;
  }
}

FeatureMatrix AggregateFeaturizer::transform(std::span<const UserHistory> histories) const {
  if (mean_.empty()) throw Error("aggregate featurizer used before fit");
  FeatureMatrix X(kAggregateFeatureCount);
  for (const auto& f : raw(histories)) {
    std::array<double, kAggregateFeatureCount> row{};
    for (std::size_t j = 0; j < kAggregateFeatureCount; ++j) row[j] = (f.values[j] - mean_[j]) / scale_[j];
    X.add_dense_row(row);
  }
  return X;
}

std::vector<std::string> AggregateFeaturizer::feature_names() const {
  return {kAggregateFeatureNames.begin(), kAggregateFeatureNames.end()};
}

json AggregateFeaturizer::to_json() const { return {{"standardize", standardize_}, {"mean", mean_}, {"scale", scale_}}; }

void AggregateFeaturizer::load_state(const json& j) {
  standardize_ = j.at("standardize").get<bool>();
  mean_ = j.at("mean").get<std::vector<double>>();
  scale_ = j.at("scale").get<std::vector<double>>();
  if (mean_.size() != kAggregateFeatureCount || scale_.size() != kAggregateFeatureCount)
    throw ParseError("aggregate featurizer state has the wrong width");
}

BowFeaturizer::BowFeaturizer(VectorizerOptions opts) : opts_(std::move(opts)) {}

void BowFeaturizer::fit(std::span<const UserHistory> histories, std::span<const std::size_t> train) {
  std::vector<std::vector<std::string>> docs(histories.size());
  for (auto i : train) docs[i] = document_tokens(histories[i], opts_);
  vocab_ = fit_vocabulary(docs, train, opts_.min_df);
}

FeatureMatrix BowFeaturizer::transform(std::span<const UserHistory> histories) const {
  if (vocab_.tokens.empty()) throw Error("BoW featurizer used before fit");
  FeatureMatrix X(vocab_.size());
  for (const auto& h : histories) X.add_row(tfidf(vocab_, document_tokens(h, opts_)));
  return X;
}

std::vector<std::string> BowFeaturizer::feature_names() const { return vocab_.tokens; }

json BowFeaturizer::to_json() const {
  return {{"min_df", opts_.min_df},
          {"stopwords", std::vector<std::string>(opts_.stopwords.begin(), opts_.stopwords.end())},
          {"tokens", vocab_.tokens},
          {"idf", vocab_.idf},
          {"df", vocab_.df},
          {"training_documents", vocab_.training_documents}};
}

void BowFeaturizer::load_state(const json& j) {
  opts_.min_df = j.at("min_df").get<std::size_t>();
  auto stop = j.at("stopwords").get<std::vector<std::string>>();
  opts_.stopwords = {stop.begin(), stop.end()};
  vocab_.tokens = j.at("tokens").get<std::vector<std::string>>();
  vocab_.idf = j.at("idf").get<std::vector<double>>();
  vocab_.df = j.at("df").get<std::vector<std::size_t>>();
  vocab_.training_documents = j.at("training_documents").get<std::size_t>();
  if (vocab_.idf.size() != vocab_.tokens.size() || !std::is_sorted(vocab_.tokens.begin(), vocab_.tokens.end()))
    throw ParseError("malformed vocabulary in model file");
}

CombinedFeaturizer::CombinedFeaturizer(std::unique_ptr<AggregateFeaturizer> aggregate, std::unique_ptr<BowFeaturizer> bow)
    : aggregate_(std::move(aggregate)), bow_(std::move(bow)) {}

void CombinedFeaturizer::fit(std::span<const UserHistory> histories, std::span<const std::size_t> train) {
  aggregate_->fit(histories, train);
  bow_->fit(histories, train);
}

FeatureMatrix CombinedFeaturizer::transform(std::span<const UserHistory> histories) const {
  return aggregate_->transform(histories).hstack(bow_->transform(histories));
}

std::vector<std::string> CombinedFeaturizer::feature_names() const {
  auto names = aggregate_->feature_names();
  for (auto& t : bow_->feature_names()) names.push_back("bow:" + t);
  return names;
}

json CombinedFeaturizer::to_json() const { return {{"aggregate", aggregate_->to_json()}, {"bow", bow_->to_json()}}; }

void CombinedFeaturizer::load_state(const json& j) {
  aggregate_->load_state(j.at("aggregate"));
  bow_->load_state(j.at("bow"));
}

// ---- classifiers -------------------------------------------------------------------

json LogisticClassifier::to_json() const {
  return {{"l2_lambda", cfg_.l2_lambda}, {"beta", model_.beta}, {"intercept", model_.intercept}};
}

void LogisticClassifier::load_state(const json& j) {
  cfg_.l2_lambda = j.at("l2_lambda").get<double>();
  model_.beta = j.at("beta").get<std::vector<double>>();
  model_.intercept = j.at("intercept").get<double>();
}

json ForestClassifier::to_json() const {
  json trees = json::array();
  for (const auto& t : forest_.trees) {
    json nodes = json::array();
    for (const auto& n : t.nodes) nodes.push_back({n.feature, n.threshold, n.left, n.right, n.positive_fraction});
    trees.push_back(std::move(nodes));
  }
  return {{"trees_config", cfg_.trees},
          {"min_samples_split", cfg_.min_samples_split},
          {"max_depth", cfg_.max_depth},
          {"features", forest_.features},
          {"trees", std::move(trees)}};
}

void ForestClassifier::load_state(const json& j) {
  forest_.features = j.at("features").get<std::size_t>();
  forest_.trees.clear();
  for (const auto& jt : j.at("trees")) {
    DecisionTree t;
    for (const auto& jn : jt) {
      TreeNode n;
      n.feature = jn.at(0).get<int>();
      n.threshold = jn.at(1).get<double>();
      n.left = jn.at(2).get<int>();
      n.right = jn.at(3).get<int>();
      n.positive_fraction = jn.at(4).get<double>();
      t.nodes.push_back(n);
    }
    if (t.nodes.empty()) throw ParseError("empty tree in model file");
    forest_.trees.push_back(std::move(t));
  }
}

// ---- cross-validation ---------------------------------------------------------------

std::vector<int> labels_of(std::span<const UserHistory> histories) {
  std::vector<int> y;
  y.reserve(histories.size());
  for (const auto& h : histories) {
    if (h.label == StanceLabel::Unassigned) throw InvalidArgument("history of " + h.user + " has no label");
    y.push_back(class_of(h.label));
  }
  return y;
}

EvalReport evaluate_cv(std::span<const UserHistory> histories, const FeaturizerFactory& make_featurizer,
                       const ClassifierFactory& make_classifier, std::size_t folds, std::uint64_t seed) {
  const std::vector<int> y = labels_of(histories);
  const auto fold_of = stratified_folds(y, folds, seed);
  EvalReport report;
  report.fold_count = folds;
  for (std::size_t k = 0; k < folds; ++k) {
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < y.size(); ++i) (fold_of[i] == k ? test : train).push_back(i);
    auto featurizer = make_featurizer();
    featurizer->fit(histories, train);
    std::vector<UserHistory> train_h, test_h;
    std::vector<int> train_y, test_y;
    for (auto i : train) {
      train_h.push_back(histories[i]);
      train_y.push_back(y[i]);
    }
    for (auto i : test) {
      test_h.push_back(histories[i]);
      test_y.push_back(y[i]);
    }
    auto classifier = make_classifier();
    classifier->fit(featurizer->transform(train_h), train_y);
    auto scores = classifier->predict_proba(featurizer->transform(test_h));
    report.folds.push_back({accuracy(test_y, scores), roc_auc(test_y, scores), f1_positive(test_y, scores)});
  }
  for (const auto& f : report.folds) {
    report.accuracy += f.accuracy;
    report.auc += f.auc;
    report.f1 += f.f1;
  }
  report.accuracy /= static_cast<double>(folds);
  report.auc /= static_cast<double>(folds);
  report.f1 /= static_cast<double>(folds);
  return report;
}

// ---- feature importance ---------------------------------------------------------------

std::vector<FeatureImportance> coefficient_ranking(const LogisticModel& model, std::span<const std::string> names) {
  if (names.size() != model.beta.size()) throw InvalidArgument("feature names do not match the model width");
  std::vector<FeatureImportance> out;
  for (std::size_t j = 0; j < names.size(); ++j) out.push_back({names[j], model.beta[j]});
  std::stable_sort(out.begin(), out.end(),
                   [](const FeatureImportance& a, const FeatureImportance& b) { return a.importance > b.importance; });
  return out;
}

std::vector<FeatureImportance> permutation_importance(const Classifier& model, const FeatureMatrix& X,
                                                      std::span<const int> y, std::span<const std::string> names,
                                                      std::size_t repeats, std::uint64_t seed) {
  if (names.size() != X.cols()) throw InvalidArgument("feature names do not match the matrix width");
  const std::size_t n = X.rows();
  std::vector<std::vector<double>> rows(n);
  for (std::size_t r = 0; r < n; ++r) rows[r] = X.dense_row(r);
  const double baseline = accuracy(y, model.predict_proba(X));

  std::vector<FeatureImportance> out;
  for (std::size_t j = 0; j < X.cols(); ++j) {
    Rng rng(derive_seed(seed, j));
    double drop = 0.0;
    std::vector<double> column(n);
    for (std::size_t r = 0; r < n; ++r) column[r] = rows[r][j];
    for (std::size_t rep = 0; rep < repeats; ++rep) {
      std::vector<double> shuffled = column;
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      FeatureMatrix permuted(X.cols());
      for (std::size_t r = 0; r < n; ++r) {
        auto row = rows[r];
        row[j] = shuffled[r];
        permuted.add_dense_row(row);
      }
      drop += baseline - accuracy(y, model.predict_proba(permuted));
    }
    out.push_back({names[j], drop / static_cast<double>(repeats)});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const FeatureImportance& a, const FeatureImportance& b) { return a.importance > b.importance; });
  return out;
}

// ---- persistence -------------------------------------------------------------------

std::vector<double> TrainedModel::score(std::span<const UserHistory> histories) const {
  return classifier->predict_proba(featurizer->transform(histories));
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  json j = {{"format", "echochamber-model"},
            {"version", kModelFormatVersion},
            {"config_hash", model.config_hash},
            {"featurizer", {{"kind", model.featurizer_kind}, {"state", model.featurizer->to_json()}}},
            {"classifier", {{"kind", model.classifier_kind}, {"state", model.classifier->to_json()}}}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path.string());
  out << j.dump() << '\n';
}

TrainedModel load_model(const std::filesystem::path& path, const ProfileMap* profiles) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open: " + path.string());
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object() || j.value("format", "") != "echochamber-model")
    throw ParseError(path.string() + ": not a model file");
  if (j.at("version").get<int>() != kModelFormatVersion)
    throw ParseError(path.string() + ": unsupported model version " + j.at("version").dump());

  TrainedModel m;
  m.config_hash = j.value("config_hash", "");
  m.featurizer_kind = j.at("featurizer").at("kind").get<std::string>();
  m.classifier_kind = j.at("classifier").at("kind").get<std::string>();
  const auto& fstate = j.at("featurizer").at("state");
  if (m.featurizer_kind == "aggregate") {
    auto f = std::make_unique<AggregateFeaturizer>(profiles, nullptr, true);
    f->load_state(fstate);
    m.featurizer = std::move(f);
  } else if (m.featurizer_kind == "bow") {
    auto f = std::make_unique<BowFeaturizer>();
    f->load_state(fstate);
    m.featurizer = std::move(f);
  } else if (m.featurizer_kind == "combined") {
    auto f = std::make_unique<CombinedFeaturizer>(std::make_unique<AggregateFeaturizer>(profiles, nullptr, true),
                                                  std::make_unique<BowFeaturizer>());
    f->load_state(fstate);
    m.featurizer = std::move(f);
  } else {
    throw ParseError("unknown featurizer kind: " + m.featurizer_kind);
  }
  const auto& cstate = j.at("classifier").at("state");
  if (m.classifier_kind == "logistic") {
    auto c = std::make_unique<LogisticClassifier>();
    c->load_state(cstate);
    m.classifier = std::move(c);
  } else if (m.classifier_kind == "forest") {
    auto c = std::make_unique<ForestClassifier>();
    c->load_state(cstate);
    m.classifier = std::move(c);
  } else {
    throw ParseError("unknown classifier kind: " + m.classifier_kind);
  }
  return m;
}

}  // namespace echochamber::stance
