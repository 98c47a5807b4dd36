#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "echochamber/classifiers.hpp"
#include "echochamber/stance.hpp"
#include "echochamber/vectorize.hpp"
#include "json.hpp"

namespace echochamber::stance {

// ---- metrics ----------------------------------------------------------------

/// Fraction of rows where (score >= threshold) equals the label.
double accuracy(std::span<const int> y, std::span<const double> scores, double threshold = 0.5);

/// Probability that a random positive outranks a random negative; ties count 1/2.
/// Computed from average ranks. Throws InvalidArgument without both classes.
double roc_auc(std::span<const int> y, std::span<const double> scores);

/// F1 of the positive (Advocate) class at the threshold; 0 when undefined.
double f1_positive(std::span<const int> y, std::span<const double> scores, double threshold = 0.5);

/// Fold id per sample; each class is shuffled with the seed and dealt round-robin.
/// Throws InvalidArgument when a class has fewer than k samples.
std::vector<std::size_t> stratified_folds(std::span<const int> y, std::size_t k, std::uint64_t seed);

// ---- featurizers -------------------------------------------------------------

class Featurizer {
 public:
  virtual ~Featurizer() = default;
  /// Learns state (vocabulary, standardization) from the training rows only.
  virtual void fit(std::span<const UserHistory> histories, std::span<const std::size_t> train) = 0;
  virtual FeatureMatrix transform(std::span<const UserHistory> histories) const = 0;
  virtual std::vector<std::string> feature_names() const = 0;
  virtual nlohmann::json to_json() const = 0;
};

/// The 16 aggregate features, optionally z-scored with training statistics.
class AggregateFeaturizer final : public Featurizer {
 public:
  AggregateFeaturizer(const ProfileMap* profiles, std::shared_ptr<const PosTagger> tagger, bool standardize);

  void fit(std::span<const UserHistory> histories, std::span<const std::size_t> train) override;
  FeatureMatrix transform(std::span<const UserHistory> histories) const override;
  std::vector<std::string> feature_names() const override;
  nlohmann::json to_json() const override;
  void load_state(const nlohmann::json& j);

  std::vector<AggregateFeatures> raw(std::span<const UserHistory> histories) const;

 private:
  const ProfileMap* profiles_;
  std::shared_ptr<const PosTagger> tagger_;
  bool standardize_;
  std::vector<double> mean_, scale_;
};

/// TF-IDF bag of words.
class BowFeaturizer final : public Featurizer {
 public:
  explicit BowFeaturizer(VectorizerOptions opts = {});

  void fit(std::span<const UserHistory> histories, std::span<const std::size_t> train) override;
  FeatureMatrix transform(std::span<const UserHistory> histories) const override;
  std::vector<std::string> feature_names() const override;
  nlohmann::json to_json() const override;
  void load_state(const nlohmann::json& j);

  const Vocabulary& vocabulary() const { return vocab_; }

 private:
  VectorizerOptions opts_;
  Vocabulary vocab_;
};

/// Standardized aggregate block followed by the BoW block.
class CombinedFeaturizer final : public Featurizer {
 public:
  CombinedFeaturizer(std::unique_ptr<AggregateFeaturizer> aggregate, std::unique_ptr<BowFeaturizer> bow);

  void fit(std::span<const UserHistory> histories, std::span<const std::size_t> train) override;
  FeatureMatrix transform(std::span<const UserHistory> histories) const override;
  std::vector<std::string> feature_names() const override;
  nlohmann::json to_json() const override;
  void load_state(const nlohmann::json& j);

 private:
  std::unique_ptr<AggregateFeaturizer> aggregate_;
  std::unique_ptr<BowFeaturizer> bow_;
};

// ---- classifiers ---------------------------------------------------------------

class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual void fit(const FeatureMatrix& X, std::span<const int> y) = 0;
  virtual std::vector<double> predict_proba(const FeatureMatrix& X) const = 0;
  virtual nlohmann::json to_json() const = 0;
};

class LogisticClassifier final : public Classifier {
 public:
  explicit LogisticClassifier(LogisticConfig cfg = {}) : cfg_(cfg) {}
  void fit(const FeatureMatrix& X, std::span<const int> y) override { model_ = train_logistic(X, y, cfg_); }
  std::vector<double> predict_proba(const FeatureMatrix& X) const override { return model_.predict_proba(X); }
  nlohmann::json to_json() const override;
  void load_state(const nlohmann::json& j);
  const LogisticModel& model() const { return model_; }

 private:
  LogisticConfig cfg_;
  LogisticModel model_;
};

class ForestClassifier final : public Classifier {
 public:
  explicit ForestClassifier(ForestConfig cfg = {}) : cfg_(cfg) {}
  void fit(const FeatureMatrix& X, std::span<const int> y) override { forest_ = train_forest(X, y, cfg_); }
  std::vector<double> predict_proba(const FeatureMatrix& X) const override { return forest_.predict_proba(X); }
  nlohmann::json to_json() const override;
  void load_state(const nlohmann::json& j);
  const RandomForest& forest() const { return forest_; }

 private:
  ForestConfig cfg_;
  RandomForest forest_;
};

using FeaturizerFactory = std::function<std::unique_ptr<Featurizer>()>;
using ClassifierFactory = std::function<std::unique_ptr<Classifier>()>;

// ---- cross-validation ------------------------------------------------------------

struct FoldMetrics {
  double accuracy = 0.0;
  double auc = 0.0;
  double f1 = 0.0;
};

struct EvalReport {
  double accuracy = 0.0;
  double auc = 0.0;
  double f1 = 0.0;
  std::vector<FoldMetrics> folds;
  std::size_t fold_count = 0;
};

std::vector<int> labels_of(std::span<const UserHistory> histories);

/// Stratified k-fold evaluation. A fresh featurizer and classifier are fit on
/// each training split; aggregates are plain means over folds.
EvalReport evaluate_cv(std::span<const UserHistory> histories, const FeaturizerFactory& featurizer,
                       const ClassifierFactory& classifier, std::size_t folds = 5, std::uint64_t seed = 0);

// ---- feature importance ------------------------------------------------------------

struct FeatureImportance {
  std::string feature;
  double importance = 0.0;
};

/// Signed coefficients, largest first: the head leans Advocate, the tail Skeptic.
std::vector<FeatureImportance> coefficient_ranking(const LogisticModel& model, std::span<const std::string> names);

/// Mean accuracy drop over `repeats` seeded shuffles of each feature column, largest first.
std::vector<FeatureImportance> permutation_importance(const Classifier& model, const FeatureMatrix& X,
                                                      std::span<const int> y, std::span<const std::string> names,
                                                      std::size_t repeats = 10, std::uint64_t seed = 0);

// ---- persistence ------------------------------------------------------------------

/// A featurizer and classifier trained together, as stored in a model file.
struct TrainedModel {
  std::string featurizer_kind;  // aggregate | bow | combined
  std::string classifier_kind;  // logistic | forest
  std::string config_hash;
  std::unique_ptr<Featurizer> featurizer;
  std::unique_ptr<Classifier> classifier;

  std::vector<double> score(std::span<const UserHistory> histories) const;
};

inline constexpr int kModelFormatVersion = 1;

void save_model(const TrainedModel& model, const std::filesystem::path& path);
/// `profiles` feeds the aggregate featurizer when present in the model.
TrainedModel load_model(const std::filesystem::path& path, const ProfileMap* profiles);

}  // namespace echochamber::stance
