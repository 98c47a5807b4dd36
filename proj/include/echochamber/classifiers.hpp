#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "echochamber/matrix.hpp"

namespace echochamber::stance {

/// Per-class sample weights for classes 0 and 1.
struct ClassWeights {
  double negative = 1.0;
  double positive = 1.0;

  double operator()(int y) const { return y == 1 ? positive : negative; }
};

/// n / (2 * n_c) for each class, as in the usual "balanced" heuristic.
ClassWeights balanced_weights(std::span<const int> y);

struct LogisticConfig {
  double l2_lambda = 1.0;
  bool balanced = false;
  ClassWeights class_weights;  // used when balanced is false
  std::size_t max_iterations = 1000;
  double relative_tolerance = 1e-6;
  std::size_t history = 10;  // L-BFGS memory
};

struct LogisticModel {
  std::vector<double> beta;
  double intercept = 0.0;
  /// Objective after every accepted iterate, starting from the zero model.
  std::vector<double> objective_trace;

  double decision(const FeatureMatrix& X, std::size_t row) const;
  double predict_proba(const FeatureMatrix& X, std::size_t row) const;
  std::vector<double> predict_proba(const FeatureMatrix& X) const;
};

/// Class-weighted negative log-likelihood plus lambda/2 * |beta|^2 (intercept
/// unpenalized). `params` is beta followed by the intercept; the gradient is
/// written to `grad` when non-empty.
double logistic_objective(const FeatureMatrix& X, std::span<const int> y, const ClassWeights& w, double l2_lambda,
                          std::span<const double> params, std::span<double> grad);

/// L-BFGS with backtracking; every accepted step lowers the objective. Stops
/// when a step changes the objective by at most relative_tolerance * max(|f|, 1)
/// and the largest gradient entry is at most 1e-4 * max(|f|, 1).
/// Throws InvalidArgument when y holds a single class.
LogisticModel train_logistic(const FeatureMatrix& X, std::span<const int> y, const LogisticConfig& cfg);

struct ForestConfig {
  std::size_t trees = 200;
  std::size_t min_samples_split = 8;
  std::size_t max_depth = 30;
  /// 0 means floor(sqrt(features)).
  std::size_t max_features = 0;
  bool balanced = true;
  bool bootstrap = true;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct TreeNode {
  int feature = -1;  // -1 for leaves
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double positive_fraction = 0.0;  // class-weighted, at this node
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double predict(std::span<const double> row) const;
  std::size_t depth() const;
};

struct RandomForest {
  std::vector<DecisionTree> trees;
  std::size_t features = 0;

  double predict_proba(std::span<const double> row) const;
  std::vector<double> predict_proba(const FeatureMatrix& X) const;
};

/// Bagged CART trees grown on Gini impurity, sqrt(m) candidate features per
/// split. Deterministic given cfg.seed. Single-class data yields one-leaf
/// trees; an empty set throws InvalidArgument.
RandomForest train_forest(const FeatureMatrix& X, std::span<const int> y, const ForestConfig& cfg);

}  // namespace echochamber::stance
