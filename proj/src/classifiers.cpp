#include "echochamber/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

#include "echochamber/error.hpp"
#include "echochamber/util.hpp"

namespace echochamber::stance {

namespace {

// Returns whether both classes occur.
bool check_labels(std::span<const int> y, std::size_t rows) {
  if (y.size() != rows) throw InvalidArgument("label count does not match row count");
  if (y.empty()) throw InvalidArgument("training data is empty");
  bool has0 = false, has1 = false;
  for (int v : y) {
    if (v != 0 && v != 1) throw InvalidArgument("labels must be 0 or 1");
    (v == 1 ? has1 : has0) = true;
  }
  return has0 && has1;
}

void require_two_classes(std::span<const int> y, std::size_t rows) {
  if (!check_labels(y, rows)) throw InvalidArgument("training data must contain both classes");
}

double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }
double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

ClassWeights balanced_weights(std::span<const int> y) {
  const auto n = static_cast<double>(y.size());
  const auto pos = static_cast<double>(std::count(y.begin(), y.end(), 1));
  const double neg = n - pos;
  if (pos == 0 || neg == 0) throw InvalidArgument("balanced weights need both classes");
  return {n / (2.0 * neg), n / (2.0 * pos)};
}

double LogisticModel::decision(const FeatureMatrix& X, std::size_t row) const { return X.dot(row, beta) + intercept; }

double LogisticModel::predict_proba(const FeatureMatrix& X, std::size_t row) const { return sigmoid(decision(X, row)); }

std::vector<double> LogisticModel::predict_proba(const FeatureMatrix& X) const {
  std::vector<double> out(X.rows());
  for (std::size_t r = 0; r < X.rows(); ++r) out[r] = predict_proba(X, r);
  return out;
}

double logistic_objective(const FeatureMatrix& X, std::span<const int> y, const ClassWeights& w, double l2_lambda,
                          std::span<const double> params, std::span<double> grad) {
  const std::size_t m = X.cols();
  auto beta = params.first(m);
  const double b = params[m];
  double f = 0.0;
  if (!grad.empty()) std::fill(grad.begin(), grad.end(), 0.0);
  for (std::size_t r = 0; r < X.rows(); ++r) {
    const double z = X.dot(r, beta) + b;
    const double wi = w(y[r]);
    f += wi * (softplus(z) - (y[r] == 1 ? z : 0.0));
    if (grad.empty()) continue;
    const double resid = wi * (sigmoid(z) - static_cast<double>(y[r]));
    auto idx = X.row_indices(r);
    auto val = X.row_values(r);
    for (std::size_t k = 0; k < idx.size(); ++k) grad[idx[k]] += resid * val[k];
    grad[m] += resid;
  }
  for (std::size_t j = 0; j < m; ++j) {
    f += 0.5 * l2_lambda * beta[j] * beta[j];
    if (!grad.empty()) grad[j] += l2_lambda * beta[j];
  }
  return f;
}

LogisticModel train_logistic(const FeatureMatrix& X, std::span<const int> y, const LogisticConfig& cfg) {
  require_two_classes(y, X.rows());
  if (!(cfg.l2_lambda >= 0.0)) throw InvalidArgument("l2_lambda must be >= 0");
  const ClassWeights w = cfg.balanced ? balanced_weights(y) : cfg.class_weights;
  const std::size_t dim = X.cols() + 1;

  std::vector<double> x(dim, 0.0), g(dim), x_new(dim), g_new(dim), d(dim);
  double f = logistic_objective(X, y, w, cfg.l2_lambda, x, g);
  LogisticModel model;
  model.objective_trace.push_back(f);

  std::deque<std::vector<double>> S, Y;
  std::deque<double> rho;
  std::vector<double> alpha(cfg.history);
  for (std::size_t it = 0; it < cfg.max_iterations; ++it) {
    // Two-loop recursion for d = -H g.
    for (std::size_t i = 0; i < dim; ++i) d[i] = -g[i];
    for (std::size_t k = S.size(); k-- > 0;) {
      alpha[k] = rho[k] * dot(S[k], d);
      for (std::size_t i = 0; i < dim; ++i) d[i] -= alpha[k] * Y[k][i];
    }
    if (!S.empty()) {
      const double gamma = dot(S.back(), Y.back()) / dot(Y.back(), Y.back());
      for (auto& v : d) v *= gamma;
    }
    for (std::size_t k = 0; k < S.size(); ++k) {
      const double beta_k = rho[k] * dot(Y[k], d);
      for (std::size_t i = 0; i < dim; ++i) d[i] += S[k][i] * (alpha[k] - beta_k);
    }
    double slope = dot(g, d);
    if (!(slope < 0.0)) {
      S.clear();
      Y.clear();
      rho.clear();
      for (std::size_t i = 0; i < dim; ++i) d[i] = -g[i];
      slope = dot(g, d);
    }
    if (slope == 0.0) break;

    double step = S.empty() ? 1.0 / std::max(1.0, std::sqrt(-slope)) : 1.0;
    double f_new = 0.0;
    bool accepted = false;
    for (int tries = 0; tries < 60; ++tries) {
      for (std::size_t i = 0; i < dim; ++i) x_new[i] = x[i] + step * d[i];
      f_new = logistic_objective(X, y, w, cfg.l2_lambda, x_new, g_new);
      if (f_new <= f + 1e-4 * step * slope && f_new < f) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;

    std::vector<double> s(dim), yv(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      s[i] = x_new[i] - x[i];
      yv[i] = g_new[i] - g[i];
    }
    const double sy = dot(s, yv);
    if (sy > 1e-12) {
      if (S.size() == cfg.history) {
        S.pop_front();
        Y.pop_front();
        rho.pop_front();
      }
      S.push_back(std::move(s));
      Y.push_back(std::move(yv));
      rho.push_back(1.0 / sy);
    }
    const double change = (f - f_new) / std::max(std::abs(f), 1.0);
    std::swap(x, x_new);
    std::swap(g, g_new);
    f = f_new;
    model.objective_trace.push_back(f);
    // On badly scaled problems tiny steps can stall the objective far from the
    // optimum, so the gradient must be small as well.
    double gmax = 0.0;
    for (double v : g) gmax = std::max(gmax, std::abs(v));
    if (change <= cfg.relative_tolerance && gmax <= 1e-4 * std::max(std::abs(f), 1.0)) break;
  }
  model.beta.assign(x.begin(), x.end() - 1);
  model.intercept = x.back();
  return model;
}

double DecisionTree::predict(std::span<const double> row) const {
  std::size_t i = 0;
  while (nodes[i].feature >= 0) {
    const auto& n = nodes[i];
    i = static_cast<std::size_t>(row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
  }
  return nodes[i].positive_fraction;
}

std::size_t DecisionTree::depth() const {
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
  std::size_t best = 0;
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    if (nodes[i].feature >= 0) {
      stack.emplace_back(static_cast<std::size_t>(nodes[i].left), d + 1);
      stack.emplace_back(static_cast<std::size_t>(nodes[i].right), d + 1);
    }
  }
  return best;
}

double RandomForest::predict_proba(std::span<const double> row) const {
  double s = 0.0;
  for (const auto& t : trees) s += t.predict(row);
  return trees.empty() ? 0.5 : s / static_cast<double>(trees.size());
}

std::vector<double> RandomForest::predict_proba(const FeatureMatrix& X) const {
  std::vector<double> out(X.rows());
  for (std::size_t r = 0; r < X.rows(); ++r) out[r] = predict_proba(X.dense_row(r));
  return out;
}

namespace {

double gini(double w, double w1) {
  if (w <= 0.0) return 0.0;
  const double p = w1 / w;
  return 1.0 - p * p - (1.0 - p) * (1.0 - p);
}

class TreeGrower {
 public:
  TreeGrower(const std::vector<double>& columns, std::size_t rows, std::size_t features, std::span<const int> y,
             std::vector<double> weight, const ForestConfig& cfg, Rng& rng)
      : cols_(columns), rows_(rows), features_(features), y_(y), weight_(std::move(weight)), cfg_(cfg), rng_(rng) {}

  DecisionTree grow(std::vector<std::size_t> samples) {
    DecisionTree tree;
    struct Pending {
      std::size_t node;
      std::vector<std::size_t> samples;
      std::size_t depth;
    };
    tree.nodes.emplace_back();
    std::vector<Pending> stack;
    stack.push_back({0, std::move(samples), 0});
    const std::size_t max_features =
        cfg_.max_features > 0 ? std::min(cfg_.max_features, features_)
                              : std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(features_))));
    std::vector<std::size_t> feature_order(features_);
    std::iota(feature_order.begin(), feature_order.end(), std::size_t{0});

    while (!stack.empty()) {
      Pending p = std::move(stack.back());
      stack.pop_back();
      double w = 0.0, w1 = 0.0;
      for (auto s : p.samples) {
        w += weight_[s];
        if (y_[s] == 1) w1 += weight_[s];
      }
      tree.nodes[p.node].positive_fraction = w > 0 ? w1 / w : 0.0;
      if (p.depth >= cfg_.max_depth || p.samples.size() < cfg_.min_samples_split || w1 == 0.0 || w1 == w) continue;

      std::shuffle(feature_order.begin(), feature_order.end(), rng_);
      const double parent = w * gini(w, w1);
      double best_gain = -std::numeric_limits<double>::infinity();
      int best_feature = -1;
      double best_threshold = 0.0;
      std::size_t evaluated = 0;
      std::vector<std::size_t> order = p.samples;
      for (std::size_t f : feature_order) {
        if (evaluated >= max_features && best_feature >= 0) break;
        const double* col = cols_.data() + f * rows_;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return col[a] < col[b]; });
        if (col[order.front()] == col[order.back()]) continue;  // constant here; does not count
        ++evaluated;
        double wl = 0.0, wl1 = 0.0;
        for (std::size_t i = 0; i + 1 < order.size(); ++i) {
          const auto s = order[i];
          wl += weight_[s];
          if (y_[s] == 1) wl1 += weight_[s];
          const double a = col[s], b = col[order[i + 1]];
          if (a == b) continue;
          const double wr = w - wl, wr1 = w1 - wl1;
          const double gain = parent - wl * gini(wl, wl1) - wr * gini(wr, wr1);
          if (gain > best_gain) {
            best_gain = gain;
            best_feature = static_cast<int>(f);
            double mid = a + (b - a) / 2.0;
            best_threshold = mid < b ? mid : a;
          }
        }
      }
      if (best_feature < 0) continue;

      const double* col = cols_.data() + static_cast<std::size_t>(best_feature) * rows_;
      std::vector<std::size_t> left, right;
      for (auto s : p.samples) (col[s] <= best_threshold ? left : right).push_back(s);
      const auto li = static_cast<int>(tree.nodes.size());
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      auto& node = tree.nodes[p.node];
      node.feature = best_feature;
      node.threshold = best_threshold;
      node.left = li;
      node.right = li + 1;
      stack.push_back({static_cast<std::size_t>(li + 1), std::move(right), p.depth + 1});
      stack.push_back({static_cast<std::size_t>(li), std::move(left), p.depth + 1});
    }
    return tree;
  }

 private:
  const std::vector<double>& cols_;
  std::size_t rows_;
  std::size_t features_;
  std::span<const int> y_;
  std::vector<double> weight_;
  const ForestConfig& cfg_;
  Rng& rng_;
};

}  // namespace

RandomForest train_forest(const FeatureMatrix& X, std::span<const int> y, const ForestConfig& cfg) {
  const bool both = check_labels(y, X.rows());
  if (cfg.trees < 1) throw InvalidArgument("forest needs at least one tree");
  if (cfg.min_samples_split < 2) throw InvalidArgument("min_samples_split must be >= 2");
  const ClassWeights cw = cfg.balanced && both ? balanced_weights(y) : ClassWeights{};
  const std::size_t n = X.rows();
  const std::vector<double> columns = X.dense_columns();

  RandomForest forest;
  forest.features = X.cols();
  forest.trees.resize(cfg.trees);
  parallel_for(cfg.trees, cfg.threads, [&](std::size_t t) {
    Rng rng(derive_seed(cfg.seed, t));
    std::vector<double> weight(n, 0.0);
    if (cfg.bootstrap) {
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      for (std::size_t i = 0; i < n; ++i) weight[pick(rng)] += 1.0;
    } else {
      std::fill(weight.begin(), weight.end(), 1.0);
    }
    std::vector<std::size_t> samples;
    for (std::size_t i = 0; i < n; ++i) {
      if (weight[i] == 0.0) continue;
      weight[i] *= cw(y[i]);
      samples.push_back(i);
    }
    forest.trees[t] = TreeGrower(columns, n, X.cols(), y, std::move(weight), cfg, rng).grow(std::move(samples));
  });
  return forest;
}

}  // namespace echochamber::stance
