#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "autoen/error.hpp"
#include "autoen/matrix.hpp"
#include "autoen/runtime.hpp"

namespace autoen {

// ---------------------------------------------------------------------------
// hyperparameters

/// Neighbour vote fractions with additive smoothing: (votes_c + alpha) / (k + alpha * C).
struct KNearestNeighbors {
  int k = 5;
  double alpha = 1.0;
  friend bool operator==(const KNearestNeighbors&, const KNearestNeighbors&) = default;
};

struct GaussianNaiveBayes {
  /// Added to every variance, as a fraction of the largest feature variance.
  double var_smoothing = 1e-9;
  friend bool operator==(const GaussianNaiveBayes&, const GaussianNaiveBayes&) = default;
};

enum class FeatureSubset { All, Sqrt, Log2 };

/// CART with Gini impurity. max_depth 0 means unlimited.
struct DecisionTree {
  int max_depth = 0;
  int min_leaf = 1;
  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;
};

/// Defaults mirror an untuned forest: 10 bootstrap trees, sqrt(m) features per split.
struct RandomForest {
  int n_trees = 10;
  int max_depth = 0;
  int min_leaf = 1;
  FeatureSubset features = FeatureSubset::Sqrt;
  std::uint64_t seed = 0;
  friend bool operator==(const RandomForest&, const RandomForest&) = default;
};

/// Multinomial (softmax) logistic regression trained by full-batch gradient
/// descent on mean cross-entropy + (l2/2)||W||^2 (bias excluded).
struct LogisticRegression {
  double l2 = 1e-4;
  int epochs = 200;
  double learning_rate = 0.5;
  std::uint64_t seed = 0;
  friend bool operator==(const LogisticRegression&, const LogisticRegression&) = default;
};

using ClassifierSpec = std::variant<KNearestNeighbors, GaussianNaiveBayes, DecisionTree, RandomForest, LogisticRegression>;

inline std::string family_name(const ClassifierSpec& spec) {
  return std::visit(
      [](const auto& s) -> std::string {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, KNearestNeighbors>) return "knn";
        else if constexpr (std::is_same_v<T, GaussianNaiveBayes>) return "gaussian_nb";
        else if constexpr (std::is_same_v<T, DecisionTree>) return "decision_tree";
        else if constexpr (std::is_same_v<T, RandomForest>) return "random_forest";
        else return "logistic";
      },
      spec);
}

inline void validate(const ClassifierSpec& spec) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, KNearestNeighbors>) {
          require(s.k >= 1, ErrorCode::InvalidArgument, "knn: k must be >= 1");
          require(s.alpha >= 0.0, ErrorCode::InvalidArgument, "knn: alpha must be >= 0");
        } else if constexpr (std::is_same_v<T, GaussianNaiveBayes>) {
          require(s.var_smoothing >= 0.0, ErrorCode::InvalidArgument, "gaussian_nb: var_smoothing must be >= 0");
        } else if constexpr (std::is_same_v<T, DecisionTree>) {
          require(s.max_depth >= 0 && s.min_leaf >= 1, ErrorCode::InvalidArgument, "decision_tree: bad depth/leaf");
        } else if constexpr (std::is_same_v<T, RandomForest>) {
          require(s.n_trees >= 1, ErrorCode::InvalidArgument, "random_forest: n_trees must be >= 1");
          require(s.max_depth >= 0 && s.min_leaf >= 1, ErrorCode::InvalidArgument, "random_forest: bad depth/leaf");
        } else {
          require(s.epochs >= 1, ErrorCode::InvalidArgument, "logistic: epochs must be >= 1");
          require(s.l2 >= 0.0, ErrorCode::InvalidArgument, "logistic: l2 must be >= 0");
          require(s.learning_rate > 0.0, ErrorCode::InvalidArgument, "logistic: learning_rate must be > 0");
        }
      },
      spec);
}

// ---------------------------------------------------------------------------
// learned state

struct KnnModel {
  Matrix X;
  std::vector<int> y;
  friend bool operator==(const KnnModel&, const KnnModel&) = default;
};

struct GaussianNbModel {
  Matrix means;      // C x d
  Matrix variances;  // C x d, smoothing included
  std::vector<double> log_prior;
  friend bool operator==(const GaussianNbModel&, const GaussianNbModel&) = default;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::vector<double> proba;  // Laplace-smoothed class frequencies
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct TreeModel {
  std::vector<TreeNode> nodes;
  friend bool operator==(const TreeModel&, const TreeModel&) = default;
};

struct ForestModel {
  std::vector<TreeModel> trees;
  friend bool operator==(const ForestModel&, const ForestModel&) = default;
};

struct LogisticModel {
  Matrix weights;  // C x (d + 1); last column is the bias
  std::vector<double> loss_history;  // objective before each epoch, plus the final value
  friend bool operator==(const LogisticModel&, const LogisticModel&) = default;
};

using LearnedState = std::variant<KnnModel, GaussianNbModel, TreeModel, ForestModel, LogisticModel>;

struct FittedClassifier {
  ClassifierSpec spec;
  std::size_t n_classes = 0;
  std::size_t n_features = 0;
  LearnedState state;
  friend bool operator==(const FittedClassifier&, const FittedClassifier&) = default;
};

// ---------------------------------------------------------------------------
// implementation

namespace detail {

inline void check_training_input(const Matrix& X, std::span<const int> y, std::size_t n_classes) {
  require(X.rows() > 0 && X.cols() > 0, ErrorCode::DegenerateInput,
          "training matrix is " + std::to_string(X.rows()) + "x" + std::to_string(X.cols()));
  require(y.size() == X.rows(), ErrorCode::ShapeMismatch, "label count differs from row count");
  require(n_classes >= 2, ErrorCode::InvalidArgument, "need at least two classes");
  for (double v : X.values()) require(std::isfinite(v), ErrorCode::NonFiniteFeature, "non-finite feature value");
  for (int c : y)
    require(c >= 0 && static_cast<std::size_t>(c) < n_classes, ErrorCode::InvalidArgument, "label out of range");
}

// --- k nearest neighbours

inline Matrix knn_predict(const KNearestNeighbors& spec, const KnnModel& m, std::size_t n_classes, const Matrix& X) {
  const std::size_t n_train = m.X.rows(), d = m.X.cols();
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(spec.k), n_train);
  const double denom = static_cast<double>(k) + spec.alpha * static_cast<double>(n_classes);
  Matrix out(X.rows(), n_classes);
  std::vector<std::pair<double, std::size_t>> dist(n_train);
  for (std::size_t r = 0; r < X.rows(); ++r) {
    auto x = X.row(r);
    for (std::size_t i = 0; i < n_train; ++i) {
      auto t = m.X.row(i);
      double s = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        double diff = x[c] - t[c];
        s += diff * diff;
      }
      dist[i] = {s, i};  // pair order: equal distances resolve to the lower training index
    }
    std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k - 1), dist.end());
    std::vector<double> votes(n_classes, 0.0);
    for (std::size_t j = 0; j < k; ++j) votes[static_cast<std::size_t>(m.y[dist[j].second])] += 1.0;
    for (std::size_t c = 0; c < n_classes; ++c) out(r, c) = (votes[c] + spec.alpha) / denom;
  }
  return out;
}

// --- Gaussian naive Bayes

inline GaussianNbModel fit_gnb(const GaussianNaiveBayes& spec, const Matrix& X, std::span<const int> y, std::size_t C) {
  const std::size_t n = X.rows(), d = X.cols();
  GaussianNbModel m;
  m.means = Matrix(C, d);
  m.variances = Matrix(C, d);
  std::vector<double> count(C, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    auto c = static_cast<std::size_t>(y[r]);
    count[c] += 1.0;
    for (std::size_t j = 0; j < d; ++j) m.means(c, j) += X(r, j);
  }
  for (std::size_t c = 0; c < C; ++c) {
    require(count[c] > 0.0, ErrorCode::DegenerateInput, "class " + std::to_string(c) + " has no training rows");
    for (std::size_t j = 0; j < d; ++j) m.means(c, j) /= count[c];
  }
  for (std::size_t r = 0; r < n; ++r) {
    auto c = static_cast<std::size_t>(y[r]);
    for (std::size_t j = 0; j < d; ++j) {
      double diff = X(r, j) - m.means(c, j);
      m.variances(c, j) += diff * diff;
    }
  }
  double max_var = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0.0;
    for (std::size_t r = 0; r < n; ++r) mean += X(r, j);
    mean /= static_cast<double>(n);
    double v = 0.0;
    for (std::size_t r = 0; r < n; ++r) v += (X(r, j) - mean) * (X(r, j) - mean);
    max_var = std::max(max_var, v / static_cast<double>(n));
  }
  double eps = spec.var_smoothing * max_var;
  if (eps <= 0.0) eps = std::max(spec.var_smoothing, 1e-12);
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t j = 0; j < d; ++j) m.variances(c, j) = m.variances(c, j) / count[c] + eps;
  for (std::size_t c = 0; c < C; ++c) m.log_prior.push_back(std::log(count[c] / static_cast<double>(n)));
  return m;
}

inline Matrix gnb_predict(const GaussianNbModel& m, const Matrix& X) {
  const std::size_t C = m.means.rows(), d = m.means.cols();
  constexpr double kLog2Pi = 1.8378770664093454835606594728112;
  Matrix out(X.rows(), C);
  std::vector<double> logp(C);
  for (std::size_t r = 0; r < X.rows(); ++r) {
    for (std::size_t c = 0; c < C; ++c) {
      double s = m.log_prior[c];
      for (std::size_t j = 0; j < d; ++j) {
        double v = m.variances(c, j);
        double diff = X(r, j) - m.means(c, j);
        s -= 0.5 * (kLog2Pi + std::log(v) + diff * diff / v);
      }
      logp[c] = s;
    }
    double mx = *std::max_element(logp.begin(), logp.end());
    for (std::size_t c = 0; c < C; ++c) out(r, c) = std::exp(logp[c] - mx);
  }
  normalize_rows(out);
  return out;
}

// --- CART

struct TreeBuilder {
  const Matrix& X;
  std::span<const int> y;
  std::size_t n_classes;
  int max_depth;
  std::size_t min_leaf;
  std::size_t features_per_split;  // == X.cols() for a plain tree
  std::mt19937_64* rng;            // feature sampling; null for a plain tree
  const Deadline& deadline;
  TreeModel model;

  std::vector<double> smoothed(const std::vector<double>& counts, double n) const {
    std::vector<double> p(n_classes);
    for (std::size_t c = 0; c < n_classes; ++c) p[c] = (counts[c] + 1.0) / (n + static_cast<double>(n_classes));
    return p;
  }

  int build(std::vector<std::size_t>& idx, int depth) {
    deadline.check();
    std::vector<double> counts(n_classes, 0.0);
    for (std::size_t i : idx) counts[static_cast<std::size_t>(y[i])] += 1.0;
    const int id = static_cast<int>(model.nodes.size());
    model.nodes.push_back(TreeNode{-1, 0.0, -1, -1, smoothed(counts, static_cast<double>(idx.size()))});

    const std::size_t n = idx.size();
    const bool pure = std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0.0; }) <= 1;
    if (pure || n < 2 * min_leaf || (max_depth > 0 && depth >= max_depth)) return id;

    std::vector<std::size_t> candidates(X.cols());
    std::iota(candidates.begin(), candidates.end(), std::size_t{0});
    if (rng && features_per_split < candidates.size()) {
      std::shuffle(candidates.begin(), candidates.end(), *rng);
      candidates.resize(features_per_split);
      std::sort(candidates.begin(), candidates.end());
    }

    // Maximise sum_c l_c^2 / n_l + sum_c r_c^2 / n_r, i.e. minimise weighted Gini.
    // Strict improvement only, so the lowest feature index, then the lowest
    // threshold, wins ties.
    double best_score = -1.0;
    int best_feature = -1;
    double best_threshold = 0.0;
    std::vector<std::pair<double, int>> column(n);
    std::vector<double> left(n_classes), right(n_classes);
    for (std::size_t f : candidates) {
      for (std::size_t j = 0; j < n; ++j) column[j] = {X(idx[j], f), y[idx[j]]};
      std::sort(column.begin(), column.end());
      if (column.front().first == column.back().first) continue;
      std::fill(left.begin(), left.end(), 0.0);
      right = counts;
      double sum_l = 0.0, sum_r = 0.0;
      for (double c : right) sum_r += c * c;
      for (std::size_t j = 0; j + 1 < n; ++j) {
        auto c = static_cast<std::size_t>(column[j].second);
        sum_l += 2.0 * left[c] + 1.0;
        left[c] += 1.0;
        sum_r -= 2.0 * right[c] - 1.0;
        right[c] -= 1.0;
        if (column[j].first == column[j + 1].first) continue;
        const std::size_t nl = j + 1, nr = n - nl;
        if (nl < min_leaf || nr < min_leaf) continue;
        double score = sum_l / static_cast<double>(nl) + sum_r / static_cast<double>(nr);
        if (score > best_score) {
          best_score = score;
          best_feature = static_cast<int>(f);
          double mid = 0.5 * (column[j].first + column[j + 1].first);
          best_threshold = mid < column[j + 1].first ? mid : column[j].first;
        }
      }
    }
    if (best_feature < 0) return id;

    std::vector<std::size_t> li, ri;
    for (std::size_t i : idx) (X(i, static_cast<std::size_t>(best_feature)) <= best_threshold ? li : ri).push_back(i);
    std::vector<std::size_t>().swap(idx);
    int l = build(li, depth + 1);
    int r = build(ri, depth + 1);
    auto& node = model.nodes[static_cast<std::size_t>(id)];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = l;
    node.right = r;
    return id;
  }
};

inline std::span<const double> tree_leaf(const TreeModel& t, std::span<const double> x) {
  const TreeNode* node = &t.nodes[0];
  while (node->feature >= 0)
    node = &t.nodes[static_cast<std::size_t>(x[static_cast<std::size_t>(node->feature)] <= node->threshold ? node->left
                                                                                                       : node->right)];
  return node->proba;
}

inline Matrix tree_predict(const TreeModel& t, std::size_t n_classes, const Matrix& X) {
  Matrix out(X.rows(), n_classes);
  for (std::size_t r = 0; r < X.rows(); ++r) {
    auto p = tree_leaf(t, X.row(r));
    std::copy(p.begin(), p.end(), out.row(r).begin());
  }
  return out;
}

inline std::size_t features_per_split(FeatureSubset rule, std::size_t m) {
  double k = static_cast<double>(m);
  switch (rule) {
    case FeatureSubset::All: break;
    case FeatureSubset::Sqrt: k = std::sqrt(k); break;
    case FeatureSubset::Log2: k = std::log2(k); break;
  }
  return std::clamp<std::size_t>(static_cast<std::size_t>(k), 1, m);
}

inline ForestModel fit_forest(const RandomForest& spec, const Matrix& X, std::span<const int> y, std::size_t C,
                              const Deadline& deadline, unsigned threads) {
  ForestModel forest;
  forest.trees.resize(static_cast<std::size_t>(spec.n_trees));
  const std::size_t n = X.rows();
  const std::size_t mtry = features_per_split(spec.features, X.cols());
  parallel_for(forest.trees.size(), threads, [&](std::size_t t) {
    deadline.check();
    std::mt19937_64 rng(spec.seed + t);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<std::size_t> bag(n);
    for (auto& i : bag) i = pick(rng);
    TreeBuilder b{X, y, C, spec.max_depth, static_cast<std::size_t>(spec.min_leaf), mtry, &rng, deadline, {}};
    b.build(bag, 0);
    forest.trees[t] = std::move(b.model);
  });
  return forest;
}

inline Matrix forest_predict(const ForestModel& f, std::size_t n_classes, const Matrix& X) {
  Matrix out(X.rows(), n_classes);
  for (const auto& t : f.trees) {
    for (std::size_t r = 0; r < X.rows(); ++r) {
      auto p = tree_leaf(t, X.row(r));
      auto o = out.row(r);
      for (std::size_t c = 0; c < n_classes; ++c) o[c] += p[c];
    }
  }
  const double k = static_cast<double>(f.trees.size());
  for (double& v : out.values()) v /= k;
  return out;
}

// --- logistic regression

inline void softmax_scores(const Matrix& W, std::span<const double> x, std::span<double> p) {
  const std::size_t C = W.rows(), d = x.size();
  for (std::size_t c = 0; c < C; ++c) {
    auto w = W.row(c);
    double s = w[d];
    for (std::size_t j = 0; j < d; ++j) s += w[j] * x[j];
    p[c] = s;
  }
  double mx = *std::max_element(p.begin(), p.end());
  double z = 0.0;
  for (double& v : p) {
    v = std::exp(v - mx);
    z += v;
  }
  for (double& v : p) v /= z;
}

inline double logistic_objective(const LogisticRegression& spec, const Matrix& W, const Matrix& X, std::span<const int> y) {
  const std::size_t C = W.rows(), d = X.cols();
  std::vector<double> p(C);
  double loss = 0.0;
  for (std::size_t r = 0; r < X.rows(); ++r) {
    softmax_scores(W, X.row(r), p);
    loss -= std::log(std::max(p[static_cast<std::size_t>(y[r])], 1e-300));
  }
  loss /= static_cast<double>(X.rows());
  double reg = 0.0;
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t j = 0; j < d; ++j) reg += W(c, j) * W(c, j);
  return loss + 0.5 * spec.l2 * reg;
}

/// The step is min(learning_rate, 1/L) with L = max_i ||[x_i, 1]||^2 / 2 + l2,
/// an upper bound on the gradient's Lipschitz constant, so each epoch can
/// only lower the objective.
inline LogisticModel fit_logistic(const LogisticRegression& spec, const Matrix& X, std::span<const int> y, std::size_t C,
                                  const Deadline& deadline) {
  const std::size_t n = X.rows(), d = X.cols();
  double max_norm = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    double s = 1.0;
    for (double v : X.row(r)) s += v * v;
    max_norm = std::max(max_norm, s);
  }
  const double step = std::min(spec.learning_rate, 1.0 / (0.5 * max_norm + spec.l2));

  LogisticModel m;
  m.weights = Matrix(C, d + 1, 0.0);
  Matrix grad(C, d + 1);
  std::vector<double> p(C);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (int epoch = 0; epoch < spec.epochs; ++epoch) {
    deadline.check();
    std::fill(grad.values().begin(), grad.values().end(), 0.0);
    double loss = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      auto x = X.row(r);
      softmax_scores(m.weights, x, p);
      const auto yr = static_cast<std::size_t>(y[r]);
      loss -= std::log(std::max(p[yr], 1e-300));
      p[yr] -= 1.0;
      for (std::size_t c = 0; c < C; ++c) {
        auto g = grad.row(c);
        const double e = p[c];
        for (std::size_t j = 0; j < d; ++j) g[j] += e * x[j];
        g[d] += e;
      }
    }
    double reg = 0.0;
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t j = 0; j < d; ++j) reg += m.weights(c, j) * m.weights(c, j);
    m.loss_history.push_back(loss * inv_n + 0.5 * spec.l2 * reg);
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t j = 0; j <= d; ++j) {
        double g = grad(c, j) * inv_n + (j < d ? spec.l2 * m.weights(c, j) : 0.0);
        m.weights(c, j) -= step * g;
      }
    }
  }
  m.loss_history.push_back(logistic_objective(spec, m.weights, X, y));
  return m;
}

inline Matrix logistic_predict(const LogisticModel& m, const Matrix& X) {
  Matrix out(X.rows(), m.weights.rows());
  for (std::size_t r = 0; r < X.rows(); ++r) softmax_scores(m.weights, X.row(r), out.row(r));
  return out;
}

}  // namespace detail

/// Trains a classifier. Deterministic for a fixed spec (seeds included);
/// forest trees are built in parallel when `threads` allows it.
inline FittedClassifier fit(const ClassifierSpec& spec, const Matrix& X, std::span<const int> y, std::size_t n_classes,
                            const Deadline& deadline = Deadline::none(), unsigned threads = 1) {
  validate(spec);
  detail::check_training_input(X, y, n_classes);
  FittedClassifier out{spec, n_classes, X.cols(), {}};
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, KNearestNeighbors>) {
          out.state = KnnModel{X, std::vector<int>(y.begin(), y.end())};
        } else if constexpr (std::is_same_v<T, GaussianNaiveBayes>) {
          out.state = detail::fit_gnb(s, X, y, n_classes);
        } else if constexpr (std::is_same_v<T, DecisionTree>) {
          std::vector<std::size_t> idx(X.rows());
          std::iota(idx.begin(), idx.end(), std::size_t{0});
          detail::TreeBuilder b{X, y, n_classes, s.max_depth, static_cast<std::size_t>(s.min_leaf), X.cols(), nullptr,
                                deadline, {}};
          b.build(idx, 0);
          out.state = std::move(b.model);
        } else if constexpr (std::is_same_v<T, RandomForest>) {
          out.state = detail::fit_forest(s, X, y, n_classes, deadline, threads);
        } else {
          out.state = detail::fit_logistic(s, X, y, n_classes, deadline);
        }
      },
      spec);
  return out;
}

inline ProbabilityMatrix predict_proba(const FittedClassifier& m, const Matrix& X) {
  require(X.cols() == m.n_features, ErrorCode::ArityMismatch,
          "model expects " + std::to_string(m.n_features) + " features, got " + std::to_string(X.cols()));
  for (double v : X.values()) require(std::isfinite(v), ErrorCode::NonFiniteFeature, "non-finite feature value");
  Matrix out = std::visit(
      [&](const auto& state) -> Matrix {
        using T = std::decay_t<decltype(state)>;
        if constexpr (std::is_same_v<T, KnnModel>)
          return detail::knn_predict(std::get<KNearestNeighbors>(m.spec), state, m.n_classes, X);
        else if constexpr (std::is_same_v<T, GaussianNbModel>) return detail::gnb_predict(state, X);
        else if constexpr (std::is_same_v<T, TreeModel>) return detail::tree_predict(state, m.n_classes, X);
        else if constexpr (std::is_same_v<T, ForestModel>) return detail::forest_predict(state, m.n_classes, X);
        else return detail::logistic_predict(state, X);
      },
      m.state);
  normalize_rows(out, 1e-12);
  return out;
}

}  // namespace autoen
