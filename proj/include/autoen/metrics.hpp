#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "autoen/error.hpp"
#include "autoen/matrix.hpp"

namespace autoen {

enum class Metric { RocAuc, LogLoss, Accuracy };

inline bool higher_is_better(Metric m) { return m != Metric::LogLoss; }

inline std::string metric_name(Metric m) {
  switch (m) {
    case Metric::RocAuc: return "roc_auc";
    case Metric::LogLoss: return "log_loss";
    case Metric::Accuracy: return "accuracy";
  }
  return "?";
}

inline Metric parse_metric(const std::string& s) {
  if (s == "roc_auc") return Metric::RocAuc;
  if (s == "log_loss") return Metric::LogLoss;
  if (s == "accuracy") return Metric::Accuracy;
  fail(ErrorCode::InvalidArgument, "unknown metric '" + s + "'");
}

/// roc_auc for binary problems, log_loss otherwise.
inline Metric default_metric(std::size_t n_classes) { return n_classes == 2 ? Metric::RocAuc : Metric::LogLoss; }

/// True when `a` is a strictly better value than `b` under `m`.
inline bool strictly_better(Metric m, double a, double b) { return higher_is_better(m) ? a > b : a < b; }

struct Score {
  Metric metric = Metric::LogLoss;
  double value = 0.0;
  std::size_t n_samples = 0;
};

/// Area under the ROC curve via the Mann-Whitney rank-sum identity; tied
/// scores share their midrank, so ties count one half. O(n log n).
inline double roc_auc_binary(std::span<const double> scores, std::span<const int> labels) {
  require(scores.size() == labels.size(), ErrorCode::ShapeMismatch, "scores and labels differ in length");
  const std::size_t n = scores.size();
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < n; ++i) {
    require(labels[i] == 0 || labels[i] == 1, ErrorCode::InvalidArgument, "binary labels must be 0 or 1");
    require(std::isfinite(scores[i]), ErrorCode::InvalidArgument, "non-finite score");
    n_pos += labels[i] == 1;
  }
  const std::size_t n_neg = n - n_pos;
  require(n_pos > 0 && n_neg > 0, ErrorCode::SingleClassPresent, "roc_auc needs both classes present");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double pos_rank_sum = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1 .. j
    for (std::size_t t = i; t < j; ++t)
      if (labels[order[t]] == 1) pos_rank_sum += midrank;
    i = j;
  }
  const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
  return (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

inline constexpr double kLogLossEpsilon = 1e-15;

/// Mean negative log-likelihood of the true class. Entries are clipped to
/// [eps, 1-eps] and each row is renormalised before taking the logarithm.
inline double log_loss_multiclass(const ProbabilityMatrix& probs, std::span<const int> labels) {
  require(probs.rows() == labels.size(), ErrorCode::ShapeMismatch, "probability rows differ from label count");
  require(probs.rows() > 0, ErrorCode::ShapeMismatch, "empty probability matrix");
  double total = 0.0;
  for (std::size_t r = 0; r < probs.rows(); ++r) {
    require(labels[r] >= 0 && static_cast<std::size_t>(labels[r]) < probs.cols(), ErrorCode::ShapeMismatch,
            "label outside probability columns");
    double sum = 0.0, p_true = 0.0;
    for (std::size_t c = 0; c < probs.cols(); ++c) {
      double p = std::clamp(probs(r, c), kLogLossEpsilon, 1.0 - kLogLossEpsilon);
      sum += p;
      if (static_cast<int>(c) == labels[r]) p_true = p;
    }
    total -= std::log(p_true / sum);
  }
  return total / static_cast<double>(probs.rows());
}

/// Fraction of rows whose argmax (lowest index on ties) equals the label.
inline double accuracy(const ProbabilityMatrix& probs, std::span<const int> labels) {
  require(probs.rows() == labels.size(), ErrorCode::ShapeMismatch, "probability rows differ from label count");
  require(probs.rows() > 0, ErrorCode::ShapeMismatch, "empty probability matrix");
  std::size_t correct = 0;
  for (std::size_t r = 0; r < probs.rows(); ++r) {
    auto row = probs.row(r);
    auto best = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
    correct += best == labels[r];
  }
  return static_cast<double>(correct) / static_cast<double>(probs.rows());
}

/// Positive-class column (index 1) of a binary probability matrix.
inline std::vector<double> positive_scores(const ProbabilityMatrix& probs) {
  require(probs.cols() == 2, ErrorCode::ShapeMismatch, "roc_auc is defined for two-column probabilities only");
  std::vector<double> s(probs.rows());
  for (std::size_t r = 0; r < probs.rows(); ++r) s[r] = probs(r, 1);
  return s;
}

inline double evaluate(Metric m, const ProbabilityMatrix& probs, std::span<const int> labels) {
  switch (m) {
    case Metric::RocAuc: return roc_auc_binary(positive_scores(probs), labels);
    case Metric::LogLoss: return log_loss_multiclass(probs, labels);
    case Metric::Accuracy: return accuracy(probs, labels);
  }
  fail(ErrorCode::InvalidArgument, "unknown metric");
}

inline Score score(Metric m, const ProbabilityMatrix& probs, std::span<const int> labels) {
  return Score{m, evaluate(m, probs, labels), labels.size()};
}

}  // namespace autoen
