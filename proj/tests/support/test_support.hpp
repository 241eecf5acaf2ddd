#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "autoen/autoen.hpp"

namespace autoen::testing {

inline std::string source_path(const std::string& rel) { return std::string(AUTOEN_SOURCE_DIR) + "/" + rel; }

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("autoen_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

/// All-numeric dataset with columns x0..x{d-1}.
inline Dataset numeric_dataset(const Matrix& X, std::vector<int> y, std::vector<std::string> classes) {
  Dataset d;
  d.features.n_rows = X.rows();
  for (std::size_t c = 0; c < X.cols(); ++c) {
    Column col;
    col.name = "x" + std::to_string(c);
    col.kind = FeatureKind::Numeric;
    for (std::size_t r = 0; r < X.rows(); ++r) col.numbers.emplace_back(X(r, c));
    d.features.columns.push_back(std::move(col));
  }
  d.features.row_ids.resize(X.rows());
  for (std::size_t r = 0; r < X.rows(); ++r) d.features.row_ids[r] = r;
  d.labels = std::move(y);
  d.class_names = std::move(classes);
  return d;
}

/// Gaussian blobs, one centre per class, plus a categorical column that is
/// weakly tied to the class and a sprinkling of missing cells.
inline Dataset blobs(std::size_t n, std::size_t dims, std::size_t C, std::uint64_t seed, double spread = 1.5,
                     double missing_rate = 0.02) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, spread);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<double>> centres(C, std::vector<double>(dims));
  for (auto& c : centres)
    for (auto& v : c) v = 4.0 * u(rng) - 2.0;
  Dataset d;
  d.features.n_rows = n;
  d.features.columns.resize(dims + 1);
  for (std::size_t j = 0; j < dims; ++j) {
    d.features.columns[j].name = "x" + std::to_string(j);
    d.features.columns[j].kind = FeatureKind::Numeric;
  }
  auto& cat = d.features.columns[dims];
  cat.name = "colour";
  cat.kind = FeatureKind::Categorical;
  const char* palette[] = {"red", "green", "blue"};
  for (std::size_t r = 0; r < n; ++r) {
    int y = static_cast<int>(r % C);
    d.labels.push_back(y);
    for (std::size_t j = 0; j < dims; ++j) {
      double v = centres[static_cast<std::size_t>(y)][j] + noise(rng);
      if (u(rng) < missing_rate) d.features.columns[j].numbers.emplace_back(std::nullopt);
      else d.features.columns[j].numbers.emplace_back(v);
    }
    std::size_t s = u(rng) < 0.6 ? static_cast<std::size_t>(y) % 3 : static_cast<std::size_t>(u(rng) * 3.0) % 3;
    if (u(rng) < missing_rate) cat.symbols.emplace_back(std::nullopt);
    else cat.symbols.emplace_back(palette[s]);
  }
  d.features.row_ids.resize(n);
  for (std::size_t r = 0; r < n; ++r) d.features.row_ids[r] = r;
  for (std::size_t c = 0; c < C; ++c) d.class_names.push_back("c" + std::to_string(c));
  return d;
}

inline Matrix random_stochastic(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.01, 1.0);
  Matrix m(rows, cols);
  for (auto& v : m.values()) v = u(rng);
  normalize_rows(m);
  return m;
}

/// Pair-counting AUC: P(pos > neg) + P(pos == neg) / 2 over all pairs.
inline double auc_pairs(const std::vector<double>& s, const std::vector<int>& y) {
  double hits = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j)
      if (y[i] == 1 && y[j] == 0) {
        pairs += 1.0;
        if (s[i] > s[j]) hits += 1.0;
        else if (s[i] == s[j]) hits += 0.5;
      }
  return hits / pairs;
}

inline double naive_log_loss(const Matrix& p, const std::vector<int>& y) {
  double total = 0.0;
  for (std::size_t r = 0; r < p.rows(); ++r) {
    double sum = 0.0;
    for (std::size_t c = 0; c < p.cols(); ++c) sum += std::min(std::max(p(r, c), 1e-15), 1.0 - 1e-15);
    total += -std::log(std::min(std::max(p(r, static_cast<std::size_t>(y[r])), 1e-15), 1.0 - 1e-15) / sum);
  }
  return total / static_cast<double>(p.rows());
}

inline bool row_stochastic(const Matrix& m, double tol = 1e-9) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double s = 0.0;
    for (double v : m.row(r)) {
      if (!std::isfinite(v) || v < 0.0 || v > 1.0 + tol) return false;
      s += v;
    }
    if (std::abs(s - 1.0) > tol) return false;
  }
  return true;
}

}  // namespace autoen::testing
