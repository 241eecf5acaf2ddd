#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "autoen/dataset.hpp"
#include "autoen/error.hpp"
#include "autoen/matrix.hpp"

namespace autoen {

/// One preprocessing step of a pipeline, before fitting.
struct TransformStep {
  enum class Kind { ImputeMeanMode, StandardScale, MinMaxScale, OneHotEncode, VarianceFilter, PolynomialExpand };

  Kind kind = Kind::ImputeMeanMode;
  double threshold = 0.0;  // VarianceFilter only
  int degree = 2;          // PolynomialExpand only

  static TransformStep impute() { return {Kind::ImputeMeanMode}; }
  static TransformStep standard_scale() { return {Kind::StandardScale}; }
  static TransformStep min_max_scale() { return {Kind::MinMaxScale}; }
  static TransformStep one_hot() { return {Kind::OneHotEncode}; }
  static TransformStep variance_filter(double t = 0.0) { return {Kind::VarianceFilter, t}; }
  static TransformStep polynomial() { return {Kind::PolynomialExpand, 0.0, 2}; }

  /// Steps that cannot see categorical columns or missing cells.
  bool numeric_only() const { return kind != Kind::ImputeMeanMode && kind != Kind::OneHotEncode; }

  friend bool operator==(const TransformStep&, const TransformStep&) = default;
};

/// Learned state of one step. Which fields are meaningful depends on the kind:
///   ImputeMeanMode    fill_numbers / fill_symbols per input column
///   OneHotEncode      vocabularies per input column (empty for numeric columns)
///   StandardScale     offset = mean, scale = 1/stddev (0 for constant columns)
///   MinMaxScale       offset = min,  scale = 1/(max-min) (0 for constant columns)
///   VarianceFilter    keep mask
///   PolynomialExpand  arities only
struct FittedTransform {
  TransformStep step;
  std::vector<std::string> input_names;
  std::vector<FeatureKind> input_kinds;
  std::size_t input_arity = 0;
  std::size_t output_arity = 0;

  std::vector<double> fill_numbers;
  std::vector<std::string> fill_symbols;
  std::vector<std::vector<std::string>> vocabularies;
  std::vector<double> offset;
  std::vector<double> scale;
  std::vector<bool> keep;

  friend bool operator==(const FittedTransform&, const FittedTransform&) = default;
};

inline std::string step_name(const TransformStep& s) {
  switch (s.kind) {
    case TransformStep::Kind::ImputeMeanMode: return "impute";
    case TransformStep::Kind::StandardScale: return "standard";
    case TransformStep::Kind::MinMaxScale: return "minmax";
    case TransformStep::Kind::OneHotEncode: return "onehot";
    case TransformStep::Kind::VarianceFilter: return "variance(" + detail::format_double(s.threshold) + ")";
    case TransformStep::Kind::PolynomialExpand: return "poly" + std::to_string(s.degree);
  }
  return "?";
}

namespace detail {

/// Intermediate data flowing through a chain: mixed columns until the first
/// numeric-only step, a dense matrix afterwards.
struct ChainState {
  std::variant<FeatureFrame, Matrix> data;
};

inline std::vector<std::string> column_names(const FeatureFrame& f) {
  std::vector<std::string> n;
  for (const auto& c : f.columns) n.push_back(c.name);
  return n;
}

inline std::vector<FeatureKind> column_kinds(const FeatureFrame& f) {
  std::vector<FeatureKind> k;
  for (const auto& c : f.columns) k.push_back(c.kind);
  return k;
}

inline Matrix frame_to_matrix(const FeatureFrame& f, const std::string& context) {
  Matrix m(f.n_rows, f.columns.size());
  for (std::size_t c = 0; c < f.columns.size(); ++c) {
    const auto& col = f.columns[c];
    if (col.kind != FeatureKind::Numeric)
      fail(ErrorCode::ChainOrderInvalid, context + " received categorical column '" + col.name + "'");
    for (std::size_t r = 0; r < f.n_rows; ++r) {
      if (!col.numbers[r]) fail(ErrorCode::ChainOrderInvalid, context + " received a missing value in '" + col.name + "'");
      m(r, c) = *col.numbers[r];
    }
  }
  return m;
}

inline Matrix& as_matrix(ChainState& s, const std::string& context) {
  if (auto* f = std::get_if<FeatureFrame>(&s.data)) s.data = frame_to_matrix(*f, context);
  return std::get<Matrix>(s.data);
}

inline std::size_t arity(const ChainState& s) {
  if (auto* f = std::get_if<FeatureFrame>(&s.data)) return f->columns.size();
  return std::get<Matrix>(s.data).cols();
}

inline void check_layout(const FittedTransform& t, const FeatureFrame& f) {
  if (f.columns.size() != t.input_arity)
    fail(ErrorCode::ArityMismatch, step_name(t.step) + " expects " + std::to_string(t.input_arity) + " columns, got " +
                                       std::to_string(f.columns.size()));
  for (std::size_t c = 0; c < f.columns.size(); ++c) {
    if (f.columns[c].name != t.input_names[c])
      fail(ErrorCode::UnknownColumn, "column '" + f.columns[c].name + "' where '" + t.input_names[c] + "' was expected");
    if (f.columns[c].kind != t.input_kinds[c])
      fail(ErrorCode::UnknownColumn, "column '" + f.columns[c].name + "' changed kind since fitting");
  }
}

inline void check_arity(const FittedTransform& t, std::size_t cols) {
  if (cols != t.input_arity)
    fail(ErrorCode::ArityMismatch,
         step_name(t.step) + " expects " + std::to_string(t.input_arity) + " columns, got " + std::to_string(cols));
}

// --- impute

inline FittedTransform fit_impute(const FeatureFrame& f) {
  FittedTransform t;
  t.fill_numbers.assign(f.columns.size(), 0.0);
  t.fill_symbols.assign(f.columns.size(), std::string{});
  for (std::size_t c = 0; c < f.columns.size(); ++c) {
    const auto& col = f.columns[c];
    if (col.kind == FeatureKind::Numeric) {
      double sum = 0.0;
      std::size_t n = 0;
      for (const auto& v : col.numbers)
        if (v) {
          sum += *v;
          ++n;
        }
      t.fill_numbers[c] = n ? sum / static_cast<double>(n) : 0.0;
    } else {
      std::map<std::string, std::size_t> freq;  // ordered: ties resolve to the smallest symbol
      for (const auto& v : col.symbols)
        if (v) ++freq[*v];
      std::size_t best = 0;
      for (const auto& [sym, n] : freq)
        if (n > best) {
          best = n;
          t.fill_symbols[c] = sym;
        }
    }
  }
  return t;
}

inline FeatureFrame apply_impute(const FittedTransform& t, FeatureFrame f) {
  for (std::size_t c = 0; c < f.columns.size(); ++c) {
    auto& col = f.columns[c];
    if (col.kind == FeatureKind::Numeric) {
      for (auto& v : col.numbers)
        if (!v) v = t.fill_numbers[c];
    } else {
      for (auto& v : col.symbols)
        if (!v) v = t.fill_symbols[c];
    }
  }
  return f;
}

// --- one-hot

inline FittedTransform fit_one_hot(const FeatureFrame& f) {
  FittedTransform t;
  t.vocabularies.resize(f.columns.size());
  for (std::size_t c = 0; c < f.columns.size(); ++c) {
    const auto& col = f.columns[c];
    if (col.kind != FeatureKind::Categorical) continue;
    std::vector<std::string> vocab;
    for (const auto& v : col.symbols)
      if (v) vocab.push_back(*v);
    std::sort(vocab.begin(), vocab.end());
    vocab.erase(std::unique(vocab.begin(), vocab.end()), vocab.end());
    t.vocabularies[c] = std::move(vocab);
  }
  return t;
}

/// Categorical columns expand in place into one indicator column per known
/// symbol; unseen or missing symbols give an all-zero block.
inline FeatureFrame apply_one_hot(const FittedTransform& t, const FeatureFrame& f) {
  FeatureFrame out;
  out.n_rows = f.n_rows;
  out.row_ids = f.row_ids;
  for (std::size_t c = 0; c < f.columns.size(); ++c) {
    const auto& col = f.columns[c];
    if (col.kind == FeatureKind::Numeric) {
      out.columns.push_back(col);
      continue;
    }
    const auto& vocab = t.vocabularies[c];
    std::vector<Column> block(vocab.size());
    for (std::size_t j = 0; j < vocab.size(); ++j) {
      block[j].name = col.name + "=" + vocab[j];
      block[j].kind = FeatureKind::Numeric;
      block[j].numbers.assign(f.n_rows, 0.0);
    }
    for (std::size_t r = 0; r < f.n_rows; ++r) {
      if (!col.symbols[r]) continue;
      auto it = std::lower_bound(vocab.begin(), vocab.end(), *col.symbols[r]);
      if (it != vocab.end() && *it == *col.symbols[r]) block[static_cast<std::size_t>(it - vocab.begin())].numbers[r] = 1.0;
    }
    for (auto& b : block) out.columns.push_back(std::move(b));
  }
  return out;
}

// --- numeric-only steps

inline void column_moments(const Matrix& m, std::size_t c, double& mean, double& var) {
  const double n = static_cast<double>(m.rows());
  double sum = 0.0;
  for (std::size_t r = 0; r < m.rows(); ++r) sum += m(r, c);
  mean = m.rows() ? sum / n : 0.0;
  double ss = 0.0;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double d = m(r, c) - mean;
    ss += d * d;
  }
  var = m.rows() ? ss / n : 0.0;
}

inline FittedTransform fit_numeric(const TransformStep& step, const Matrix& m) {
  FittedTransform t;
  const std::size_t d = m.cols();
  using K = TransformStep::Kind;
  switch (step.kind) {
    case K::StandardScale:
      t.offset.resize(d);
      t.scale.resize(d);
      for (std::size_t c = 0; c < d; ++c) {
        double mean, var;
        column_moments(m, c, mean, var);
        double sd = std::sqrt(var);
        t.offset[c] = mean;
        t.scale[c] = sd > 0.0 ? 1.0 / sd : 0.0;
      }
      break;
    case K::MinMaxScale:
      t.offset.resize(d);
      t.scale.resize(d);
      for (std::size_t c = 0; c < d; ++c) {
        double lo = m.rows() ? m(0, c) : 0.0, hi = lo;
        for (std::size_t r = 0; r < m.rows(); ++r) {
          lo = std::min(lo, m(r, c));
          hi = std::max(hi, m(r, c));
        }
        t.offset[c] = lo;
        t.scale[c] = hi > lo ? 1.0 / (hi - lo) : 0.0;
      }
      break;
    case K::VarianceFilter:
      t.keep.resize(d);
      for (std::size_t c = 0; c < d; ++c) {
        double mean, var;
        column_moments(m, c, mean, var);
        t.keep[c] = var > step.threshold;
      }
      if (std::none_of(t.keep.begin(), t.keep.end(), [](bool k) { return k; }))
        fail(ErrorCode::EmptyOutput, "variance filter removed every column");
      break;
    case K::PolynomialExpand:
      require(step.degree == 2, ErrorCode::InvalidArgument, "only degree-2 polynomial expansion is supported");
      break;
    default:
      break;
  }
  return t;
}

inline Matrix apply_numeric(const FittedTransform& t, const Matrix& m) {
  using K = TransformStep::Kind;
  const std::size_t n = m.rows(), d = m.cols();
  switch (t.step.kind) {
    case K::StandardScale:
    case K::MinMaxScale: {
      Matrix out(n, d);
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < d; ++c) out(r, c) = (m(r, c) - t.offset[c]) * t.scale[c];
      return out;
    }
    case K::VarianceFilter: {
      std::vector<std::size_t> kept;
      for (std::size_t c = 0; c < d; ++c)
        if (t.keep[c]) kept.push_back(c);
      Matrix out(n, kept.size());
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t j = 0; j < kept.size(); ++j) out(r, j) = m(r, kept[j]);
      return out;
    }
    case K::PolynomialExpand: {
      // originals, then x_i * x_j for i <= j in lexicographic (i, j) order
      Matrix out(n, d + d * (d + 1) / 2);
      for (std::size_t r = 0; r < n; ++r) {
        auto src = m.row(r);
        auto dst = out.row(r);
        std::size_t k = 0;
        for (std::size_t c = 0; c < d; ++c) dst[k++] = src[c];
        for (std::size_t i = 0; i < d; ++i)
          for (std::size_t j = i; j < d; ++j) dst[k++] = src[i] * src[j];
      }
      return out;
    }
    default:
      return m;
  }
}

inline std::size_t numeric_output_arity(const FittedTransform& t, std::size_t d) {
  using K = TransformStep::Kind;
  switch (t.step.kind) {
    case K::VarianceFilter: return static_cast<std::size_t>(std::count(t.keep.begin(), t.keep.end(), true));
    case K::PolynomialExpand: return d + d * (d + 1) / 2;
    default: return d;
  }
}

/// Applies one fitted step to the running state.
inline void apply_step(const FittedTransform& t, ChainState& s) {
  using K = TransformStep::Kind;
  if (t.step.kind == K::ImputeMeanMode || t.step.kind == K::OneHotEncode) {
    if (auto* f = std::get_if<FeatureFrame>(&s.data)) {
      check_layout(t, *f);
      s.data = t.step.kind == K::ImputeMeanMode ? apply_impute(t, std::move(*f)) : apply_one_hot(t, *f);
    } else {
      check_arity(t, std::get<Matrix>(s.data).cols());  // already dense: nothing left to impute or encode
    }
    return;
  }
  Matrix& m = as_matrix(s, step_name(t.step));
  check_arity(t, m.cols());
  s.data = apply_numeric(t, m);
}

inline FittedTransform fit_step(const TransformStep& step, ChainState& s) {
  using K = TransformStep::Kind;
  FittedTransform t;
  if (!step.numeric_only()) {
    if (auto* f = std::get_if<FeatureFrame>(&s.data)) {
      t = step.kind == K::ImputeMeanMode ? fit_impute(*f) : fit_one_hot(*f);
      t.input_names = column_names(*f);
      t.input_kinds = column_kinds(*f);
    } else {
      const auto& m = std::get<Matrix>(s.data);
      t.input_kinds.assign(m.cols(), FeatureKind::Numeric);
    }
  } else {
    t = fit_numeric(step, as_matrix(s, step_name(step)));
  }
  t.step = step;
  t.input_arity = arity(s);
  return t;
}

}  // namespace detail

struct FittedChain {
  std::vector<FittedTransform> steps;
  Matrix output;
};

/// Fits every step on `train` in order and returns the fitted steps together
/// with the transformed training matrix. Only `train` is read.
inline FittedChain fit_transform_chain(const std::vector<TransformStep>& steps, const FeatureFrame& train) {
  detail::ChainState s{train};
  FittedChain out;
  for (const auto& step : steps) {
    auto t = detail::fit_step(step, s);
    detail::apply_step(t, s);
    t.output_arity = detail::arity(s);
    out.steps.push_back(std::move(t));
  }
  out.output = std::move(detail::as_matrix(s, "classifier input"));
  return out;
}

inline FittedChain fit_transform_chain(const std::vector<TransformStep>& steps, const Dataset& train) {
  return fit_transform_chain(steps, train.features);
}

inline Matrix apply_chain(const std::vector<FittedTransform>& fitted, const FeatureFrame& data) {
  detail::ChainState s{data};
  for (const auto& t : fitted) detail::apply_step(t, s);
  return std::move(detail::as_matrix(s, "classifier input"));
}

inline Matrix apply_chain(const std::vector<FittedTransform>& fitted, const Dataset& data) {
  return apply_chain(fitted, data.features);
}

}  // namespace autoen
