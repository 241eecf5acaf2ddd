#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "autoen/dataset.hpp"
#include "autoen/error.hpp"

namespace autoen {

enum class Direction { HigherBetter, LowerBetter };

inline Direction parse_direction(const std::string& s) {
  if (s == "higher") return Direction::HigherBetter;
  if (s == "lower") return Direction::LowerBetter;
  fail(ErrorCode::InvalidArgument, "direction must be 'higher' or 'lower', got '" + s + "'");
}

/// scores[m][d]: method m on dataset d.
struct ScoreTable {
  std::vector<std::string> methods;
  std::vector<std::string> datasets;
  std::vector<std::vector<double>> scores;
  Direction direction = Direction::HigherBetter;

  std::size_t k() const { return methods.size(); }
  std::size_t n() const { return datasets.size(); }

  std::size_t method_index(const std::string& name) const {
    auto it = std::find(methods.begin(), methods.end(), name);
    require(it != methods.end(), ErrorCode::InvalidArgument, "unknown method '" + name + "'");
    return static_cast<std::size_t>(it - methods.begin());
  }

  void validate() const {
    require(k() >= 2, ErrorCode::InvalidArgument, "need at least 2 methods");
    require(n() >= 2, ErrorCode::InvalidArgument, "need at least 2 datasets");
    require(scores.size() == k(), ErrorCode::ShapeMismatch, "score rows differ from method count");
    for (const auto& row : scores) {
      require(row.size() == n(), ErrorCode::ShapeMismatch, "score row length differs from dataset count");
      for (double v : row) require(std::isfinite(v), ErrorCode::IncompleteResults, "missing or non-finite score");
    }
  }
};

struct RankTable {
  std::vector<std::string> methods;
  std::vector<std::vector<double>> ranks;  // ranks[m][d]
  std::vector<double> average_ranks;
  std::size_t n_datasets = 0;
};

/// Rank 1 is best. Ties share the mean of the positions they occupy.
inline RankTable average_ranks(const ScoreTable& t) {
  t.validate();
  const std::size_t k = t.k(), n = t.n();
  RankTable out;
  out.methods = t.methods;
  out.n_datasets = n;
  out.ranks.assign(k, std::vector<double>(n));
  std::vector<std::size_t> order(k);
  for (std::size_t d = 0; d < n; ++d) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto better = [&](std::size_t a, std::size_t b) {
      return t.direction == Direction::HigherBetter ? t.scores[a][d] > t.scores[b][d] : t.scores[a][d] < t.scores[b][d];
    };
    std::stable_sort(order.begin(), order.end(), better);
    for (std::size_t i = 0; i < k;) {
      std::size_t j = i;
      while (j < k && t.scores[order[j]][d] == t.scores[order[i]][d]) ++j;
      const double mid = 0.5 * static_cast<double>(i + 1 + j);
      for (std::size_t q = i; q < j; ++q) out.ranks[order[q]][d] = mid;
      i = j;
    }
  }
  out.average_ranks.resize(k);
  for (std::size_t m = 0; m < k; ++m) {
    double s = 0.0;
    for (double r : out.ranks[m]) s += r;
    out.average_ranks[m] = s / static_cast<double>(n);
  }
  return out;
}

namespace detail {

/// Regularized upper incomplete gamma Q(a, x): power series below a+1,
/// Lentz continued fraction above.
inline double gamma_q(double a, double x) {
  require(a > 0.0 && x >= 0.0, ErrorCode::InvalidArgument, "gamma_q domain");
  if (x == 0.0) return 1.0;
  const double log_prefix = -x + a * std::log(x) - std::lgamma(a);
  constexpr double eps = 1e-16;
  constexpr int max_iter = 10000;
  if (x < a + 1.0) {
    double ap = a, term = 1.0 / a, sum = term;
    for (int i = 0; i < max_iter; ++i) {
      ap += 1.0;
      term *= x / ap;
      sum += term;
      if (std::abs(term) < std::abs(sum) * eps) break;
    }
    return std::max(0.0, 1.0 - sum * std::exp(log_prefix));
  }
  constexpr double tiny = std::numeric_limits<double>::min() / eps;
  double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i <= max_iter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < eps) break;
  }
  return std::exp(log_prefix) * h;
}

}  // namespace detail

/// P(X >= x) for X ~ chi-square with `df` degrees of freedom.
inline double chi_square_sf(double x, double df) { return x <= 0.0 ? 1.0 : detail::gamma_q(df / 2.0, x / 2.0); }

/// Two-sided standard normal tail, P(|Z| >= |z|).
inline double normal_two_sided_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

struct FriedmanResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t df = 0;
  /// Every average rank identical; statistic 0 and p 1 by definition.
  bool degenerate = false;
};

inline FriedmanResult friedman_test(const RankTable& r) {
  const double k = static_cast<double>(r.average_ranks.size());
  const double n = static_cast<double>(r.n_datasets);
  require(r.average_ranks.size() >= 2 && r.n_datasets >= 1, ErrorCode::InvalidArgument, "rank table too small");
  FriedmanResult out;
  out.df = r.average_ranks.size() - 1;
  const double first = r.average_ranks.front();
  out.degenerate = std::all_of(r.average_ranks.begin(), r.average_ranks.end(),
                               [&](double v) { return std::abs(v - first) <= 1e-12; });
  if (out.degenerate) return out;
  double sum_sq = 0.0;
  for (double v : r.average_ranks) sum_sq += v * v;
  out.statistic = 12.0 * n / (k * (k + 1.0)) * (sum_sq - k * (k + 1.0) * (k + 1.0) / 4.0);
  out.statistic = std::max(0.0, out.statistic);
  out.p_value = chi_square_sf(out.statistic, static_cast<double>(out.df));
  return out;
}

struct HolmRow {
  std::string method;
  double average_rank = 0.0;
  double z = 0.0;
  double p_raw = 1.0;
  double p_adjusted = 1.0;
  bool reject = false;
};

/// Control against every other method; rows come back sorted by raw p
/// (method order on ties).
inline std::vector<HolmRow> holm_posthoc(const RankTable& r, std::size_t control, double alpha = 0.05) {
  const std::size_t k = r.average_ranks.size();
  require(control < k, ErrorCode::InvalidArgument, "control index out of range");
  require(r.n_datasets >= 1, ErrorCode::InvalidArgument, "rank table has no datasets");
  const double kd = static_cast<double>(k);
  const double se = std::sqrt(kd * (kd + 1.0) / (6.0 * static_cast<double>(r.n_datasets)));
  std::vector<HolmRow> rows;
  for (std::size_t m = 0; m < k; ++m) {
    if (m == control) continue;
    HolmRow h;
    h.method = r.methods[m];
    h.average_rank = r.average_ranks[m];
    h.z = (r.average_ranks[control] - r.average_ranks[m]) / se;
    h.p_raw = normal_two_sided_p(h.z);
    rows.push_back(h);
  }
  std::stable_sort(rows.begin(), rows.end(), [](const HolmRow& a, const HolmRow& b) { return a.p_raw < b.p_raw; });
  const double m = static_cast<double>(rows.size());
  double running = 0.0;
  bool still_rejecting = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    running = std::max(running, std::min(1.0, (m - static_cast<double>(i)) * rows[i].p_raw));
    rows[i].p_adjusted = running;
    still_rejecting = still_rejecting && running <= alpha;
    rows[i].reject = still_rejecting;
  }
  return rows;
}

// ---------------------------------------------------------------------------
// CSV I/O: header "dataset,<method>,...", one row per dataset, '#' comments.

inline ScoreTable parse_score_csv(std::string_view text, Direction direction) {
  ScoreTable t;
  t.direction = direction;
  std::istringstream in{std::string(text)};
  bool header = true;
  int line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty() || detail::trim(line)[0] == '#') continue;
    auto cells = detail::parse_csv_line(line);
    if (header) {
      require(cells.size() >= 3, ErrorCode::ParseError, "score header needs a dataset column and >= 2 methods");
      t.methods.assign(cells.begin() + 1, cells.end());
      t.scores.assign(t.methods.size(), {});
      header = false;
      continue;
    }
    require(cells.size() == t.methods.size() + 1, ErrorCode::RowLengthMismatch,
            "line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) + " cells");
    t.datasets.push_back(cells[0]);
    for (std::size_t m = 0; m < t.methods.size(); ++m) {
      auto v = detail::parse_double(detail::trim(cells[m + 1]));
      require(v.has_value(), ErrorCode::IncompleteResults,
              "missing score for " + t.methods[m] + " on " + cells[0] + " (line " + std::to_string(line_no) + ")");
      t.scores[m].push_back(*v);
    }
  }
  require(!header, ErrorCode::ParseError, "score file is empty");
  t.validate();
  return t;
}

inline ScoreTable load_score_csv(const std::string& path, Direction direction) {
  return parse_score_csv(detail::read_file(path), direction);
}

inline std::string score_table_csv(const ScoreTable& t) {
  std::string out = "dataset";
  for (const auto& m : t.methods) out += "," + detail::csv_escape(m);
  out += "\n";
  for (std::size_t d = 0; d < t.n(); ++d) {
    out += detail::csv_escape(t.datasets[d]);
    for (std::size_t m = 0; m < t.k(); ++m) out += "," + detail::format_double(t.scores[m][d]);
    out += "\n";
  }
  return out;
}

/// method,average_rank sorted best first (method order on ties).
inline std::string rank_csv(const RankTable& r) {
  std::vector<std::size_t> order(r.methods.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return r.average_ranks[a] < r.average_ranks[b]; });
  std::string out = "method,average_rank\n";
  for (auto m : order) out += detail::csv_escape(r.methods[m]) + "," + detail::format_double(r.average_ranks[m]) + "\n";
  return out;
}

inline std::string friedman_csv(const FriedmanResult& f, std::size_t k, std::size_t n) {
  return "statistic,df,p_value,k,n,degenerate\n" + detail::format_double(f.statistic) + "," + std::to_string(f.df) +
         "," + detail::format_double(f.p_value) + "," + std::to_string(k) + "," + std::to_string(n) + "," +
         (f.degenerate ? "true" : "false") + "\n";
}

inline std::string holm_csv(const std::vector<HolmRow>& rows, const std::string& control) {
  std::string out = "control,method,average_rank,z,p_raw,p_adjusted,reject_0.05\n";
  for (const auto& h : rows)
    out += detail::csv_escape(control) + "," + detail::csv_escape(h.method) + "," +
           detail::format_double(h.average_rank) + "," + detail::format_double(h.z) + "," +
           detail::format_double(h.p_raw) + "," + detail::format_double(h.p_adjusted) + "," +
           (h.reject ? "true" : "false") + "\n";
  return out;
}

}  // namespace autoen
