#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "autoen/error.hpp"

namespace autoen {

enum class FeatureKind { Numeric, Categorical };

inline std::string_view kind_name(FeatureKind k) { return k == FeatureKind::Numeric ? "numeric" : "categorical"; }

/// One feature column. Exactly one of `numbers` / `symbols` is populated,
/// according to `kind`; std::nullopt marks a missing cell.
struct Column {
  std::string name;
  FeatureKind kind = FeatureKind::Numeric;
  std::vector<std::optional<double>> numbers;
  std::vector<std::optional<std::string>> symbols;

  std::size_t size() const { return kind == FeatureKind::Numeric ? numbers.size() : symbols.size(); }
  bool is_missing(std::size_t r) const {
    return kind == FeatureKind::Numeric ? !numbers[r].has_value() : !symbols[r].has_value();
  }
};

/// Feature columns without labels; what pipelines consume at predict time.
struct FeatureFrame {
  std::vector<Column> columns;
  std::size_t n_rows = 0;
  /// Row identity in the originally loaded file, carried through row selection.
  std::vector<std::size_t> row_ids;

  const Column* find(std::string_view name) const {
    for (const auto& c : columns)
      if (c.name == name) return &c;
    return nullptr;
  }
};

struct Dataset {
  FeatureFrame features;
  std::vector<int> labels;
  std::vector<std::string> class_names;

  std::size_t n_rows() const { return features.n_rows; }
  std::size_t n_classes() const { return class_names.size(); }
};

/// Column typing and label declaration that accompanies a CSV file.
///
/// Text form, one `key=value` per line, `#` starts a comment:
///   label=<column>
///   categorical=<col>,<col>,...
///   numeric=<col>,...        (optional; when present every feature must be listed)
///   missing=<sentinel>       (empty cells are always missing)
///   class_names=<a>,<b>,...  (optional; fixes class-index order)
struct Schema {
  std::string label;
  std::vector<std::string> categorical;
  std::optional<std::vector<std::string>> numeric;
  std::string missing;
  std::vector<std::string> class_names;
};

// ---------------------------------------------------------------------------
// text helpers

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r' || s[b] == '\n')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r' || s[e - 1] == '\n')) --e;
  return std::string(s.substr(b, e - b));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

inline std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

/// Splits one CSV record; supports double-quoted fields with "" escapes.
inline std::vector<std::string> parse_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(trim(cur));
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  fields.push_back(trim(cur));
  return fields;
}

inline std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

/// Shortest text that parses back to exactly the same double.
inline std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

inline std::optional<double> parse_double(const std::string& s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot write '" + path + "'");
  out << content;
  if (!out) fail(ErrorCode::IoError, "write failed for '" + path + "'");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// schema

inline Schema parse_schema_text(std::string_view text) {
  Schema s;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorCode::ParseError, "schema line " + std::to_string(lineno) + ": expected key=value");
    std::string key = detail::trim(std::string_view(line).substr(0, eq));
    std::string value = detail::trim(std::string_view(line).substr(eq + 1));
    auto list = [&] {
      std::vector<std::string> v;
      if (!value.empty()) v = detail::split(value, ',');
      return v;
    };
    if (key == "label") {
      s.label = value;
    } else if (key == "categorical") {
      s.categorical = list();
    } else if (key == "numeric") {
      s.numeric = list();
    } else if (key == "missing") {
      s.missing = value;
    } else if (key == "class_names") {
      s.class_names = list();
    } else {
      fail(ErrorCode::ParseError, "schema line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  if (s.label.empty()) fail(ErrorCode::LabelColumnMissing, "schema does not declare label=<column>");
  return s;
}

inline Schema load_schema(const std::string& path) { return parse_schema_text(detail::read_file(path)); }

inline std::string schema_to_text(const Schema& s) {
  std::string out = "label=" + s.label + "\n";
  out += "categorical=" + detail::join(s.categorical, ',') + "\n";
  if (s.numeric) out += "numeric=" + detail::join(*s.numeric, ',') + "\n";
  if (!s.missing.empty()) out += "missing=" + s.missing + "\n";
  if (!s.class_names.empty()) out += "class_names=" + detail::join(s.class_names, ',') + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// loading

namespace detail {

struct RawTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

inline RawTable parse_csv_text(std::string_view text) {
  RawTable t;
  std::istringstream in{std::string(text)};
  std::string line;
  bool have_header = false;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    auto fields = parse_csv_line(line);
    if (!have_header) {
      t.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != t.header.size())
      fail(ErrorCode::RowLengthMismatch, "line " + std::to_string(lineno) + " has " + std::to_string(fields.size()) +
                                             " fields, header has " + std::to_string(t.header.size()));
    t.rows.push_back(std::move(fields));
  }
  if (!have_header) fail(ErrorCode::ParseError, "empty CSV input");
  return t;
}

inline bool contains(const std::vector<std::string>& v, const std::string& x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

inline FeatureFrame build_frame(const RawTable& t, const Schema& schema, std::optional<std::size_t> label_col) {
  for (const auto& name : schema.categorical) {
    if (!contains(t.header, name) || name == schema.label)
      fail(ErrorCode::UnknownColumnKind, "categorical column '" + name + "' is not a feature column of the file");
    if (schema.numeric && contains(*schema.numeric, name))
      fail(ErrorCode::UnknownColumnKind, "column '" + name + "' declared both numeric and categorical");
  }
  if (schema.numeric) {
    for (const auto& name : *schema.numeric)
      if (!contains(t.header, name) || name == schema.label)
        fail(ErrorCode::UnknownColumnKind, "numeric column '" + name + "' is not a feature column of the file");
  }

  FeatureFrame f;
  f.n_rows = t.rows.size();
  f.row_ids.resize(f.n_rows);
  std::iota(f.row_ids.begin(), f.row_ids.end(), std::size_t{0});
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    if (label_col && c == *label_col) continue;
    const std::string& name = t.header[c];
    Column col;
    col.name = name;
    if (contains(schema.categorical, name)) {
      col.kind = FeatureKind::Categorical;
    } else if (!schema.numeric || contains(*schema.numeric, name)) {
      col.kind = FeatureKind::Numeric;
    } else {
      fail(ErrorCode::UnknownColumnKind, "column '" + name + "' has no declared kind");
    }
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const std::string& cell = t.rows[r][c];
      bool missing = cell.empty() || (!schema.missing.empty() && cell == schema.missing);
      if (col.kind == FeatureKind::Categorical) {
        col.symbols.push_back(missing ? std::nullopt : std::optional<std::string>(cell));
      } else if (missing) {
        col.numbers.push_back(std::nullopt);
      } else {
        auto v = parse_double(cell);
        if (!v)
          fail(ErrorCode::NonNumericCellInNumericColumn,
               "row " + std::to_string(r + 1) + ", column '" + name + "': '" + cell + "' is not a finite number");
        col.numbers.push_back(*v);
      }
    }
    f.columns.push_back(std::move(col));
  }
  return f;
}

}  // namespace detail

/// Checks the Dataset invariants; throws on the first violation.
inline void validate(const Dataset& d) {
  require(d.n_classes() >= 2, ErrorCode::SingleClassDataset, "dataset needs at least two classes");
  require(d.labels.size() == d.n_rows(), ErrorCode::RowLengthMismatch, "label vector length differs from n_rows");
  require(d.features.row_ids.size() == d.n_rows(), ErrorCode::RowLengthMismatch, "row id vector length differs");
  for (const auto& c : d.features.columns)
    require(c.size() == d.n_rows(), ErrorCode::RowLengthMismatch, "column '" + c.name + "' length differs");
  std::vector<std::size_t> seen(d.n_classes(), 0);
  for (int y : d.labels) {
    require(y >= 0 && static_cast<std::size_t>(y) < d.n_classes(), ErrorCode::InvalidArgument, "label out of range");
    ++seen[static_cast<std::size_t>(y)];
  }
  for (std::size_t c = 0; c < seen.size(); ++c)
    require(seen[c] > 0, ErrorCode::SingleClassDataset, "class '" + d.class_names[c] + "' has no rows");
}

inline Dataset parse_dataset(std::string_view csv_text, const Schema& schema) {
  auto table = detail::parse_csv_text(csv_text);
  auto it = std::find(table.header.begin(), table.header.end(), schema.label);
  if (it == table.header.end()) fail(ErrorCode::LabelColumnMissing, "label column '" + schema.label + "' not in header");
  const auto label_col = static_cast<std::size_t>(it - table.header.begin());

  Dataset d;
  d.features = detail::build_frame(table, schema, label_col);

  std::vector<std::string> raw;
  raw.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const std::string& cell = table.rows[r][label_col];
    if (cell.empty() || (!schema.missing.empty() && cell == schema.missing))
      fail(ErrorCode::LabelColumnMissing, "row " + std::to_string(r + 1) + " has a missing label");
    raw.push_back(cell);
  }
  if (!schema.class_names.empty()) {
    d.class_names = schema.class_names;
  } else {
    std::set<std::string> distinct(raw.begin(), raw.end());
    d.class_names.assign(distinct.begin(), distinct.end());
  }
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < d.class_names.size(); ++i) index[d.class_names[i]] = static_cast<int>(i);
  for (const auto& v : raw) {
    auto f = index.find(v);
    if (f == index.end()) fail(ErrorCode::InvalidArgument, "label '" + v + "' is not a declared class");
    d.labels.push_back(f->second);
  }
  validate(d);
  return d;
}

inline Dataset load_csv(const std::string& path, const Schema& schema) {
  return parse_dataset(detail::read_file(path), schema);
}

inline Dataset load_csv(const std::string& path, const std::string& schema_path) {
  return load_csv(path, load_schema(schema_path));
}

/// Loads feature columns only; the label column is ignored when present.
inline FeatureFrame load_features(const std::string& path, const Schema& schema) {
  auto table = detail::parse_csv_text(detail::read_file(path));
  std::optional<std::size_t> label_col;
  auto it = std::find(table.header.begin(), table.header.end(), schema.label);
  if (it != table.header.end()) label_col = static_cast<std::size_t>(it - table.header.begin());
  return detail::build_frame(table, schema, label_col);
}

inline std::string dataset_to_csv(const Dataset& d, const Schema& schema) {
  std::string out;
  std::vector<std::string> header;
  for (const auto& c : d.features.columns) header.push_back(detail::csv_escape(c.name));
  header.push_back(detail::csv_escape(schema.label));
  out += detail::join(header, ',') + "\n";
  for (std::size_t r = 0; r < d.n_rows(); ++r) {
    std::vector<std::string> cells;
    for (const auto& c : d.features.columns) {
      if (c.is_missing(r)) {
        cells.push_back(schema.missing);
      } else if (c.kind == FeatureKind::Numeric) {
        cells.push_back(detail::format_double(*c.numbers[r]));
      } else {
        cells.push_back(detail::csv_escape(*c.symbols[r]));
      }
    }
    cells.push_back(detail::csv_escape(d.class_names[static_cast<std::size_t>(d.labels[r])]));
    out += detail::join(cells, ',') + "\n";
  }
  return out;
}

/// Schema describing `d` exactly (kinds, class order).
inline Schema schema_of(const Dataset& d, std::string label_name, std::string missing = "") {
  Schema s;
  s.label = std::move(label_name);
  s.missing = std::move(missing);
  s.class_names = d.class_names;
  std::vector<std::string> numeric;
  for (const auto& c : d.features.columns) {
    if (c.kind == FeatureKind::Categorical) s.categorical.push_back(c.name);
    else numeric.push_back(c.name);
  }
  s.numeric = numeric;
  return s;
}

inline void write_csv(const Dataset& d, const Schema& schema, const std::string& csv_path, const std::string& schema_path) {
  detail::write_file(csv_path, dataset_to_csv(d, schema));
  detail::write_file(schema_path, schema_to_text(schema));
}

// ---------------------------------------------------------------------------
// row selection and partitioning

inline FeatureFrame select_rows(const FeatureFrame& f, std::span<const std::size_t> rows) {
  FeatureFrame out;
  out.n_rows = rows.size();
  for (std::size_t r : rows) {
    require(r < f.n_rows, ErrorCode::InvalidArgument, "row index out of range");
    out.row_ids.push_back(f.row_ids[r]);
  }
  for (const auto& c : f.columns) {
    Column nc;
    nc.name = c.name;
    nc.kind = c.kind;
    if (c.kind == FeatureKind::Numeric) {
      nc.numbers.reserve(rows.size());
      for (std::size_t r : rows) nc.numbers.push_back(c.numbers[r]);
    } else {
      nc.symbols.reserve(rows.size());
      for (std::size_t r : rows) nc.symbols.push_back(c.symbols[r]);
    }
    out.columns.push_back(std::move(nc));
  }
  return out;
}

/// Row subset; class_names are kept even if some class no longer occurs.
inline Dataset select_rows(const Dataset& d, std::span<const std::size_t> rows) {
  Dataset out;
  out.features = select_rows(d.features, rows);
  out.class_names = d.class_names;
  out.labels.reserve(rows.size());
  for (std::size_t r : rows) out.labels.push_back(d.labels[r]);
  return out;
}

inline std::vector<std::size_t> class_counts(std::span<const int> labels, std::size_t n_classes) {
  std::vector<std::size_t> counts(n_classes, 0);
  for (int y : labels) ++counts[static_cast<std::size_t>(y)];
  return counts;
}

struct HoldoutSplit {
  std::vector<std::size_t> train_idx;
  std::vector<std::size_t> valid_idx;
  std::vector<std::size_t> test_idx;
  std::array<double, 3> fractions{0.6, 0.2, 0.2};
};

struct FoldPlan {
  std::size_t k = 10;
  std::vector<std::vector<std::size_t>> folds;
  std::vector<std::string> warnings;

  /// All indices not in fold `i`, ascending.
  std::vector<std::size_t> complement(std::size_t i) const {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < folds.size(); ++j)
      if (j != i) out.insert(out.end(), folds[j].begin(), folds[j].end());
    std::sort(out.begin(), out.end());
    return out;
  }
};

namespace detail {

/// Largest-remainder apportionment of `total` items by `weights` (summing to 1).
/// Ties on the remainder go to the lower part index.
inline std::vector<std::size_t> apportion(std::size_t total, std::span<const double> weights) {
  const std::size_t parts = weights.size();
  std::vector<std::size_t> out(parts);
  std::vector<double> rem(parts);
  std::size_t assigned = 0;
  for (std::size_t p = 0; p < parts; ++p) {
    double exact = weights[p] * static_cast<double>(total);
    double fl = std::floor(exact + 1e-9);
    out[p] = static_cast<std::size_t>(fl);
    rem[p] = exact - fl;
    assigned += out[p];
  }
  std::vector<std::size_t> order(parts);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
  for (std::size_t i = 0; assigned < total; i = (i + 1) % parts, ++assigned) ++out[order[i]];
  while (assigned > total) {
    auto it = std::max_element(out.begin(), out.end());
    --*it;
    --assigned;
  }
  return out;
}

inline std::vector<std::vector<std::size_t>> indices_by_class(std::span<const int> labels, std::size_t n_classes) {
  std::vector<std::vector<std::size_t>> by(n_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) by[static_cast<std::size_t>(labels[i])].push_back(i);
  return by;
}

}  // namespace detail

/// Stratified split of 0..n-1 into parts with the given fractions.
/// With `nonempty_parts`, every class must contribute at least one row to
/// every part (ClassTooSmall otherwise).
inline std::vector<std::vector<std::size_t>> stratified_partition(std::span<const int> labels, std::size_t n_classes,
                                                                  std::span<const double> fractions,
                                                                  std::uint64_t seed, bool nonempty_parts = true) {
  require(!fractions.empty(), ErrorCode::InvalidArgument, "no fractions given");
  double sum = 0.0;
  for (double f : fractions) {
    require(f > 0.0, ErrorCode::InvalidArgument, "fractions must be positive");
    sum += f;
  }
  require(std::abs(sum - 1.0) < 1e-9, ErrorCode::InvalidArgument, "fractions must sum to 1");

  std::mt19937_64 rng(seed);
  auto by_class = detail::indices_by_class(labels, n_classes);
  std::vector<std::vector<std::size_t>> parts(fractions.size());
  for (std::size_t c = 0; c < n_classes; ++c) {
    auto& idx = by_class[c];
    std::shuffle(idx.begin(), idx.end(), rng);
    auto counts = detail::apportion(idx.size(), fractions);
    if (nonempty_parts) {
      if (idx.size() < fractions.size())
        fail(ErrorCode::ClassTooSmall, "class " + std::to_string(c) + " has " + std::to_string(idx.size()) +
                                           " rows, needs at least " + std::to_string(fractions.size()));
      for (auto& cnt : counts) {
        if (cnt == 0) {
          auto donor = std::max_element(counts.begin(), counts.end());
          --*donor;
          cnt = 1;
        }
      }
    }
    std::size_t pos = 0;
    for (std::size_t p = 0; p < parts.size(); ++p) {
      parts[p].insert(parts[p].end(), idx.begin() + static_cast<std::ptrdiff_t>(pos),
                      idx.begin() + static_cast<std::ptrdiff_t>(pos + counts[p]));
      pos += counts[p];
    }
  }
  for (auto& p : parts) std::sort(p.begin(), p.end());
  return parts;
}

inline HoldoutSplit stratified_holdout(const Dataset& d, std::array<double, 3> fractions = {0.6, 0.2, 0.2},
                                       std::uint64_t seed = 0) {
  auto parts = stratified_partition(d.labels, d.n_classes(), fractions, seed, true);
  return HoldoutSplit{std::move(parts[0]), std::move(parts[1]), std::move(parts[2]), fractions};
}

inline FoldPlan stratified_kfold(std::span<const int> labels, std::size_t n_classes, std::size_t k, std::uint64_t seed) {
  require(k >= 2, ErrorCode::KTooLarge, "k must be at least 2 (got " + std::to_string(k) + ")");
  require(k <= labels.size(), ErrorCode::KTooLarge,
          "k=" + std::to_string(k) + " exceeds n_rows=" + std::to_string(labels.size()));
  FoldPlan plan;
  plan.k = k;
  plan.folds.resize(k);
  std::mt19937_64 rng(seed);
  auto by_class = detail::indices_by_class(labels, n_classes);
  // Dealing the concatenated per-class shuffles round-robin keeps both the
  // fold sizes and every class's per-fold count within one of each other.
  std::size_t slot = 0;
  for (std::size_t c = 0; c < n_classes; ++c) {
    auto& idx = by_class[c];
    if (!idx.empty() && idx.size() < k)
      plan.warnings.push_back("class " + std::to_string(c) + " has " + std::to_string(idx.size()) + " rows (< k=" +
                              std::to_string(k) + "); spread round-robin");
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t i : idx) plan.folds[slot++ % k].push_back(i);
  }
  for (auto& f : plan.folds) std::sort(f.begin(), f.end());
  return plan;
}

inline FoldPlan stratified_kfold(const Dataset& d, std::size_t k, std::uint64_t seed) {
  return stratified_kfold(d.labels, d.n_classes(), k, seed);
}

/// Indices of a stratified subsample of ceil(fraction * n) rows, in a
/// seeded random order. Leftover rows after flooring go to the classes with
/// the largest fractional share, ties to the larger class.
inline std::vector<std::size_t> subsample_indices(std::span<const int> labels, std::size_t n_classes, double fraction,
                                                  std::uint64_t seed) {
  require(fraction > 0.0 && fraction <= 1.0, ErrorCode::InvalidArgument, "subsample fraction must be in (0, 1]");
  const std::size_t n = labels.size();
  const auto target = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
  auto by_class = detail::indices_by_class(labels, n_classes);
  std::vector<std::size_t> take(n_classes);
  std::vector<double> rem(n_classes);
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < n_classes; ++c) {
    double exact = fraction * static_cast<double>(by_class[c].size());
    double fl = std::floor(exact + 1e-9);
    take[c] = static_cast<std::size_t>(fl);
    rem[c] = exact - fl;
    assigned += take[c];
  }
  std::vector<std::size_t> order(n_classes);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (rem[a] != rem[b]) return rem[a] > rem[b];
    return by_class[a].size() > by_class[b].size();
  });
  for (std::size_t i = 0; assigned < target && i < order.size(); ++i) {
    std::size_t c = order[i];
    if (take[c] < by_class[c].size()) {
      ++take[c];
      ++assigned;
    }
  }
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < n_classes; ++c) {
    auto& idx = by_class[c];
    std::shuffle(idx.begin(), idx.end(), rng);
    out.insert(out.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take[c]));
  }
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

inline Dataset subsample(const Dataset& d, double fraction, std::uint64_t seed) {
  auto idx = subsample_indices(d.labels, d.n_classes(), fraction, seed);
  return select_rows(d, idx);
}

/// Rows of `a` followed by rows of `b`; both must share columns and classes.
inline Dataset concat_rows(const Dataset& a, const Dataset& b) {
  require(a.class_names == b.class_names, ErrorCode::ShapeMismatch, "datasets disagree on class names");
  require(a.features.columns.size() == b.features.columns.size(), ErrorCode::ArityMismatch,
          "datasets disagree on column count");
  Dataset out = a;
  for (std::size_t c = 0; c < out.features.columns.size(); ++c) {
    auto& dst = out.features.columns[c];
    const auto& src = b.features.columns[c];
    require(dst.name == src.name && dst.kind == src.kind, ErrorCode::UnknownColumn,
            "column '" + src.name + "' does not line up");
    dst.numbers.insert(dst.numbers.end(), src.numbers.begin(), src.numbers.end());
    dst.symbols.insert(dst.symbols.end(), src.symbols.begin(), src.symbols.end());
  }
  out.features.n_rows += b.features.n_rows;
  out.features.row_ids.insert(out.features.row_ids.end(), b.features.row_ids.begin(), b.features.row_ids.end());
  out.labels.insert(out.labels.end(), b.labels.begin(), b.labels.end());
  return out;
}

}  // namespace autoen
