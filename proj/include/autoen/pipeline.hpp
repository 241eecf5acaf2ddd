#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "autoen/dataset.hpp"
#include "autoen/error.hpp"
#include "autoen/learners.hpp"
#include "autoen/preprocess.hpp"

namespace autoen {

struct PipelineSpec {
  int id = 0;
  std::string name;
  std::vector<TransformStep> steps;
  ClassifierSpec classifier;
  friend bool operator==(const PipelineSpec&, const PipelineSpec&) = default;
};

/// Ordered; the order is the tie-break order everywhere downstream.
struct Portfolio {
  std::vector<PipelineSpec> pipelines;

  std::size_t size() const { return pipelines.size(); }
  const PipelineSpec* find(int id) const {
    for (const auto& p : pipelines)
      if (p.id == id) return &p;
    return nullptr;
  }
};

// ---------------------------------------------------------------------------
// text format
//
//   # comment
//   <id> <name> <steps> <classifier> [key=value ...]
//
// <steps> is a comma-separated list of impute, onehot, standard, minmax,
// variance[:threshold], poly2, or "-" for none. Classifiers and their keys:
//   knn            k, alpha
//   gaussian_nb    var_smoothing
//   decision_tree  max_depth, min_leaf
//   random_forest  n_trees, max_depth, min_leaf, features (all|sqrt|log2), seed
//   logistic       l2, epochs, learning_rate, seed

namespace detail {

inline TransformStep parse_step(const std::string& tok, int line_no) {
  auto where = " (line " + std::to_string(line_no) + ")";
  if (tok == "impute") return TransformStep::impute();
  if (tok == "onehot") return TransformStep::one_hot();
  if (tok == "standard") return TransformStep::standard_scale();
  if (tok == "minmax") return TransformStep::min_max_scale();
  if (tok == "poly2") return TransformStep::polynomial();
  if (tok == "variance") return TransformStep::variance_filter(0.0);
  if (tok.rfind("variance:", 0) == 0) {
    auto t = parse_double(tok.substr(9));
    require(t.has_value() && *t >= 0.0, ErrorCode::ParseError, "bad variance threshold '" + tok + "'" + where);
    return TransformStep::variance_filter(*t);
  }
  fail(ErrorCode::UnknownStep, "unknown step '" + tok + "'" + where);
}

inline std::string step_token(const TransformStep& s) {
  using K = TransformStep::Kind;
  switch (s.kind) {
    case K::ImputeMeanMode: return "impute";
    case K::OneHotEncode: return "onehot";
    case K::StandardScale: return "standard";
    case K::MinMaxScale: return "minmax";
    case K::PolynomialExpand: return "poly2";
    case K::VarianceFilter: return "variance:" + format_double(s.threshold);
  }
  return "?";
}

struct KeyValues {
  std::map<std::string, std::string> values;
  std::set<std::string> used;
  std::string where;

  const std::string* get(const std::string& key) {
    auto it = values.find(key);
    if (it == values.end()) return nullptr;
    used.insert(key);
    return &it->second;
  }
  void number(const std::string& key, double& out) {
    if (auto v = get(key)) {
      auto d = parse_double(*v);
      require(d.has_value(), ErrorCode::ParseError, "bad value for " + key + where);
      out = *d;
    }
  }
  template <class Int>
  void integer(const std::string& key, Int& out) {
    if (auto v = get(key)) {
      std::size_t pos = 0;
      try {
        if constexpr (std::is_unsigned_v<Int>) out = static_cast<Int>(std::stoull(*v, &pos));
        else out = static_cast<Int>(std::stoll(*v, &pos));
      } catch (const std::exception&) {
        pos = 0;
      }
      require(pos == v->size() && !v->empty(), ErrorCode::ParseError, "bad integer for " + key + where);
    }
  }
  void finish() {
    for (const auto& [k, v] : values)
      require(used.count(k) > 0, ErrorCode::ParseError, "unknown hyperparameter '" + k + "'" + where);
  }
};

inline FeatureSubset parse_feature_subset(const std::string& s, const std::string& where) {
  if (s == "all") return FeatureSubset::All;
  if (s == "sqrt") return FeatureSubset::Sqrt;
  if (s == "log2") return FeatureSubset::Log2;
  fail(ErrorCode::ParseError, "bad features value '" + s + "'" + where);
}

inline std::string feature_subset_name(FeatureSubset f) {
  switch (f) {
    case FeatureSubset::All: return "all";
    case FeatureSubset::Sqrt: return "sqrt";
    case FeatureSubset::Log2: return "log2";
  }
  return "?";
}

inline ClassifierSpec parse_classifier(const std::string& name, KeyValues& kv) {
  ClassifierSpec spec;
  if (name == "knn") {
    KNearestNeighbors s;
    kv.integer("k", s.k);
    kv.number("alpha", s.alpha);
    spec = s;
  } else if (name == "gaussian_nb") {
    GaussianNaiveBayes s;
    kv.number("var_smoothing", s.var_smoothing);
    spec = s;
  } else if (name == "decision_tree") {
    DecisionTree s;
    kv.integer("max_depth", s.max_depth);
    kv.integer("min_leaf", s.min_leaf);
    spec = s;
  } else if (name == "random_forest") {
    RandomForest s;
    kv.integer("n_trees", s.n_trees);
    kv.integer("max_depth", s.max_depth);
    kv.integer("min_leaf", s.min_leaf);
    if (auto v = kv.get("features")) s.features = parse_feature_subset(*v, kv.where);
    kv.integer("seed", s.seed);
    spec = s;
  } else if (name == "logistic") {
    LogisticRegression s;
    kv.number("l2", s.l2);
    kv.integer("epochs", s.epochs);
    kv.number("learning_rate", s.learning_rate);
    kv.integer("seed", s.seed);
    spec = s;
  } else {
    fail(ErrorCode::UnknownClassifier, "unknown classifier '" + name + "'" + kv.where);
  }
  kv.finish();
  try {
    validate(spec);
  } catch (const Error& e) {
    fail(ErrorCode::ParseError, e.detail() + kv.where);
  }
  return spec;
}

inline std::string classifier_tokens(const ClassifierSpec& spec) {
  return std::visit(
      [](const auto& s) -> std::string {
        using T = std::decay_t<decltype(s)>;
        auto f = [](double v) { return format_double(v); };
        if constexpr (std::is_same_v<T, KNearestNeighbors>)
          return "knn k=" + std::to_string(s.k) + " alpha=" + f(s.alpha);
        else if constexpr (std::is_same_v<T, GaussianNaiveBayes>)
          return "gaussian_nb var_smoothing=" + f(s.var_smoothing);
        else if constexpr (std::is_same_v<T, DecisionTree>)
          return "decision_tree max_depth=" + std::to_string(s.max_depth) + " min_leaf=" + std::to_string(s.min_leaf);
        else if constexpr (std::is_same_v<T, RandomForest>)
          return "random_forest n_trees=" + std::to_string(s.n_trees) + " max_depth=" + std::to_string(s.max_depth) +
                 " min_leaf=" + std::to_string(s.min_leaf) + " features=" + feature_subset_name(s.features) +
                 " seed=" + std::to_string(s.seed);
        else
          return "logistic l2=" + f(s.l2) + " epochs=" + std::to_string(s.epochs) +
                 " learning_rate=" + f(s.learning_rate) + " seed=" + std::to_string(s.seed);
      },
      spec);
}

}  // namespace detail

inline PipelineSpec parse_pipeline_line(const std::string& line, int line_no = 0) {
  auto where = " (line " + std::to_string(line_no) + ")";
  std::istringstream in(line);
  std::vector<std::string> tok;
  for (std::string t; in >> t;) tok.push_back(t);
  require(tok.size() >= 4, ErrorCode::ParseError, "expected '<id> <name> <steps> <classifier> ...'" + where);

  PipelineSpec p;
  std::size_t pos = 0;
  try {
    p.id = std::stoi(tok[0], &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  require(pos == tok[0].size(), ErrorCode::ParseError, "bad pipeline id '" + tok[0] + "'" + where);
  p.name = tok[1];
  if (tok[2] != "-")
    for (const auto& s : detail::split(tok[2], ',')) p.steps.push_back(detail::parse_step(detail::trim(s), line_no));

  detail::KeyValues kv;
  kv.where = where;
  for (std::size_t i = 4; i < tok.size(); ++i) {
    auto eq = tok[i].find('=');
    require(eq != std::string::npos && eq > 0, ErrorCode::ParseError, "expected key=value, got '" + tok[i] + "'" + where);
    require(kv.values.emplace(tok[i].substr(0, eq), tok[i].substr(eq + 1)).second, ErrorCode::ParseError,
            "repeated key '" + tok[i].substr(0, eq) + "'" + where);
  }
  p.classifier = detail::parse_classifier(tok[3], kv);
  return p;
}

/// Canonical one-line form; parse_pipeline_line(format_pipeline_line(p)) == p.
inline std::string format_pipeline_line(const PipelineSpec& p) {
  std::string steps;
  for (const auto& s : p.steps) steps += (steps.empty() ? "" : ",") + detail::step_token(s);
  return std::to_string(p.id) + " " + p.name + " " + (steps.empty() ? "-" : steps) + " " +
         detail::classifier_tokens(p.classifier);
}

inline Portfolio parse_portfolio_text(std::string_view text) {
  Portfolio out;
  std::set<int> ids;
  std::istringstream in{std::string(text)};
  int line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    if (detail::trim(line).empty()) continue;
    auto p = parse_pipeline_line(line, line_no);
    require(ids.insert(p.id).second, ErrorCode::DuplicateId,
            "pipeline id " + std::to_string(p.id) + " repeated (line " + std::to_string(line_no) + ")");
    out.pipelines.push_back(std::move(p));
  }
  require(!out.pipelines.empty(), ErrorCode::EmptyPortfolio, "portfolio lists no pipelines");
  return out;
}

inline Portfolio parse_portfolio(const std::string& path) { return parse_portfolio_text(detail::read_file(path)); }

inline std::string portfolio_to_text(const Portfolio& p) {
  std::string out;
  for (const auto& s : p.pipelines) out += format_pipeline_line(s) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// fitting

enum class FitPartition { TrainOnly, TrainPlusValidation };

inline std::string partition_name(FitPartition t) {
  return t == FitPartition::TrainOnly ? "train_only" : "train_plus_validation";
}

struct FittedPipeline {
  int spec_id = 0;
  std::vector<FittedTransform> fitted_steps;
  FittedClassifier model;
  FitPartition fit_partition_tag = FitPartition::TrainOnly;
  std::vector<std::string> input_names;
  std::vector<FeatureKind> input_kinds;
  friend bool operator==(const FittedPipeline&, const FittedPipeline&) = default;
};

/// The classifier spec actually trained for `p` in a run seeded with
/// `run_seed`: stochastic learners get seed ^ run_seed ^ id.
inline ClassifierSpec effective_classifier(const PipelineSpec& p, std::uint64_t run_seed) {
  ClassifierSpec c = p.classifier;
  auto salt = mix_seed(run_seed, static_cast<std::uint64_t>(static_cast<std::int64_t>(p.id)));
  if (auto* rf = std::get_if<RandomForest>(&c)) rf->seed = mix_seed(rf->seed, salt);
  if (auto* lr = std::get_if<LogisticRegression>(&c)) lr->seed = mix_seed(lr->seed, salt);
  return c;
}

/// Errors from the chain or the learner are rethrown with the pipeline id
/// prefixed; the error code is kept.
inline FittedPipeline fit_pipeline(const PipelineSpec& spec, const Dataset& train, FitPartition tag,
                                   std::uint64_t run_seed = 0, const Deadline& deadline = Deadline::none(),
                                   unsigned threads = 1) {
  try {
    FittedPipeline out;
    out.spec_id = spec.id;
    out.fit_partition_tag = tag;
    out.input_names = detail::column_names(train.features);
    out.input_kinds = detail::column_kinds(train.features);
    auto chain = fit_transform_chain(spec.steps, train);
    deadline.check();
    out.fitted_steps = std::move(chain.steps);
    out.model = fit(effective_classifier(spec, run_seed), chain.output, train.labels, train.n_classes(), deadline, threads);
    return out;
  } catch (const Error& e) {
    throw Error(e.code(), "pipeline " + std::to_string(spec.id) + " (" + spec.name + "): " + e.detail());
  }
}

inline ProbabilityMatrix pipeline_predict_proba(const FittedPipeline& p, const FeatureFrame& f) {
  require(f.columns.size() == p.input_names.size(), ErrorCode::ArityMismatch,
          "pipeline " + std::to_string(p.spec_id) + " expects " + std::to_string(p.input_names.size()) +
              " columns, got " + std::to_string(f.columns.size()));
  for (std::size_t c = 0; c < f.columns.size(); ++c) {
    require(f.columns[c].name == p.input_names[c], ErrorCode::UnknownColumn,
            "column '" + f.columns[c].name + "' where '" + p.input_names[c] + "' was expected");
    require(f.columns[c].kind == p.input_kinds[c], ErrorCode::ArityMismatch,
            "column '" + f.columns[c].name + "' changed kind since fitting");
  }
  return predict_proba(p.model, apply_chain(p.fitted_steps, f));
}

inline ProbabilityMatrix pipeline_predict_proba(const FittedPipeline& p, const Dataset& d) {
  return pipeline_predict_proba(p, d.features);
}

}  // namespace autoen
