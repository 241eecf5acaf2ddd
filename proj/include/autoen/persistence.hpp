#pragma once

#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include <json.hpp>

#include "autoen/dataset.hpp"
#include "autoen/ensemble.hpp"
#include "autoen/error.hpp"
#include "autoen/learners.hpp"
#include "autoen/pipeline.hpp"
#include "autoen/preprocess.hpp"

namespace autoen {

inline constexpr const char* kModelFormat = "autoen-ensemble";
inline constexpr int kModelVersion = 1;

/// A fitted ensemble plus the schema needed to read new data for it.
struct ModelArchive {
  EnsembleModel model;
  Schema schema;
};

namespace detail {

using json = nlohmann::json;

inline json to_json(const Matrix& m) { return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.values()}}; }

inline Matrix matrix_from_json(const json& j) {
  Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
  auto data = j.at("data").get<std::vector<double>>();
  require(data.size() == m.values().size(), ErrorCode::ParseError, "matrix data length mismatch");
  m.values() = std::move(data);
  return m;
}

inline json to_json(const TransformStep& s) {
  return {{"kind", static_cast<int>(s.kind)}, {"threshold", s.threshold}, {"degree", s.degree}};
}

inline TransformStep step_from_json(const json& j) {
  TransformStep s;
  int k = j.at("kind").get<int>();
  require(k >= 0 && k <= static_cast<int>(TransformStep::Kind::PolynomialExpand), ErrorCode::ParseError,
          "unknown transform kind " + std::to_string(k));
  s.kind = static_cast<TransformStep::Kind>(k);
  s.threshold = j.at("threshold").get<double>();
  s.degree = j.at("degree").get<int>();
  return s;
}

inline std::vector<std::string> kinds_to_strings(const std::vector<FeatureKind>& kinds) {
  std::vector<std::string> out;
  for (auto k : kinds) out.emplace_back(kind_name(k));
  return out;
}

inline std::vector<FeatureKind> kinds_from_json(const json& j) {
  std::vector<FeatureKind> out;
  for (const auto& s : j.get<std::vector<std::string>>()) {
    require(s == "numeric" || s == "categorical", ErrorCode::ParseError, "bad column kind '" + s + "'");
    out.push_back(s == "numeric" ? FeatureKind::Numeric : FeatureKind::Categorical);
  }
  return out;
}

inline json to_json(const FittedTransform& t) {
  std::vector<bool> keep(t.keep.begin(), t.keep.end());
  return {{"step", to_json(t.step)},
          {"input_names", t.input_names},
          {"input_kinds", kinds_to_strings(t.input_kinds)},
          {"input_arity", t.input_arity},
          {"output_arity", t.output_arity},
          {"fill_numbers", t.fill_numbers},
          {"fill_symbols", t.fill_symbols},
          {"vocabularies", t.vocabularies},
          {"offset", t.offset},
          {"scale", t.scale},
          {"keep", keep}};
}

inline FittedTransform transform_from_json(const json& j) {
  FittedTransform t;
  t.step = step_from_json(j.at("step"));
  t.input_names = j.at("input_names").get<std::vector<std::string>>();
  t.input_kinds = kinds_from_json(j.at("input_kinds"));
  t.input_arity = j.at("input_arity").get<std::size_t>();
  t.output_arity = j.at("output_arity").get<std::size_t>();
  t.fill_numbers = j.at("fill_numbers").get<std::vector<double>>();
  t.fill_symbols = j.at("fill_symbols").get<std::vector<std::string>>();
  t.vocabularies = j.at("vocabularies").get<std::vector<std::vector<std::string>>>();
  t.offset = j.at("offset").get<std::vector<double>>();
  t.scale = j.at("scale").get<std::vector<double>>();
  t.keep = j.at("keep").get<std::vector<bool>>();
  return t;
}

inline json to_json(const ClassifierSpec& spec) {
  json j = {{"family", family_name(spec)}};
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, KNearestNeighbors>) {
          j["k"] = s.k;
          j["alpha"] = s.alpha;
        } else if constexpr (std::is_same_v<T, GaussianNaiveBayes>) {
          j["var_smoothing"] = s.var_smoothing;
        } else if constexpr (std::is_same_v<T, DecisionTree>) {
          j["max_depth"] = s.max_depth;
          j["min_leaf"] = s.min_leaf;
        } else if constexpr (std::is_same_v<T, RandomForest>) {
          j["n_trees"] = s.n_trees;
          j["max_depth"] = s.max_depth;
          j["min_leaf"] = s.min_leaf;
          j["features"] = static_cast<int>(s.features);
          j["seed"] = s.seed;
        } else {
          j["l2"] = s.l2;
          j["epochs"] = s.epochs;
          j["learning_rate"] = s.learning_rate;
          j["seed"] = s.seed;
        }
      },
      spec);
  return j;
}

inline ClassifierSpec classifier_from_json(const json& j) {
  auto f = j.at("family").get<std::string>();
  if (f == "knn") return KNearestNeighbors{j.at("k").get<int>(), j.at("alpha").get<double>()};
  if (f == "gaussian_nb") return GaussianNaiveBayes{j.at("var_smoothing").get<double>()};
  if (f == "decision_tree") return DecisionTree{j.at("max_depth").get<int>(), j.at("min_leaf").get<int>()};
  if (f == "random_forest") {
    int feat = j.at("features").get<int>();
    require(feat >= 0 && feat <= 2, ErrorCode::ParseError, "bad forest feature rule");
    return RandomForest{j.at("n_trees").get<int>(), j.at("max_depth").get<int>(), j.at("min_leaf").get<int>(),
                        static_cast<FeatureSubset>(feat), j.at("seed").get<std::uint64_t>()};
  }
  if (f == "logistic")
    return LogisticRegression{j.at("l2").get<double>(), j.at("epochs").get<int>(), j.at("learning_rate").get<double>(),
                              j.at("seed").get<std::uint64_t>()};
  fail(ErrorCode::UnknownClassifier, "unknown classifier family '" + f + "'");
}

inline json to_json(const TreeModel& t) {
  std::vector<int> feature, left, right;
  std::vector<double> threshold;
  std::vector<std::vector<double>> proba;
  for (const auto& n : t.nodes) {
    feature.push_back(n.feature);
    threshold.push_back(n.threshold);
    left.push_back(n.left);
    right.push_back(n.right);
    proba.push_back(n.proba);
  }
  return {{"feature", feature}, {"threshold", threshold}, {"left", left}, {"right", right}, {"proba", proba}};
}

inline TreeModel tree_from_json(const json& j) {
  auto feature = j.at("feature").get<std::vector<int>>();
  auto threshold = j.at("threshold").get<std::vector<double>>();
  auto left = j.at("left").get<std::vector<int>>();
  auto right = j.at("right").get<std::vector<int>>();
  auto proba = j.at("proba").get<std::vector<std::vector<double>>>();
  const auto n = feature.size();
  require(threshold.size() == n && left.size() == n && right.size() == n && proba.size() == n, ErrorCode::ParseError,
          "tree arrays differ in length");
  TreeModel t;
  for (std::size_t i = 0; i < n; ++i) {
    require(feature[i] < 0 || (left[i] >= 0 && right[i] >= 0 && static_cast<std::size_t>(left[i]) < n &&
                               static_cast<std::size_t>(right[i]) < n),
            ErrorCode::ParseError, "tree child index out of range");
    t.nodes.push_back(TreeNode{feature[i], threshold[i], left[i], right[i], std::move(proba[i])});
  }
  return t;
}

inline json to_json(const LearnedState& state) {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, KnnModel>) return {{"X", to_json(s.X)}, {"y", s.y}};
        else if constexpr (std::is_same_v<T, GaussianNbModel>)
          return {{"means", to_json(s.means)}, {"variances", to_json(s.variances)}, {"log_prior", s.log_prior}};
        else if constexpr (std::is_same_v<T, TreeModel>) return to_json(s);
        else if constexpr (std::is_same_v<T, ForestModel>) {
          json trees = json::array();
          for (const auto& t : s.trees) trees.push_back(to_json(t));
          return {{"trees", trees}};
        } else
          return {{"weights", to_json(s.weights)}, {"loss_history", s.loss_history}};
      },
      state);
}

inline LearnedState state_from_json(const ClassifierSpec& spec, const json& j) {
  return std::visit(
      [&](const auto& s) -> LearnedState {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, KNearestNeighbors>)
          return KnnModel{matrix_from_json(j.at("X")), j.at("y").get<std::vector<int>>()};
        else if constexpr (std::is_same_v<T, GaussianNaiveBayes>)
          return GaussianNbModel{matrix_from_json(j.at("means")), matrix_from_json(j.at("variances")),
                                 j.at("log_prior").get<std::vector<double>>()};
        else if constexpr (std::is_same_v<T, DecisionTree>) return tree_from_json(j);
        else if constexpr (std::is_same_v<T, RandomForest>) {
          ForestModel f;
          for (const auto& t : j.at("trees")) f.trees.push_back(tree_from_json(t));
          return f;
        } else
          return LogisticModel{matrix_from_json(j.at("weights")), j.at("loss_history").get<std::vector<double>>()};
      },
      spec);
}

inline json to_json(const FittedPipeline& p) {
  json steps = json::array();
  for (const auto& t : p.fitted_steps) steps.push_back(to_json(t));
  return {{"spec_id", p.spec_id},
          {"fit_partition", partition_name(p.fit_partition_tag)},
          {"input_names", p.input_names},
          {"input_kinds", kinds_to_strings(p.input_kinds)},
          {"steps", steps},
          {"classifier", to_json(p.model.spec)},
          {"n_classes", p.model.n_classes},
          {"n_features", p.model.n_features},
          {"state", to_json(p.model.state)}};
}

inline FittedPipeline pipeline_from_json(const json& j) {
  FittedPipeline p;
  p.spec_id = j.at("spec_id").get<int>();
  auto tag = j.at("fit_partition").get<std::string>();
  require(tag == "train_only" || tag == "train_plus_validation", ErrorCode::ParseError, "bad fit partition tag");
  p.fit_partition_tag = tag == "train_only" ? FitPartition::TrainOnly : FitPartition::TrainPlusValidation;
  p.input_names = j.at("input_names").get<std::vector<std::string>>();
  p.input_kinds = kinds_from_json(j.at("input_kinds"));
  for (const auto& t : j.at("steps")) p.fitted_steps.push_back(transform_from_json(t));
  p.model.spec = classifier_from_json(j.at("classifier"));
  p.model.n_classes = j.at("n_classes").get<std::size_t>();
  p.model.n_features = j.at("n_features").get<std::size_t>();
  p.model.state = state_from_json(p.model.spec, j.at("state"));
  return p;
}

inline json schema_to_json(const Schema& s) {
  json j = {{"label", s.label}, {"categorical", s.categorical}, {"missing", s.missing}, {"class_names", s.class_names}};
  if (s.numeric) j["numeric"] = *s.numeric;
  return j;
}

inline Schema schema_from_json(const json& j) {
  Schema s;
  s.label = j.at("label").get<std::string>();
  s.categorical = j.at("categorical").get<std::vector<std::string>>();
  s.missing = j.at("missing").get<std::string>();
  s.class_names = j.at("class_names").get<std::vector<std::string>>();
  if (j.contains("numeric")) s.numeric = j.at("numeric").get<std::vector<std::string>>();
  return s;
}

}  // namespace detail

inline std::string model_to_json(const ModelArchive& a) {
  using detail::json;
  const auto& m = a.model;
  json trace = json::array();
  for (const auto& t : m.trace)
    trace.push_back({{"step", t.step}, {"spec_id", t.spec_id}, {"score", t.validation_score}, {"elapsed", t.elapsed_seconds}});
  json fitted = json::array();
  for (const auto& [id, p] : m.unique_fitted) fitted.push_back(detail::to_json(p));
  json j = {{"format", kModelFormat},
            {"version", kModelVersion},
            {"class_names", m.class_names},
            {"metric", metric_name(m.metric)},
            {"members", m.members},
            {"trace", trace},
            {"total_seconds", m.total_seconds},
            {"schema", detail::schema_to_json(a.schema)},
            {"pipelines", fitted}};
  return j.dump();
}

inline ModelArchive model_from_json(std::string_view text) {
  using detail::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    require(j.is_object() && j.value("format", "") == kModelFormat, ErrorCode::FormatVersion, "not an autoen model file");
    require(j.at("version").get<int>() == kModelVersion, ErrorCode::FormatVersion,
            "unsupported model version " + j.at("version").dump());
    ModelArchive a;
    auto& m = a.model;
    m.class_names = j.at("class_names").get<std::vector<std::string>>();
    m.metric = parse_metric(j.at("metric").get<std::string>());
    m.members = j.at("members").get<std::vector<int>>();
    for (const auto& t : j.at("trace"))
      m.trace.push_back({t.at("step").get<std::size_t>(), t.at("spec_id").get<int>(), t.at("score").get<double>(),
                         t.at("elapsed").get<double>()});
    m.total_seconds = j.at("total_seconds").get<double>();
    a.schema = detail::schema_from_json(j.at("schema"));
    for (const auto& p : j.at("pipelines")) {
      auto fp = detail::pipeline_from_json(p);
      int id = fp.spec_id;
      require(m.unique_fitted.emplace(id, std::move(fp)).second, ErrorCode::DuplicateId,
              "pipeline " + std::to_string(id) + " stored twice");
    }
    for (int id : m.members)
      require(m.unique_fitted.count(id) > 0, ErrorCode::ParseError, "member " + std::to_string(id) + " has no fitted pipeline");
    return a;
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, std::string("malformed model file: ") + e.what());
  }
}

inline void save_model(const std::string& path, const ModelArchive& a) { detail::write_file(path, model_to_json(a)); }

inline ModelArchive load_model(const std::string& path) { return model_from_json(detail::read_file(path)); }

}  // namespace autoen
