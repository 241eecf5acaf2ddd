#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace autoen;

namespace {

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::InvalidArgument;
}

/// One pipeline per learner family and per step kind.
const char* kEveryKind =
    "1 knn impute,onehot,standard knn k=3 alpha=0.5\n"
    "2 gnb impute,onehot,minmax gaussian_nb var_smoothing=1e-6\n"
    "3 tree impute,onehot,variance:0.01 decision_tree max_depth=4 min_leaf=2\n"
    "4 rf impute,onehot random_forest n_trees=6 features=log2 seed=9\n"
    "5 logreg impute,onehot,poly2,standard logistic l2=0.01 epochs=40 learning_rate=0.5\n";

}  // namespace

TEST(Persistence, RoundTripReproducesPredictions) {
  auto d = autoen::testing::blobs(240, 3, 3, 41);
  auto portfolio = parse_portfolio_text(kEveryKind);
  AutoEnConfig cfg;
  cfg.ensemble_size = 10;
  cfg.seed = 2;
  auto r = autoen_fit(d, portfolio, cfg);
  // Force every family into the archive regardless of what selection chose.
  auto split = r.split;
  auto rest = concat_rows(select_rows(d, split.train_idx), select_rows(d, split.valid_idx));
  for (const auto& spec : portfolio.pipelines)
    r.model.unique_fitted.try_emplace(spec.id, fit_pipeline(spec, rest, FitPartition::TrainPlusValidation, cfg.seed));

  auto schema = schema_of(d, "label", "?");
  auto path = (autoen::testing::scratch_dir("persist") / "model.json").string();
  save_model(path, ModelArchive{r.model, schema});
  auto back = load_model(path);

  EXPECT_EQ(back.model.members, r.model.members);
  EXPECT_EQ(back.model.class_names, r.model.class_names);
  EXPECT_EQ(back.model.metric, r.model.metric);
  EXPECT_EQ(back.model.unique_fitted, r.model.unique_fitted);
  ASSERT_EQ(back.model.trace.size(), r.model.trace.size());
  for (std::size_t i = 0; i < r.model.trace.size(); ++i)
    EXPECT_EQ(back.model.trace[i].validation_score, r.model.trace[i].validation_score);
  EXPECT_EQ(back.schema.label, "label");
  EXPECT_EQ(back.schema.categorical, schema.categorical);

  auto probe = autoen::testing::blobs(60, 3, 3, 42, 3.0, 0.1);
  EXPECT_EQ(ensemble_predict(back.model, probe).values(), ensemble_predict(r.model, probe).values());
  for (const auto& [id, fp] : r.model.unique_fitted)
    EXPECT_EQ(pipeline_predict_proba(back.model.unique_fitted.at(id), probe).values(),
              pipeline_predict_proba(fp, probe).values());
}

TEST(Persistence, RejectsForeignOrNewerFiles) {
  EXPECT_EQ(code_of([] { model_from_json("not json"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { model_from_json(R"({"format": "other", "version": 1})"); }), ErrorCode::FormatVersion);
  EXPECT_EQ(code_of([] { model_from_json(R"({"format": "autoen-ensemble", "version": 99})"); }), ErrorCode::FormatVersion);
  EXPECT_EQ(code_of([] { model_from_json(R"({"format": "autoen-ensemble", "version": 1})"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { load_model("/nonexistent/model.json"); }), ErrorCode::IoError);
}
