#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "autoen/dataset.hpp"
#include "autoen/error.hpp"
#include "autoen/metrics.hpp"
#include "autoen/pipeline.hpp"
#include "autoen/runtime.hpp"

namespace autoen {

struct EconomyConfig {
  double sample_fraction = 0.10;
  double per_pipeline_budget = 36.0;  // seconds
};

struct AutoEnConfig {
  std::size_t ensemble_size = 50;
  std::array<double, 3> fractions{0.6, 0.2, 0.2};
  std::optional<EconomyConfig> economy;
  /// Unset: roc_auc for two classes, log_loss otherwise.
  std::optional<Metric> metric;
  std::uint64_t seed = 0;
  bool best_prefix_mode = false;
  unsigned threads = 1;  // 0 = hardware concurrency

  void validate() const {
    require(ensemble_size >= 1, ErrorCode::InvalidArgument, "ensemble_size must be >= 1");
    if (economy) {
      require(economy->sample_fraction > 0.0 && economy->sample_fraction <= 1.0, ErrorCode::InvalidArgument,
              "economy sample_fraction must be in (0, 1]");
      require(economy->per_pipeline_budget > 0.0, ErrorCode::InvalidArgument, "economy budget must be > 0");
    }
  }
};

enum class FitPhase { Filter, Rank, Refit };

inline std::string phase_name(FitPhase p) {
  switch (p) {
    case FitPhase::Filter: return "filter";
    case FitPhase::Rank: return "rank";
    case FitPhase::Refit: return "refit";
  }
  return "?";
}

/// Announced right before a pipeline is fitted. `row_ids` are the training
/// rows, `eval_row_ids` the rows it will be scored on (empty for refits).
struct FitEvent {
  int spec_id = 0;
  FitPhase phase = FitPhase::Rank;
  std::span<const std::size_t> row_ids;
  std::span<const std::size_t> eval_row_ids;
};

/// Clock and instrumentation shared by one run.
struct RunContext {
  const Clock* clock = &system_clock();
  std::function<void(const FitEvent&)> on_fit;

  void announce(int id, FitPhase phase, const Dataset& train, const Dataset* eval = nullptr) const {
    if (!on_fit) return;
    std::span<const std::size_t> e;
    if (eval) e = eval->features.row_ids;
    on_fit(FitEvent{id, phase, train.features.row_ids, e});
  }
};

struct Diagnostic {
  int spec_id = 0;
  FitPhase phase = FitPhase::Rank;
  ErrorCode code = ErrorCode::PipelineFailed;
  std::string message;
};

struct RankedPipeline {
  int spec_id = 0;
  double validation_score = 0.0;
  std::size_t rank = 0;  // 1-based
};

struct Ranking {
  std::vector<RankedPipeline> ranked;
  std::map<int, ProbabilityMatrix> valid_probs;
  std::vector<Diagnostic> diagnostics;
};

/// Orders by score (best first), then by lower spec_id.
inline void sort_ranking(std::vector<RankedPipeline>& r, Metric metric) {
  std::sort(r.begin(), r.end(), [&](const RankedPipeline& a, const RankedPipeline& b) {
    if (a.validation_score != b.validation_score) return strictly_better(metric, a.validation_score, b.validation_score);
    return a.spec_id < b.spec_id;
  });
  for (std::size_t i = 0; i < r.size(); ++i) r[i].rank = i + 1;
}

/// Fits every pipeline on `train` alone and scores it on `valid`. Pipelines
/// that throw are dropped and reported in `diagnostics`.
inline Ranking rank_pipelines(const Portfolio& portfolio, const Dataset& train, const Dataset& valid, Metric metric,
                              std::uint64_t seed, unsigned threads = 1, const RunContext& ctx = {}) {
  const std::size_t n = portfolio.size();
  std::vector<std::optional<ProbabilityMatrix>> probs(n);
  std::vector<double> scores(n);
  std::vector<std::optional<Diagnostic>> errors(n);
  parallel_for(n, threads, [&](std::size_t i) {
    const auto& spec = portfolio.pipelines[i];
    try {
      ctx.announce(spec.id, FitPhase::Rank, train, &valid);
      auto fitted = fit_pipeline(spec, train, FitPartition::TrainOnly, seed);
      auto p = pipeline_predict_proba(fitted, valid);
      scores[i] = evaluate(metric, p, valid.labels);
      require(std::isfinite(scores[i]), ErrorCode::PipelineFailed, "non-finite validation score");
      probs[i] = std::move(p);
    } catch (const Error& e) {
      errors[i] = Diagnostic{spec.id, FitPhase::Rank, e.code(), e.what()};
    } catch (const std::exception& e) {
      errors[i] = Diagnostic{spec.id, FitPhase::Rank, ErrorCode::PipelineFailed, e.what()};
    }
  });
  Ranking out;
  for (std::size_t i = 0; i < n; ++i) {
    if (errors[i]) {
      out.diagnostics.push_back(*errors[i]);
      continue;
    }
    out.ranked.push_back({portfolio.pipelines[i].id, scores[i], 0});
    out.valid_probs.emplace(portfolio.pipelines[i].id, std::move(*probs[i]));
  }
  if (out.ranked.empty()) {
    std::string first = out.diagnostics.empty() ? "" : " first error: " + out.diagnostics.front().message;
    fail(ErrorCode::AllPipelinesFailed, "no pipeline could be fitted and scored;" + first);
  }
  sort_ranking(out.ranked, metric);
  return out;
}

// ---------------------------------------------------------------------------
// greedy selection

struct TraceStep {
  std::size_t step = 0;  // 1-based ensemble size after the addition
  int spec_id = 0;
  double validation_score = 0.0;
  double elapsed_seconds = 0.0;  // since the run started
};

struct Selection {
  std::vector<int> members;  // in selection order
  std::vector<TraceStep> trace;
  std::size_t chosen_size = 0;  // members.size(); shorter than the trace under best-prefix mode
};

namespace detail {

/// (running_sum + candidate) / t, the uniform average over t members.
inline Matrix mixture(const Matrix& running_sum, const Matrix& candidate, std::size_t t) {
  Matrix out(running_sum.rows(), running_sum.cols());
  const double inv = static_cast<double>(t);
  auto& o = out.values();
  const auto& s = running_sum.values();
  const auto& c = candidate.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = (s[i] + c[i]) / inv;
  return out;
}

}  // namespace detail

/// Forward selection with replacement. Step 1 takes the top-ranked pipeline;
/// each later step appends the candidate whose addition gives the best
/// uniform-average validation score, lower spec_id on ties.
inline Selection greedy_select(const std::vector<RankedPipeline>& ranked,
                               const std::map<int, ProbabilityMatrix>& valid_probs, std::span<const int> valid_labels,
                               Metric metric, std::size_t B, bool best_prefix_mode, unsigned threads = 1,
                               const Clock* clock = nullptr, double start_time = 0.0) {
  require(!ranked.empty(), ErrorCode::EmptyCandidateSet, "no candidates to select from");
  require(B >= 1, ErrorCode::InvalidArgument, "ensemble size must be >= 1");
  std::vector<int> ids;
  for (const auto& r : ranked) {
    require(valid_probs.count(r.spec_id) > 0, ErrorCode::EmptyCandidateSet,
            "no validation probabilities for pipeline " + std::to_string(r.spec_id));
    ids.push_back(r.spec_id);
  }
  std::sort(ids.begin(), ids.end());
  const Matrix& first = valid_probs.at(ranked.front().spec_id);
  for (int id : ids) {
    const auto& m = valid_probs.at(id);
    require(m.rows() == first.rows() && m.cols() == first.cols(), ErrorCode::ShapeMismatch,
            "validation probability matrices differ in shape");
  }
  auto elapsed = [&] { return clock ? clock->now() - start_time : 0.0; };

  Selection sel;
  Matrix sum(first.rows(), first.cols());
  sum = detail::mixture(sum, first, 1);
  sel.members.push_back(ranked.front().spec_id);
  sel.trace.push_back({1, ranked.front().spec_id, evaluate(metric, sum, valid_labels), elapsed()});

  std::vector<double> cand(ids.size());
  for (std::size_t t = 2; t <= B; ++t) {
    parallel_for(ids.size(), threads, [&](std::size_t i) {
      cand[i] = evaluate(metric, detail::mixture(sum, valid_probs.at(ids[i]), t), valid_labels);
    });
    std::size_t best = 0;
    for (std::size_t i = 1; i < ids.size(); ++i)
      if (strictly_better(metric, cand[i], cand[best])) best = i;
    const auto& add = valid_probs.at(ids[best]).values();
    for (std::size_t i = 0; i < add.size(); ++i) sum.values()[i] += add[i];
    sel.members.push_back(ids[best]);
    sel.trace.push_back({t, ids[best], cand[best], elapsed()});
  }

  sel.chosen_size = B;
  if (best_prefix_mode) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < sel.trace.size(); ++i)
      if (strictly_better(metric, sel.trace[i].validation_score, sel.trace[best].validation_score)) best = i;
    sel.chosen_size = best + 1;
    sel.members.resize(sel.chosen_size);
  }
  return sel;
}

// ---------------------------------------------------------------------------
// economy filter

struct FilterOutcome {
  int spec_id = 0;
  bool kept = false;
  double seconds = 0.0;
  std::string reason;  // empty when kept
};

struct FilterReport {
  Portfolio kept;
  std::vector<FilterOutcome> outcomes;  // portfolio order
  std::size_t sample_rows = 0;
};

namespace detail {

/// Adds unsampled rows of any class with fewer than `min_rows` sampled rows.
inline void top_up_classes(std::vector<std::size_t>& idx, std::span<const int> labels, std::size_t n_classes,
                           std::size_t min_rows) {
  std::vector<std::size_t> have(n_classes, 0);
  std::vector<bool> taken(labels.size(), false);
  for (auto i : idx) {
    ++have[static_cast<std::size_t>(labels[i])];
    taken[i] = true;
  }
  for (std::size_t r = 0; r < labels.size(); ++r) {
    auto c = static_cast<std::size_t>(labels[r]);
    if (!taken[r] && have[c] < min_rows) {
      idx.push_back(r);
      ++have[c];
    }
  }
}

}  // namespace detail

/// Keeps the pipelines that can be fitted and scored on a stratified
/// subsample of `train` within the per-pipeline wall-clock budget.
/// Order is preserved. Throws AllPipelinesFiltered if nothing survives.
inline FilterReport economy_filter(const Portfolio& portfolio, const Dataset& train, const AutoEnConfig& cfg,
                                   const RunContext& ctx = {}) {
  require(cfg.economy.has_value(), ErrorCode::InvalidArgument, "economy_filter needs an economy config");
  cfg.validate();
  const auto& eco = *cfg.economy;
  const Metric metric = cfg.metric.value_or(default_metric(train.n_classes()));
  const std::size_t C = train.n_classes();

  auto idx = subsample_indices(train.labels, C, eco.sample_fraction, mix_seed(cfg.seed, 0x9e3779b97f4a7c15ULL));
  detail::top_up_classes(idx, train.labels, C, 2);
  Dataset sample = select_rows(train, idx);
  const std::array<double, 2> fr{0.75, 0.25};
  auto parts = stratified_partition(sample.labels, C, fr, mix_seed(cfg.seed, 0x51ed270b27ULL), true);
  Dataset sub_train = select_rows(sample, parts[0]);
  Dataset sub_valid = select_rows(sample, parts[1]);

  const Clock& clock = *ctx.clock;
  FilterReport report;
  report.sample_rows = sample.n_rows();
  report.outcomes.resize(portfolio.size());
  parallel_for(portfolio.size(), cfg.threads, [&](std::size_t i) {
    const auto& spec = portfolio.pipelines[i];
    auto& out = report.outcomes[i];
    out.spec_id = spec.id;
    const double start = clock.now();
    try {
      ctx.announce(spec.id, FitPhase::Filter, sub_train, &sub_valid);
      auto deadline = Deadline::after(clock, eco.per_pipeline_budget);
      auto fitted = fit_pipeline(spec, sub_train, FitPartition::TrainOnly, cfg.seed, deadline);
      deadline.check();
      auto p = pipeline_predict_proba(fitted, sub_valid);
      (void)evaluate(metric, p, sub_valid.labels);
      out.seconds = clock.now() - start;
      out.kept = out.seconds <= eco.per_pipeline_budget;
      if (!out.kept) out.reason = "BudgetExceeded: fit and score took " + detail::format_double(out.seconds) + " s";
    } catch (const Error& e) {
      out.seconds = clock.now() - start;
      out.reason = e.what();
    } catch (const std::exception& e) {
      out.seconds = clock.now() - start;
      out.reason = e.what();
    }
  });
  for (std::size_t i = 0; i < portfolio.size(); ++i)
    if (report.outcomes[i].kept) report.kept.pipelines.push_back(portfolio.pipelines[i]);
  require(!report.kept.pipelines.empty(), ErrorCode::AllPipelinesFiltered,
          "every pipeline failed or exceeded the economy budget");
  return report;
}

// ---------------------------------------------------------------------------
// end to end

struct EnsembleModel {
  std::vector<int> members;  // multiset, selection order
  std::map<int, FittedPipeline> unique_fitted;
  std::vector<TraceStep> trace;
  std::vector<std::string> class_names;
  Metric metric = Metric::LogLoss;
  double total_seconds = 0.0;
  std::vector<Diagnostic> diagnostics;
  std::vector<std::string> warnings;
  std::vector<FilterOutcome> filter_outcomes;

  std::map<int, std::size_t> multiplicities() const {
    std::map<int, std::size_t> m;
    for (int id : members) ++m[id];
    return m;
  }
};

/// Runs filter (if configured), ranking, greedy selection and the refit of
/// each distinct member on train+valid. The caller owns the split.
inline EnsembleModel autoen_fit_split(const Dataset& train, const Dataset& valid, const Portfolio& portfolio,
                                      const AutoEnConfig& cfg, const RunContext& ctx = {}) {
  cfg.validate();
  require(train.class_names == valid.class_names, ErrorCode::ShapeMismatch, "train and valid disagree on classes");
  require(!portfolio.pipelines.empty(), ErrorCode::EmptyPortfolio, "portfolio lists no pipelines");
  const Clock& clock = *ctx.clock;
  const double start = clock.now();

  EnsembleModel model;
  model.class_names = train.class_names;
  model.metric = cfg.metric.value_or(default_metric(train.n_classes()));

  const Portfolio* candidates = &portfolio;
  FilterReport filtered;
  if (cfg.economy) {
    try {
      filtered = economy_filter(portfolio, train, cfg, ctx);
      candidates = &filtered.kept;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::AllPipelinesFiltered) throw;
      model.warnings.push_back("economy filter removed every pipeline; using the full portfolio");
    }
    model.filter_outcomes = filtered.outcomes;
  }

  auto ranking = rank_pipelines(*candidates, train, valid, model.metric, cfg.seed, cfg.threads, ctx);
  model.diagnostics = ranking.diagnostics;
  auto sel = greedy_select(ranking.ranked, ranking.valid_probs, valid.labels, model.metric, cfg.ensemble_size,
                           cfg.best_prefix_mode, cfg.threads, &clock, start);
  model.members = sel.members;
  model.trace = sel.trace;

  Dataset combined = concat_rows(train, valid);
  std::vector<int> unique(model.members.begin(), model.members.end());
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
  std::vector<FittedPipeline> refits(unique.size());
  parallel_for(unique.size(), cfg.threads, [&](std::size_t i) {
    const auto& spec = *candidates->find(unique[i]);
    ctx.announce(spec.id, FitPhase::Refit, combined);
    refits[i] = fit_pipeline(spec, combined, FitPartition::TrainPlusValidation, cfg.seed);
  });
  for (auto& f : refits) model.unique_fitted.emplace(f.spec_id, std::move(f));
  model.total_seconds = clock.now() - start;
  return model;
}

/// Multiplicity-weighted mean of the distinct members' probabilities.
inline ProbabilityMatrix ensemble_predict(const EnsembleModel& m, const FeatureFrame& f) {
  require(!m.members.empty(), ErrorCode::InvalidArgument, "ensemble has no members");
  ProbabilityMatrix out;
  for (const auto& [id, count] : m.multiplicities()) {
    auto it = m.unique_fitted.find(id);
    require(it != m.unique_fitted.end(), ErrorCode::InvalidArgument, "member " + std::to_string(id) + " not fitted");
    auto p = pipeline_predict_proba(it->second, f);
    if (out.empty()) out = Matrix(p.rows(), p.cols());
    const double w = static_cast<double>(count);
    for (std::size_t i = 0; i < p.values().size(); ++i) out.values()[i] += w * p.values()[i];
  }
  const double total = static_cast<double>(m.members.size());
  for (double& v : out.values()) v /= total;
  normalize_rows(out, 1e-12);
  return out;
}

inline ProbabilityMatrix ensemble_predict(const EnsembleModel& m, const Dataset& d) {
  return ensemble_predict(m, d.features);
}

struct AutoEnResult {
  EnsembleModel model;
  HoldoutSplit split;
  double test_score = 0.0;
};

/// Stratified train/valid/test split, autoen_fit_split, then a score on the
/// untouched test part.
inline AutoEnResult autoen_fit(const Dataset& d, const Portfolio& portfolio, const AutoEnConfig& cfg,
                               const RunContext& ctx = {}) {
  cfg.validate();
  validate(d);
  AutoEnResult r;
  r.split = stratified_holdout(d, cfg.fractions, cfg.seed);
  Dataset train = select_rows(d, r.split.train_idx);
  Dataset valid = select_rows(d, r.split.valid_idx);
  Dataset test = select_rows(d, r.split.test_idx);
  r.model = autoen_fit_split(train, valid, portfolio, cfg, ctx);
  r.test_score = evaluate(r.model.metric, ensemble_predict(r.model, test), test.labels);
  return r;
}

/// step,spec_id,validation_score,elapsed_seconds
inline std::string trace_csv(const EnsembleModel& m) {
  std::string out = "step,spec_id,validation_score,elapsed_seconds\n";
  for (const auto& t : m.trace)
    out += std::to_string(t.step) + "," + std::to_string(t.spec_id) + "," + detail::format_double(t.validation_score) +
           "," + detail::format_double(t.elapsed_seconds) + "\n";
  return out;
}

}  // namespace autoen
