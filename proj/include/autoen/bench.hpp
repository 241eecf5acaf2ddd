#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "autoen/dataset.hpp"
#include "autoen/ensemble.hpp"
#include "autoen/error.hpp"
#include "autoen/metrics.hpp"
#include "autoen/pipeline.hpp"
#include "autoen/stats.hpp"

namespace autoen {

enum class MethodKind { AutoEn, AutoEnEconomy, ConstantPrior, RandomForestUntuned, RandomForestTuned };

inline std::string method_kind_name(MethodKind k) {
  switch (k) {
    case MethodKind::AutoEn: return "autoen";
    case MethodKind::AutoEnEconomy: return "autoen_economy";
    case MethodKind::ConstantPrior: return "constant_prior";
    case MethodKind::RandomForestUntuned: return "rf_untuned";
    case MethodKind::RandomForestTuned: return "rf_tuned";
  }
  return "?";
}

inline MethodKind parse_method_kind(const std::string& s) {
  for (auto k : {MethodKind::AutoEn, MethodKind::AutoEnEconomy, MethodKind::ConstantPrior,
                 MethodKind::RandomForestUntuned, MethodKind::RandomForestTuned})
    if (method_kind_name(k) == s) return k;
  fail(ErrorCode::InvalidArgument, "unknown method kind '" + s + "'");
}

struct MethodConfig {
  std::string name;
  MethodKind kind = MethodKind::AutoEn;
  AutoEnConfig autoen;   // AutoEn / AutoEnEconomy
  int n_trees = 200;     // RandomForestTuned
};

struct DatasetEntry {
  std::string name;
  std::string data_path;
  std::string schema_path;
};

struct BenchmarkConfig {
  std::vector<DatasetEntry> datasets;
  std::vector<MethodConfig> methods;
  std::string portfolio_path;
  std::size_t k = 10;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::string output_dir = "bench_out";
  /// Holm control; defaults to the best-ranked method.
  std::optional<std::string> control;

  void validate() const {
    require(!datasets.empty(), ErrorCode::InvalidArgument, "benchmark lists no datasets");
    require(!methods.empty(), ErrorCode::InvalidArgument, "benchmark lists no methods");
    require(k >= 2, ErrorCode::KTooLarge, "k must be at least 2");
    std::set<std::string> names;
    for (const auto& m : methods) require(names.insert(m.name).second, ErrorCode::DuplicateId, "method '" + m.name + "' repeated");
    names.clear();
    for (const auto& d : datasets) require(names.insert(d.name).second, ErrorCode::DuplicateId, "dataset '" + d.name + "' repeated");
  }
};

/// Paths inside the config resolve against `base_dir` when relative.
///
///   {"datasets": [{"name": "car", "data": "car.csv", "schema": "car.schema"}],
///    "portfolio": "default.portfolio", "k": 10, "seed": 0, "threads": 1,
///    "output_dir": "out", "control": "AutoEn",
///    "methods": [{"name": "AutoEn", "kind": "autoen", "ensemble_size": 50},
///                {"name": "AutoEn_ec", "kind": "autoen_economy", "sample_fraction": 0.1, "budget_seconds": 36},
///                {"name": "ConstPrd", "kind": "constant_prior"},
///                {"name": "RF", "kind": "rf_untuned"},
///                {"name": "tuned_RF", "kind": "rf_tuned", "n_trees": 200}]}
inline BenchmarkConfig parse_benchmark_config(std::string_view text, const std::string& base_dir = "") {
  using json = nlohmann::json;
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return (path.is_relative() && !base_dir.empty()) ? (std::filesystem::path(base_dir) / path).string() : p;
  };
  BenchmarkConfig cfg;
  try {
    auto j = json::parse(text);
    for (const auto& d : j.at("datasets"))
      cfg.datasets.push_back({d.at("name").get<std::string>(), resolve(d.at("data").get<std::string>()),
                              resolve(d.at("schema").get<std::string>())});
    cfg.portfolio_path = resolve(j.value("portfolio", std::string("portfolios/default.portfolio")));
    cfg.k = j.value("k", std::size_t{10});
    cfg.seed = j.value("seed", std::uint64_t{0});
    cfg.threads = j.value("threads", 1u);
    cfg.output_dir = resolve(j.value("output_dir", std::string("bench_out")));
    if (j.contains("control")) cfg.control = j.at("control").get<std::string>();
    for (const auto& m : j.at("methods")) {
      MethodConfig mc;
      mc.name = m.at("name").get<std::string>();
      mc.kind = parse_method_kind(m.at("kind").get<std::string>());
      mc.autoen.ensemble_size = m.value("ensemble_size", std::size_t{50});
      mc.autoen.best_prefix_mode = m.value("best_prefix_mode", false);
      if (m.contains("metric")) mc.autoen.metric = parse_metric(m.at("metric").get<std::string>());
      if (mc.kind == MethodKind::AutoEnEconomy)
        mc.autoen.economy = EconomyConfig{m.value("sample_fraction", 0.10), m.value("budget_seconds", 36.0)};
      mc.n_trees = m.value("n_trees", 200);
      cfg.methods.push_back(std::move(mc));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, std::string("bad benchmark config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

inline BenchmarkConfig load_benchmark_config(const std::string& path) {
  auto base = std::filesystem::path(path).parent_path().string();
  return parse_benchmark_config(detail::read_file(path), base);
}

// ---------------------------------------------------------------------------
// baselines

/// Training-set class frequencies.
inline std::vector<double> class_prior(std::span<const int> labels, std::size_t n_classes) {
  require(!labels.empty(), ErrorCode::InvalidArgument, "class prior of an empty label set");
  auto counts = class_counts(labels, n_classes);
  std::vector<double> p(n_classes);
  for (std::size_t c = 0; c < n_classes; ++c) p[c] = static_cast<double>(counts[c]) / static_cast<double>(labels.size());
  return p;
}

inline ProbabilityMatrix constant_prior_predict(std::span<const double> prior, std::size_t rows) {
  ProbabilityMatrix out(rows, prior.size());
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < prior.size(); ++c) out(r, c) = prior[c];
  return out;
}

/// Random forest behind the minimal impute + one-hot chain.
inline PipelineSpec forest_baseline(int n_trees) {
  RandomForest rf;
  rf.n_trees = n_trees;
  return PipelineSpec{0, "rf_" + std::to_string(n_trees), {TransformStep::impute(), TransformStep::one_hot()}, rf};
}

// ---------------------------------------------------------------------------
// campaign

struct FoldResult {
  std::string dataset;
  std::string method;
  std::size_t fold_index = 0;
  Metric metric = Metric::LogLoss;
  std::optional<double> score;  // unset when the cell failed
  double wall_seconds = 0.0;
  std::string error;
};

struct MetricGroup {
  Metric metric = Metric::LogLoss;
  ScoreTable table;  // complete methods only
  std::vector<std::string> incomplete_methods;
};

struct BenchmarkResult {
  std::vector<FoldResult> folds;
  std::vector<MetricGroup> groups;  // one per metric present, roc_auc first
  std::vector<std::string> gaps;    // "dataset/method/fold: error"
  std::vector<std::string> warnings;
};

/// Instrumentation for a campaign. `on_fit` sees every fit any method makes;
/// `on_test` sees the rows each method is finally scored on.
struct BenchContext {
  const Clock* clock = &system_clock();
  std::function<void(const std::string& dataset, const std::string& method, std::size_t fold, const FitEvent&)> on_fit;
  std::function<void(const std::string& dataset, const std::string& method, std::size_t fold,
                     std::span<const std::size_t> test_rows)>
      on_test;
};

namespace detail {

inline std::optional<Portfolio> load_portfolio_if_needed(const BenchmarkConfig& cfg) {
  for (const auto& m : cfg.methods)
    if (m.kind == MethodKind::AutoEn || m.kind == MethodKind::AutoEnEconomy) return parse_portfolio(cfg.portfolio_path);
  return std::nullopt;
}

/// Fits `method` on the non-test rows of one fold and scores it on the fold.
/// The clock window covers the train/validation split through the final
/// test prediction.
inline FoldResult run_cell(const BenchmarkConfig& cfg, const MethodConfig& method, const std::string& dataset_name,
                           const Dataset& d, const FoldPlan& plan, std::size_t fold, const Portfolio* portfolio,
                           const BenchContext& bctx) {
  FoldResult r;
  r.dataset = dataset_name;
  r.method = method.name;
  r.fold_index = fold;
  r.metric = method.autoen.metric.value_or(default_metric(d.n_classes()));
  const Clock& clock = *bctx.clock;
  const double start = clock.now();
  try {
    Dataset test = select_rows(d, plan.folds[fold]);
    auto rest_idx = plan.complement(fold);
    Dataset rest = select_rows(d, rest_idx);
    const std::uint64_t fold_seed = mix_seed(cfg.seed, 0x100 + fold);
    const std::array<double, 2> fr{0.75, 0.25};
    auto parts = stratified_partition(rest.labels, rest.n_classes(), fr, fold_seed, true);
    Dataset train = select_rows(rest, parts[0]);
    Dataset valid = select_rows(rest, parts[1]);

    RunContext ctx;
    ctx.clock = bctx.clock;
    if (bctx.on_fit)
      ctx.on_fit = [&](const FitEvent& e) { bctx.on_fit(dataset_name, method.name, fold, e); };

    ProbabilityMatrix probs;
    switch (method.kind) {
      case MethodKind::AutoEn:
      case MethodKind::AutoEnEconomy: {
        AutoEnConfig ac = method.autoen;
        ac.seed = fold_seed;
        ac.threads = 1;
        auto model = autoen_fit_split(train, valid, *portfolio, ac, ctx);
        probs = ensemble_predict(model, test);
        break;
      }
      case MethodKind::ConstantPrior: {
        Dataset all = concat_rows(train, valid);
        ctx.announce(0, FitPhase::Refit, all);
        probs = constant_prior_predict(class_prior(all.labels, all.n_classes()), test.n_rows());
        break;
      }
      case MethodKind::RandomForestUntuned:
      case MethodKind::RandomForestTuned: {
        Dataset all = concat_rows(train, valid);
        auto spec = forest_baseline(method.kind == MethodKind::RandomForestTuned ? method.n_trees : RandomForest{}.n_trees);
        ctx.announce(spec.id, FitPhase::Refit, all);
        auto fitted = fit_pipeline(spec, all, FitPartition::TrainPlusValidation, fold_seed);
        probs = pipeline_predict_proba(fitted, test);
        break;
      }
    }
    if (bctx.on_test) bctx.on_test(dataset_name, method.name, fold, test.features.row_ids);
    r.score = evaluate(r.metric, probs, test.labels);
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  r.wall_seconds = clock.now() - start;
  return r;
}

}  // namespace detail

inline BenchmarkResult run_benchmark(const BenchmarkConfig& cfg, const BenchContext& bctx = {}) {
  cfg.validate();
  auto portfolio = detail::load_portfolio_if_needed(cfg);
  std::vector<Dataset> data;
  std::vector<FoldPlan> plans;
  BenchmarkResult out;
  for (const auto& ds : cfg.datasets) {
    data.push_back(load_csv(ds.data_path, ds.schema_path));
    plans.push_back(stratified_kfold(data.back(), cfg.k, cfg.seed));
    for (const auto& w : plans.back().warnings) out.warnings.push_back(ds.name + ": " + w);
  }

  struct Cell {
    std::size_t d, m, f;
  };
  std::vector<Cell> cells;
  for (std::size_t d = 0; d < data.size(); ++d)
    for (std::size_t m = 0; m < cfg.methods.size(); ++m)
      for (std::size_t f = 0; f < cfg.k; ++f) cells.push_back({d, m, f});
  out.folds.resize(cells.size());
  parallel_for(cells.size(), cfg.threads, [&](std::size_t i) {
    const auto& c = cells[i];
    out.folds[i] = detail::run_cell(cfg, cfg.methods[c.m], cfg.datasets[c.d].name, data[c.d], plans[c.d], c.f,
                                    portfolio ? &*portfolio : nullptr, bctx);
  });

  // means per (dataset, method); any failed fold leaves the cell missing
  std::map<std::pair<std::size_t, std::size_t>, std::optional<double>> means;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& r = out.folds[i];
    auto key = std::make_pair(cells[i].d, cells[i].m);
    if (!r.score) {
      out.gaps.push_back(r.dataset + "/" + r.method + "/fold" + std::to_string(r.fold_index) + ": " + r.error);
      means[key] = std::nullopt;
      continue;
    }
    auto it = means.find(key);
    if (it == means.end()) means[key] = *r.score;
    else if (it->second) *it->second += *r.score;
  }
  for (auto& [key, v] : means)
    if (v) *v /= static_cast<double>(cfg.k);

  for (Metric metric : {Metric::RocAuc, Metric::LogLoss, Metric::Accuracy}) {
    std::vector<std::size_t> ds;
    for (std::size_t d = 0; d < data.size(); ++d) {
      bool uses = false;
      for (std::size_t m = 0; m < cfg.methods.size(); ++m)
        uses = uses || cfg.methods[m].autoen.metric.value_or(default_metric(data[d].n_classes())) == metric;
      if (uses) ds.push_back(d);
    }
    if (ds.empty()) continue;
    MetricGroup g;
    g.metric = metric;
    g.table.direction = higher_is_better(metric) ? Direction::HigherBetter : Direction::LowerBetter;
    for (auto d : ds) g.table.datasets.push_back(cfg.datasets[d].name);
    for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
      std::vector<double> col;
      bool complete = true;
      for (auto d : ds) {
        auto& v = means[{d, m}];
        complete = complete && v.has_value();
        if (v) col.push_back(*v);
      }
      if (!complete) {
        g.incomplete_methods.push_back(cfg.methods[m].name);
        continue;
      }
      g.table.methods.push_back(cfg.methods[m].name);
      g.table.scores.push_back(std::move(col));
    }
    out.groups.push_back(std::move(g));
  }
  return out;
}

// ---------------------------------------------------------------------------
// reports

/// Writes folds.csv, mean_scores.csv, timing.csv and, per metric group with
/// at least two methods and two datasets, ranks/friedman/holm CSVs. Throws
/// IncompleteResults after writing if any cell failed.
inline std::vector<std::string> emit_reports(const BenchmarkResult& r, const BenchmarkConfig& cfg) {
  require(!r.folds.empty(), ErrorCode::InvalidArgument, "no results to report");
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  require(!ec, ErrorCode::IoError, "cannot create '" + cfg.output_dir + "': " + ec.message());
  std::vector<std::string> written;
  auto emit = [&](const std::string& name, const std::string& content) {
    auto path = (fs::path(cfg.output_dir) / name).string();
    detail::write_file(path, content);
    written.push_back(path);
  };
  using detail::csv_escape;
  using detail::format_double;

  std::string folds = "dataset,method,fold,metric,score,error\n";
  std::string timing = "dataset,method,fold,wall_seconds\n";
  for (const auto& f : r.folds) {
    folds += csv_escape(f.dataset) + "," + csv_escape(f.method) + "," + std::to_string(f.fold_index) + "," +
             metric_name(f.metric) + "," + (f.score ? format_double(*f.score) : "") + "," + csv_escape(f.error) + "\n";
    timing += csv_escape(f.dataset) + "," + csv_escape(f.method) + "," + std::to_string(f.fold_index) + "," +
              format_double(f.wall_seconds) + "\n";
  }
  emit("folds.csv", folds);
  emit("timing.csv", timing);

  std::string means = "metric,dataset,method,mean_score\n";
  for (const auto& g : r.groups)
    for (std::size_t m = 0; m < g.table.k(); ++m)
      for (std::size_t d = 0; d < g.table.n(); ++d)
        means += metric_name(g.metric) + "," + csv_escape(g.table.datasets[d]) + "," + csv_escape(g.table.methods[m]) +
                 "," + format_double(g.table.scores[m][d]) + "\n";
  emit("mean_scores.csv", means);

  for (const auto& g : r.groups) {
    const auto tag = metric_name(g.metric);
    if (g.table.k() == 0) continue;
    emit("scores_" + tag + ".csv", score_table_csv(g.table));
    if (g.table.k() < 2 || g.table.n() < 2) continue;
    auto ranks = average_ranks(g.table);
    emit("ranks_" + tag + ".csv", rank_csv(ranks));
    emit("friedman_" + tag + ".csv", friedman_csv(friedman_test(ranks), g.table.k(), g.table.n()));
    std::size_t control = 0;
    if (cfg.control && std::find(g.table.methods.begin(), g.table.methods.end(), *cfg.control) != g.table.methods.end())
      control = g.table.method_index(*cfg.control);
    else
      control = static_cast<std::size_t>(std::min_element(ranks.average_ranks.begin(), ranks.average_ranks.end()) -
                                         ranks.average_ranks.begin());
    emit("holm_" + tag + ".csv", holm_csv(holm_posthoc(ranks, control), g.table.methods[control]));
  }

  if (!r.gaps.empty()) {
    std::string msg = std::to_string(r.gaps.size()) + " failed cell(s):";
    for (const auto& g : r.gaps) msg += " [" + g + "]";
    fail(ErrorCode::IncompleteResults, msg);
  }
  return written;
}

}  // namespace autoen
