#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "autoen/autoen.hpp"

namespace fs = std::filesystem;
using namespace autoen;

namespace {

#ifndef AUTOEN_SOURCE_DIR
#define AUTOEN_SOURCE_DIR "."
#endif

// Relative paths that do not exist from the working directory are looked up
// under $AUTOEN_FIXTURE_DIR, or the source tree when that is unset.
std::string resolve(const std::string& path) {
  if (path.empty() || fs::path(path).is_absolute() || fs::exists(path)) return path;
  const char* env = std::getenv("AUTOEN_FIXTURE_DIR");
  fs::path root = env && *env ? fs::path(env) : fs::path(AUTOEN_SOURCE_DIR);
  auto candidate = root / path;
  return fs::exists(candidate) ? candidate.string() : path;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

int report(const std::string& code, const std::string& message, int exit_code) {
  std::cerr << "error code=" << code << " message=" << quote(message) << "\n";
  return exit_code;
}

int cmd_fit(const std::string& data, const std::string& schema_path, const std::string& portfolio_path, bool economy,
            std::uint64_t seed, std::size_t ensemble_size, bool best_prefix, unsigned threads, const std::string& out,
            const std::string& trace_path) {
  auto schema = load_schema(resolve(schema_path));
  auto d = load_csv(resolve(data), schema);
  auto portfolio = parse_portfolio(resolve(portfolio_path));
  AutoEnConfig cfg;
  cfg.seed = seed;
  cfg.ensemble_size = ensemble_size;
  cfg.best_prefix_mode = best_prefix;
  cfg.threads = threads;
  if (economy) cfg.economy = EconomyConfig{};
  auto r = autoen_fit(d, portfolio, cfg);
  if (schema.class_names.empty()) schema.class_names = d.class_names;
  save_model(out, ModelArchive{r.model, schema});
  if (!trace_path.empty()) detail::write_file(trace_path, trace_csv(r.model));
  for (const auto& w : r.model.warnings) std::cerr << "warning: " << w << "\n";
  for (const auto& diag : r.model.diagnostics)
    std::cerr << "skipped pipeline " << diag.spec_id << ": " << diag.message << "\n";
  std::cout << "model=" << out << " metric=" << metric_name(r.model.metric)
            << " test_score=" << detail::format_double(r.test_score) << " members=" << r.model.members.size()
            << " unique=" << r.model.unique_fitted.size() << " seconds=" << detail::format_double(r.model.total_seconds)
            << "\n";
  return 0;
}

int cmd_predict(const std::string& model_path, const std::string& data, const std::string& out) {
  auto archive = load_model(resolve(model_path));
  auto frame = load_features(resolve(data), archive.schema);
  auto probs = ensemble_predict(archive.model, frame);
  std::string csv = "row";
  for (const auto& c : archive.model.class_names) csv += "," + detail::csv_escape(c);
  csv += ",predicted\n";
  for (std::size_t r = 0; r < probs.rows(); ++r) {
    csv += std::to_string(frame.row_ids[r]);
    auto row = probs.row(r);
    for (double v : row) csv += "," + detail::format_double(v);
    auto best = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
    csv += "," + detail::csv_escape(archive.model.class_names[best]) + "\n";
  }
  detail::write_file(out, csv);
  std::cout << "rows=" << probs.rows() << " out=" << out << "\n";
  return 0;
}

int cmd_bench(const std::string& config_path, const std::string& output_override) {
  auto cfg = load_benchmark_config(resolve(config_path));
  if (!output_override.empty()) cfg.output_dir = output_override;
  auto result = run_benchmark(cfg);
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
  auto files = emit_reports(result, cfg);
  for (const auto& g : result.groups)
    for (std::size_t m = 0; m < g.table.k(); ++m) {
      std::cout << metric_name(g.metric) << " " << g.table.methods[m];
      for (std::size_t d = 0; d < g.table.n(); ++d)
        std::cout << " " << g.table.datasets[d] << "=" << detail::format_double(g.table.scores[m][d]);
      std::cout << "\n";
    }
  std::cout << "reports=" << cfg.output_dir << " files=" << files.size() << "\n";
  return 0;
}

int cmd_stats(const std::string& scores, const std::string& direction, const std::string& control,
              const std::string& out_dir) {
  auto table = load_score_csv(resolve(scores), parse_direction(direction));
  auto ranks = average_ranks(table);
  auto f = friedman_test(ranks);
  auto control_idx = table.method_index(control);
  auto holm = holm_posthoc(ranks, control_idx);
  auto rank_text = rank_csv(ranks);
  auto friedman_text = friedman_csv(f, table.k(), table.n());
  auto holm_text = holm_csv(holm, control);
  std::cout << rank_text << "\n" << friedman_text << "\n" << holm_text;
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    detail::write_file((fs::path(out_dir) / "ranks.csv").string(), rank_text);
    detail::write_file((fs::path(out_dir) / "friedman.csv").string(), friedman_text);
    detail::write_file((fs::path(out_dir) / "holm.csv").string(), holm_text);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ensembles from a fixed pipeline portfolio by greedy validation-ranked selection."};
  app.require_subcommand(1);

  std::string data, schema, portfolio = "portfolios/default.portfolio", out, trace;
  bool economy = false, best_prefix = false;
  std::uint64_t seed = 0;
  std::size_t ensemble_size = 50;
  unsigned threads = 1;
  auto* fit = app.add_subcommand("fit", "Fit an ensemble and save it");
  fit->add_option("--data", data, "CSV file")->required();
  fit->add_option("--schema", schema, "Schema file")->required();
  fit->add_option("--portfolio", portfolio, "Portfolio file")->capture_default_str();
  fit->add_flag("--economy", economy, "Pre-filter pipelines on a 10% subsample with a 36 s budget each");
  fit->add_option("--seed", seed, "Random seed")->capture_default_str();
  fit->add_option("--ensemble-size", ensemble_size, "Ensemble size B")->capture_default_str()->check(CLI::PositiveNumber);
  fit->add_flag("--best-prefix", best_prefix, "Keep the best-scoring prefix of the greedy trace");
  fit->add_option("--threads", threads, "Worker threads (0 = all cores)")->capture_default_str();
  fit->add_option("--out", out, "Model file to write")->required();
  fit->add_option("--trace", trace, "Also write the selection trace CSV here");

  std::string model, pred_data, pred_out;
  auto* predict = app.add_subcommand("predict", "Predict class probabilities with a saved model");
  predict->add_option("--model", model, "Model file")->required();
  predict->add_option("--data", pred_data, "CSV file (label column optional)")->required();
  predict->add_option("--out", pred_out, "CSV to write")->required();

  std::string config, bench_out;
  auto* bench = app.add_subcommand("bench", "Run a cross-validation benchmark campaign");
  bench->add_option("--config", config, "Benchmark JSON config")->required();
  bench->add_option("--output-dir", bench_out, "Override the config's output directory");

  std::string scores, direction, control, stats_out;
  auto* stats = app.add_subcommand("stats", "Friedman ranks and Holm post-hoc over a score table");
  stats->add_option("--scores", scores, "CSV: dataset,<method>,...")->required();
  stats->add_option("--direction", direction, "higher or lower")->required()->check(CLI::IsMember({"higher", "lower"}));
  stats->add_option("--control", control, "Control method name")->required();
  stats->add_option("--out-dir", stats_out, "Also write ranks/friedman/holm CSVs here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return report("InvalidArgument", e.what(), 2);
  }

  try {
    if (*fit) return cmd_fit(data, schema, portfolio, economy, seed, ensemble_size, best_prefix, threads, out, trace);
    if (*predict) return cmd_predict(model, pred_data, pred_out);
    if (*bench) return cmd_bench(config, bench_out);
    if (*stats) return cmd_stats(scores, direction, control, stats_out);
  } catch (const Error& e) {
    return report(std::string(code_name(e.code())), e.detail(), 1);
  } catch (const std::exception& e) {
    return report("Internal", e.what(), 1);
  }
  return 0;
}
