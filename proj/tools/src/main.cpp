#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "scoregate/tools/commands.hpp"

namespace st = scoregate::tools;

namespace {

template <typename T>
void env_default(const char* name, T& value) {
  if (const char* raw = std::getenv(name); raw && *raw) {
    if constexpr (std::is_same_v<T, std::string>) {
      value = raw;
    } else {
      value = static_cast<T>(std::stoull(raw));
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"scoregate: multi-tenant score serving and calibration toolkit", "scoregate"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "scoregate 0.1.0");

  st::FitQuantilesArgs fq;
  auto* fit_q = app.add_subcommand("fit-quantiles", "Fit a quantile table from score samples");
  fit_q->add_option("--input", fq.input, "Scores: CSV with a 'score' column, shadow-sink .jsonl, or - for stdin")
      ->required();
  fit_q->add_option("--predictor", fq.predictor, "Keep only records of this predictor (JSONL)");
  fit_q->add_option("--tenant", fq.tenant, "Keep only records of this tenant (JSONL)");
  fit_q->add_option("--window-start", fq.window_start, "Earliest record timestamp kept (JSONL)");
  fit_q->add_option("--window-end", fq.window_end, "Latest record timestamp kept (JSONL)");
  fit_q->add_option("--reference", fq.reference, "Reference: uniform, skewed, or a quantile-table file")->capture_default_str();
  fit_q->add_option("--levels", fq.levels, "Number of probability levels")->capture_default_str();
  fit_q->add_option("--version-tag", fq.version, "Version label stored in the table")->capture_default_str();
  fit_q->add_option("--fitted-at", fq.fitted_at, "Timestamp stored in the table");
  fit_q->add_option("--relative-error", fq.relative_error, "delta used for the sample-size warning")
      ->capture_default_str();
  fit_q->add_option("--z", fq.z, "z-score used for the sample-size warning")->capture_default_str();
  fit_q->add_option("-o,--output", fq.output, "Output file (default stdout)");

  st::FitColdstartArgs fc;
  auto* fit_c = app.add_subcommand("fit-coldstart", "Fit a Beta-mixture prior and optional default table");
  fit_c->add_option("--input", fc.input, "Labeled CSV with 'score,label' columns, or - for stdin")->required();
  fit_c->add_option("--seed", fc.seed, "Random seed")->capture_default_str();
  fit_c->add_option("--trials", fc.trials, "Independent search restarts")->capture_default_str();
  fit_c->add_option("--population", fc.population, "Search population size")->capture_default_str();
  fit_c->add_option("--generations", fc.generations, "Search generations")->capture_default_str();
  bool no_polish = false;
  fit_c->add_flag("--no-polish", no_polish, "Skip the least-squares refinement of each trial");
  fit_c->add_option("-o,--output", fc.output, "Fit output file (default stdout)");
  fit_c->add_option("--table-output", fc.table_output, "Also write the cold-start quantile table here");
  fit_c->add_option("--reference", fc.reference, "Reference: uniform, skewed, or a quantile-table file")->capture_default_str();
  fit_c->add_option("--levels", fc.levels, "Number of probability levels")->capture_default_str();
  fit_c->add_option("--version-tag", fc.version, "Version label for the table")->capture_default_str();
  fit_c->add_option("--fitted-at", fc.fitted_at, "Timestamp stored in the table");

  st::SampleSizeArgs ss;
  auto* size = app.add_subcommand("samplesize", "Samples needed to estimate an alert threshold");
  size->add_option("--alert-rate", ss.alert_rate, "Alert rate a in (0, 1)")->capture_default_str();
  size->add_option("--relative-error", ss.relative_error, "Relative error delta > 0")->capture_default_str();
  size->add_option("--z", ss.z, "z-score of the confidence level")->capture_default_str();

  st::ValidateBoundArgs vb;
  auto* bound = app.add_subcommand("validate-bound", "Monte Carlo check of the sample-size bound");
  bound->add_option("--alert-rate", vb.alert_rate, "Alert rate a in (0, 1)")->capture_default_str();
  bound->add_option("--relative-error", vb.relative_error, "Relative error delta > 0")->capture_default_str();
  bound->add_option("--z", vb.z, "z-score of the confidence level")->capture_default_str();
  bound->add_option("--trials", vb.trials, "Monte Carlo trials (>= 1000)")->capture_default_str();
  bound->add_option("--seed", vb.seed, "Random seed")->capture_default_str();

  st::EvaluateArgs ev;
  double beta = 0.0;
  auto* eval = app.add_subcommand("evaluate", "Distribution and calibration report for scored data");
  eval->add_option("--input", ev.input, "CSV ('score' or 'score,label') or shadow-sink .jsonl")->required();
  eval->add_option("--predictor", ev.predictor, "Keep only records of this predictor (JSONL)");
  eval->add_option("--tenant", ev.tenant, "Keep only records of this tenant (JSONL)");
  eval->add_option("--reference", ev.reference, "Target: uniform, skewed, or a quantile-table file")->capture_default_str();
  eval->add_option("--z", ev.z, "z-score for the Wilson intervals")->capture_default_str();
  auto* beta_opt = eval->add_option("--posterior-beta", beta, "Also report calibration after correcting with this beta");
  eval->add_flag("--table", ev.table, "Print a plaintext calibration table after the JSON");
  eval->add_option("-o,--output", ev.output, "Output file (default stdout)");

  st::ServeArgs sv;
  env_default("SCOREGATE_LISTEN", sv.listen);
  env_default("SCOREGATE_SHADOW_SINK", sv.sink);
  env_default("SCOREGATE_WARMUP_COUNT", sv.warmup);
  env_default("SCOREGATE_SHADOW_QUEUE_DEPTH", sv.queue_depth);
  auto* serve = app.add_subcommand("serve", "Run the HTTP scoring service");
  serve->add_option("--manifest", sv.manifest, "Deployment manifest (backends, predictors, tables)")->required();
  serve->add_option("--routing", sv.routing, "Routing config YAML")->required();
  serve->add_option("--listen", sv.listen, "host:port [env SCOREGATE_LISTEN]")->capture_default_str();
  serve->add_option("--sink", sv.sink, "Shadow sink JSONL path [env SCOREGATE_SHADOW_SINK]")->capture_default_str();
  serve->add_option("--warmup", sv.warmup, "Synthetic calls per predictor before ready [env SCOREGATE_WARMUP_COUNT]")
      ->capture_default_str();
  serve->add_option("--warmup-timeout-ms", sv.warmup_timeout_ms, "Warm-up deadline, 0 for none")->capture_default_str();
  serve->add_option("--warmup-rate", sv.warmup_rate, "Warm-up calls per second, 0 for unthrottled")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  serve->add_option("--queue-depth", sv.queue_depth, "Shadow queue depth [env SCOREGATE_SHADOW_QUEUE_DEPTH]")
      ->capture_default_str();
  serve->add_option("--threads", sv.threads, "HTTP worker threads")->capture_default_str();
  serve->add_option("--seed", sv.seed, "Warm-up seed")->capture_default_str();
  serve->add_flag("--watch", sv.watch, "Reload the routing file when it changes");

  st::LifecycleOptions lc;
  std::string out_dir = lc.out_dir.string();
  auto* demo = app.add_subcommand("lifecycle-demo", "Cold start, shadow collection, refit and promotion");
  demo->add_option("--seed", lc.seed, "Random seed")->capture_default_str();
  demo->add_option("--out-dir", out_dir, "Directory for reports and tables")->capture_default_str();
  demo->add_option("--traffic", lc.traffic, "Events streamed before promotion")->capture_default_str();
  demo->add_option("--eval-traffic", lc.eval_traffic, "Events streamed after promotion")->capture_default_str();
  demo->add_option("--z", lc.z, "z-score for the Wilson intervals")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return st::kExitValidation;
  }

  try {
    if (*fit_q) st::fit_quantiles(fq, std::cout, std::cerr);
    if (*fit_c) {
      fc.polish = !no_polish;
      st::fit_coldstart(fc, std::cout, std::cerr);
    }
    if (*size) st::samplesize(ss, std::cout);
    if (*bound) st::validate_bound(vb, std::cout);
    if (*eval) {
      if (*beta_opt) ev.posterior_beta = beta;
      st::evaluate(ev, std::cout);
    }
    if (*serve) return st::serve(sv, std::cout, std::cerr);
    if (*demo) {
      lc.out_dir = out_dir;
      const auto result = st::lifecycle_demo(lc);
      std::cout << nlohmann::json{{"out_dir", out_dir},
                                  {"table_before", result.table_v0},
                                  {"table_after", result.table_v1},
                                  {"shadow_samples", result.shadow_samples},
                                  {"drift_detected", result.drift_detected},
                                  {"aligned_after_promotion", result.aligned}}
                       .dump(2)
                << '\n';
    }
  } catch (const std::exception& e) {
    return st::report_failure(e, std::cerr);
  }
  return st::kExitOk;
}
