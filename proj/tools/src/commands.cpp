#include "scoregate/tools/commands.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "scoregate/coldstart.hpp"
#include "scoregate/error.hpp"
#include "scoregate/quantile_fit.hpp"
#include "scoregate/quantile_table.hpp"
#include "scoregate/transforms.hpp"

namespace scoregate::tools {

namespace {

std::string slurp(const std::string& path) {
  if (path == "-") {
    std::ostringstream buffer;
    buffer << std::cin.rdbuf();
    return buffer.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

bool is_jsonl(const std::string& path) {
  return path.ends_with(".jsonl") || path.ends_with(".ndjson");
}

void emit(const nlohmann::json& document, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << document.dump(2) << '\n';
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
  file << document.dump(2) << '\n';
}

struct Reference {
  std::vector<double> levels;
  std::vector<double> quantiles;
};

// A built-in name, or a quantile-table document whose reference_q is read as
// quantiles at evenly spaced levels (its length then overrides `count`).
Reference reference_for(const std::string& name, std::size_t count) {
  if (auto kind = parse_builtin_reference(name)) {
    auto levels = uniform_levels(count);
    auto quantiles = builtin_reference_quantiles(*kind, levels);
    return {std::move(levels), std::move(quantiles)};
  }
  if (!std::filesystem::exists(name)) {
    throw Error(ErrorCode::InvalidArgument, "reference '" + name + "' is neither uniform, skewed nor a table file");
  }
  const auto table = parse_quantile_table(slurp(name));
  const auto q = table.reference_quantiles();
  return {uniform_levels(q.size()), std::vector<double>(q.begin(), q.end())};
}

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

}  // namespace

void fit_quantiles(const FitQuantilesArgs& args, std::ostream& out, std::ostream& err) {
  std::istringstream in(slurp(args.input));
  SampleSet samples;
  if (is_jsonl(args.input)) {
    samples = read_scores_jsonl(in, JsonlFilter{args.predictor, args.tenant, args.window_start, args.window_end});
  } else {
    samples = read_scores_csv(in);
    samples.predictor_id = args.predictor;
    samples.tenant_id = args.tenant;
  }
  const auto reference = reference_for(args.reference, args.levels);
  FitOptions options;
  options.version = args.version;
  options.fitted_at = args.fitted_at;
  options.relative_error = args.relative_error;
  options.z_score = args.z;
  const auto fitted = fit_quantile_table(samples, reference.quantiles, reference.levels, options);
  for (const auto& warning : fitted.warnings) {
    err << nlohmann::json{{"warning", warning}}.dump() << '\n';
  }
  emit(to_json(fitted.table), args.output, out);
}

void fit_coldstart(const FitColdstartArgs& args, std::ostream& out, std::ostream& err) {
  std::istringstream in(slurp(args.input));
  const auto data = read_labeled_csv(in);
  ColdStartOptions options;
  options.n_trials = args.trials;
  options.search.population = args.population;
  options.search.generations = args.generations;
  options.polish = args.polish;
  const auto fit = fit_beta_mixture(data.scores, data.labels, args.seed, options);
  emit(to_json(fit), args.output, out);
  if (!args.table_output.empty()) {
    const auto reference = reference_for(args.reference, args.levels);
    const auto table =
        default_quantile_table(fit, reference.quantiles, reference.levels, args.version, args.fitted_at);
    emit(to_json(table), args.table_output, out);
    err << nlohmann::json{{"table", args.table_output}, {"version", table.version()}}.dump() << '\n';
  }
}

void samplesize(const SampleSizeArgs& args, std::ostream& out) {
  const SampleSizeQuery query{args.alert_rate, args.relative_error, args.z};
  const auto n = required_samples(query);
  out << nlohmann::json{{"alert_rate", args.alert_rate},
                        {"relative_error", args.relative_error},
                        {"z", args.z},
                        {"required_samples", n}}
             .dump(2)
      << '\n';
}

void validate_bound(const ValidateBoundArgs& args, std::ostream& out) {
  const auto r = validate_sample_size_bound(args.alert_rate, args.relative_error, args.z, args.trials, args.seed);
  out << nlohmann::json{{"alert_rate", r.alert_rate},
                        {"relative_error", r.relative_error},
                        {"z", r.z_score},
                        {"samples_per_trial", r.samples_per_trial},
                        {"order_statistic", r.order_statistic},
                        {"trials", r.trials},
                        {"coverage", r.coverage},
                        {"threshold_mean", r.threshold_mean},
                        {"predicted_mean", r.predicted_mean},
                        {"threshold_variance", r.threshold_variance},
                        {"predicted_variance", r.predicted_variance},
                        {"seed", r.seed}}
             .dump(2)
      << '\n';
}

namespace {

std::string percent(double v) {
  std::ostringstream s;
  s << std::showpos << std::fixed << std::setprecision(1) << v * 100.0 << '%';
  return s.str();
}

void print_table(const nlohmann::json& report, std::ostream& out) {
  out << std::left << std::setw(10) << "metric" << std::right << std::setw(12) << "raw";
  const bool corrected = report.contains("calibration_corrected");
  if (corrected) out << std::setw(12) << "corrected" << std::setw(12) << "change";
  out << '\n';
  for (const char* metric : {"ece", "brier"}) {
    const double raw = report["calibration"][metric].get<double>();
    out << std::left << std::setw(10) << (std::string(metric) == "ece" ? "ECE" : "Brier") << std::right
        << std::setw(12) << std::fixed << std::setprecision(5) << raw;
    if (corrected) {
      const double fixed = report["calibration_corrected"][metric].get<double>();
      out << std::setw(12) << fixed << std::setw(12) << (raw > 0 ? percent(fixed / raw - 1.0) : "n/a");
    }
    out << '\n';
  }
}

}  // namespace

void evaluate(const EvaluateArgs& args, std::ostream& out) {
  const std::string text = slurp(args.input);
  std::istringstream in(text);
  std::vector<double> scores;
  std::vector<Label> labels;
  if (is_jsonl(args.input)) {
    scores = read_scores_jsonl(in, JsonlFilter{args.predictor, args.tenant, {}, {}}).scores;
  } else if (first_line(text).find("label") != std::string::npos) {
    auto data = read_labeled_csv(in);
    scores = std::move(data.scores);
    labels = std::move(data.labels);
  } else {
    scores = read_scores_csv(in).scores;
  }

  const auto reference = reference_for(args.reference, 1001);
  const auto masses = reference_decile_masses(reference.levels, reference.quantiles);
  nlohmann::json report{{"distribution", to_json(binned_relative_error(scores, masses, args.z))},
                        {"reference", args.reference}};
  if (!labels.empty()) {
    report["calibration"] = to_json(calibration_report(scores, labels));
    if (args.posterior_beta) {
      std::vector<double> corrected;
      corrected.reserve(scores.size());
      for (double y : scores) corrected.push_back(posterior_correct(Score(y), *args.posterior_beta).value());
      report["calibration_corrected"] = to_json(calibration_report(corrected, labels));
      report["posterior_beta"] = *args.posterior_beta;
    }
  } else if (args.posterior_beta) {
    throw Error(ErrorCode::InvalidArgument, "--posterior-beta needs labeled input");
  }
  emit(report, args.output, out);
  if (args.table && report.contains("calibration")) print_table(report, out);
}

int report_failure(const std::exception& failure, std::ostream& err) {
  if (const auto* e = dynamic_cast<const Error*>(&failure)) {
    err << nlohmann::json{{"error", to_string(e->code())}, {"message", e->what()}}.dump() << '\n';
    return is_validation_error(e->code()) ? kExitValidation : kExitRuntime;
  }
  err << nlohmann::json{{"error", "Internal"}, {"message", failure.what()}}.dump() << '\n';
  return kExitRuntime;
}

}  // namespace scoregate::tools
