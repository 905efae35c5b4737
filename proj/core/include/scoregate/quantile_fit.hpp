#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scoregate/quantile_table.hpp"
#include "scoregate/types.hpp"

namespace scoregate {

struct SampleSet {
  std::vector<double> scores;
  std::string tenant_id;
  std::string predictor_id;
  // ISO-8601 bounds of the collection window; informational.
  std::string window_start;
  std::string window_end;

  // Error{EmptySampleSet} or Error{InvalidArgument} for values outside [0, 1].
  void validate() const;
};

struct SampleSizeQuery {
  double alert_rate = 0.01;     // a in (0, 1)
  double relative_error = 0.2;  // delta > 0
  double z_score = 1.96;        // z > 0

  void validate() const;
};

// ceil(z^2 (1 - a) / (delta^2 a)), at least 1.
std::uint64_t required_samples(const SampleSizeQuery& query);

// 0, 1/(n-1), ..., 1. The default 1001 levels give 0.1% granularity.
std::vector<double> uniform_levels(std::size_t count = 1001);

// Linear interpolation between order statistics ("type 7"). `sorted` must be
// ascending and non-empty.
double empirical_quantile(std::span<const double> sorted, double level);

enum class BuiltinReference {
  Uniform,
  // Low-alert-rate reference: most mass near 0 with a long tail toward 1.
  Skewed,
};

// Reference quantiles at the given levels; strictly increasing, pinned to
// 0 and 1.
std::vector<double> builtin_reference_quantiles(BuiltinReference kind,
                                                std::span<const double> levels);
std::optional<BuiltinReference> parse_builtin_reference(std::string_view name);

struct FittedTable {
  QuantileTable table;
  // Non-fatal findings, e.g. fewer samples than the sample-size bound asks for.
  std::vector<std::string> warnings;
};

struct FitOptions {
  std::string version = "v1";
  std::string fitted_at;
  // Bound used for the insufficient-samples warning.
  double relative_error = 0.2;
  double z_score = 1.96;
};

// source_q[i] = empirical quantile of the samples at levels[i], endpoints
// pinned to 0 and 1, ties collapsed by QuantileTable.
// Throws Error{EmptySampleSet}, Error{LevelsNotSorted},
// Error{LengthMismatch} when |levels| != |reference_q|.
FittedTable fit_quantile_table(const SampleSet& samples, std::span<const double> reference_q,
                               std::span<const double> levels, const FitOptions& options = {});

struct CoverageReport {
  double alert_rate = 0.0;
  double relative_error = 0.0;
  double z_score = 0.0;
  std::uint64_t samples_per_trial = 0;  // n
  std::uint64_t order_statistic = 0;    // k
  std::uint64_t trials = 0;
  // Fraction of trials with |(1 - U_(k)) - a| <= delta * a.
  double coverage = 0.0;
  double threshold_mean = 0.0;
  double threshold_variance = 0.0;
  // a(1 - a) / n
  double predicted_variance = 0.0;
  // k / (n + 1)
  double predicted_mean = 0.0;
  std::uint64_t seed = 0;
};

// Monte Carlo check of the sample-size bound. Each trial draws
// n = required_samples(a, delta, z) uniforms and takes the k-th lowest as
// the alert threshold, with k = round((1 - a)(n + 1)) clamped to [1, n] so
// that E[U_(k)] = k/(n+1) is as close to 1 - a as n allows.
// Throws Error{InvalidArgument} when trials < 1000.
CoverageReport validate_sample_size_bound(double alert_rate, double relative_error,
                                          double z_score, std::uint64_t trials,
                                          std::uint64_t seed);

// Sample ingestion. CSV: header `score` (optionally with more columns, e.g.
// `score,label`), one row per sample. JSONL: shadow-sink records; optional
// predictor/tenant filters and an inclusive timestamp window.
struct JsonlFilter {
  std::string predictor_id;
  std::string tenant_id;
  std::string window_start;
  std::string window_end;
};

SampleSet read_scores_csv(std::istream& in);
SampleSet read_scores_jsonl(std::istream& in, const JsonlFilter& filter = {});

struct LabeledScores {
  std::vector<double> scores;
  std::vector<Label> labels;
};

// CSV with header `score,label`; label is 0/1 or true/false.
LabeledScores read_labeled_csv(std::istream& in);

}  // namespace scoregate
