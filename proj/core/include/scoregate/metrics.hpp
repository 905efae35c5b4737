#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "scoregate/types.hpp"

namespace scoregate {

struct WilsonInterval {
  double low = 0.0;
  double high = 1.0;
};

// Wilson score interval for k successes out of n trials at z. n == 0 yields
// [0, 1].
WilsonInterval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z);

// Comparison of an observed score sample against a target distribution over
// decile bins [0, 0.1), ..., [0.9, 1.0].
//
// relative_error[i] = observed_fraction[i] / expected_mass[i] - 1, which is
// -1 when a bin is empty. The Wilson columns are the bin's proportion
// interval expressed in the same relative-error units, so a bin agrees with
// the target when wilson_low[i] <= 0 <= wilson_high[i].
struct BinnedComparison {
  std::vector<double> bin_edges;
  std::vector<std::uint64_t> observed_counts;
  std::vector<double> expected_mass;
  std::vector<double> relative_error;
  std::vector<double> wilson_low;
  std::vector<double> wilson_high;
  // Bins whose expected count n * mass falls below 5.
  std::vector<bool> small_sample;
  std::uint64_t n = 0;
  double z = 1.96;

  std::size_t bins() const noexcept { return observed_counts.size(); }
  bool within_bounds(std::size_t bin) const noexcept {
    return wilson_low[bin] <= 0.0 && 0.0 <= wilson_high[bin];
  }
  double observed_fraction(std::size_t bin) const noexcept {
    return n == 0 ? 0.0 : static_cast<double>(observed_counts[bin]) / static_cast<double>(n);
  }
};

inline constexpr std::size_t kDecileBins = 10;

// Throws Error{EmptySampleSet} for no scores,
// Error{InvalidArgument} if target_mass does not hold 10 non-negative values
// summing to 1 (within 1e-9) or a score lies outside [0, 1].
BinnedComparison binned_relative_error(std::span<const double> scores,
                                       std::span<const double> target_mass, double z = 1.96);

// Decile masses of the distribution whose quantiles at `levels` are
// `reference_q`, treating its CDF as piecewise linear between the knots.
std::vector<double> reference_decile_masses(std::span<const double> levels,
                                            std::span<const double> reference_q);

nlohmann::json to_json(const BinnedComparison& comparison);

// Mean squared error between predictions and 0/1 labels.
// Throws Error{LengthMismatch}, Error{InvalidArgument} for n == 0.
double brier_score(std::span<const double> predictions, std::span<const Label> labels);

struct EceResult {
  double ece = 0.0;
  // Non-empty bins at the selected bin count.
  std::size_t bins_used = 1;
};

// Equal-mass ECE with a monotonicity sweep. Predictions are sorted and cut
// into b equal-count bins for b = 2..floor(sqrt(n)); cut points never split a
// run of identical predictions (they move to the end of the run). The
// selected b is the largest one whose per-bin positive rates are
// non-decreasing; if none is, a single bin is used.
//   ECE = sum_b (n_b / n) |mean prediction_b - positive rate_b|
// Throws Error{LengthMismatch}, Error{InvalidArgument} for n < 2.
EceResult ece_em_sweep(std::span<const double> predictions, std::span<const Label> labels);

struct CalibrationReport {
  double ece = 0.0;
  std::size_t ece_bins_used = 0;
  double brier = 0.0;
  std::uint64_t n = 0;
};

CalibrationReport calibration_report(std::span<const double> predictions,
                                     std::span<const Label> labels);
nlohmann::json to_json(const CalibrationReport& report);

}  // namespace scoregate
