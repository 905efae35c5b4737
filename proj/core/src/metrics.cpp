#include "scoregate/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

#include "scoregate/error.hpp"

namespace scoregate {

WilsonInterval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  // the point estimate is always inside; guard against rounding at p = 0, 1
  return {std::min(std::max(0.0, center - half), p), std::max(std::min(1.0, center + half), p)};
}

BinnedComparison binned_relative_error(std::span<const double> scores,
                                       std::span<const double> target_mass, double z) {
  if (scores.empty()) throw Error(ErrorCode::EmptySampleSet, "no scores to compare");
  if (target_mass.size() != kDecileBins) {
    throw Error(ErrorCode::InvalidArgument, "target distribution needs 10 decile masses");
  }
  for (double m : target_mass) {
    if (!(m >= 0.0)) throw Error(ErrorCode::InvalidArgument, "target masses must be >= 0");
  }
  if (std::abs(std::accumulate(target_mass.begin(), target_mass.end(), 0.0) - 1.0) > 1e-9) {
    throw Error(ErrorCode::InvalidArgument, "target masses must sum to 1");
  }

  BinnedComparison out;
  out.z = z;
  out.n = scores.size();
  out.bin_edges.resize(kDecileBins + 1);
  for (std::size_t i = 0; i <= kDecileBins; ++i) out.bin_edges[i] = static_cast<double>(i) / 10.0;
  out.observed_counts.assign(kDecileBins, 0);
  for (double y : scores) {
    if (!(y >= 0.0 && y <= 1.0)) throw Error(ErrorCode::InvalidArgument, "score outside [0, 1]");
    auto it = std::upper_bound(out.bin_edges.begin(), out.bin_edges.end(), y);
    auto bin = static_cast<std::size_t>(it - out.bin_edges.begin()) - 1;
    ++out.observed_counts[std::min(bin, kDecileBins - 1)];
  }

  out.expected_mass.assign(target_mass.begin(), target_mass.end());
  out.relative_error.resize(kDecileBins);
  out.wilson_low.resize(kDecileBins);
  out.wilson_high.resize(kDecileBins);
  out.small_sample.resize(kDecileBins);
  const double n = static_cast<double>(out.n);
  for (std::size_t i = 0; i < kDecileBins; ++i) {
    const double expected = out.expected_mass[i];
    const auto interval = wilson_interval(out.observed_counts[i], out.n, z);
    const double observed = static_cast<double>(out.observed_counts[i]) / n;
    out.small_sample[i] = expected * n < 5.0;
    if (expected > 0.0) {
      out.relative_error[i] = observed / expected - 1.0;
      out.wilson_low[i] = interval.low / expected - 1.0;
      out.wilson_high[i] = interval.high / expected - 1.0;
    } else {
      const double inf = std::numeric_limits<double>::infinity();
      out.relative_error[i] = observed > 0.0 ? inf : 0.0;
      out.wilson_low[i] = interval.low > 0.0 ? inf : 0.0;
      out.wilson_high[i] = interval.high > 0.0 ? inf : 0.0;
    }
  }
  return out;
}

std::vector<double> reference_decile_masses(std::span<const double> levels,
                                            std::span<const double> reference_q) {
  if (levels.size() != reference_q.size() || levels.size() < 2) {
    throw Error(ErrorCode::LengthMismatch, "levels and reference quantiles must pair up");
  }
  auto cdf = [&](double x) {
    if (x <= reference_q.front()) return levels.front();
    if (x >= reference_q.back()) return levels.back();
    auto it = std::upper_bound(reference_q.begin(), reference_q.end(), x);
    const auto hi = static_cast<std::size_t>(it - reference_q.begin());
    const auto lo = hi - 1;
    const double t = (x - reference_q[lo]) / (reference_q[hi] - reference_q[lo]);
    return levels[lo] + t * (levels[hi] - levels[lo]);
  };
  std::vector<double> masses(kDecileBins);
  double previous = cdf(0.0);
  for (std::size_t i = 0; i < kDecileBins; ++i) {
    const double next = cdf(static_cast<double>(i + 1) / 10.0);
    masses[i] = std::max(0.0, next - previous);
    previous = next;
  }
  const double total = std::accumulate(masses.begin(), masses.end(), 0.0);
  if (!(total > 0.0)) throw Error(ErrorCode::InvalidArgument, "reference has no mass in [0, 1]");
  for (double& m : masses) m /= total;
  return masses;
}

namespace {

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); }

nlohmann::json finite_array(const std::vector<double>& values) {
  auto out = nlohmann::json::array();
  for (double v : values) out.push_back(finite_or_null(v));
  return out;
}

}  // namespace

nlohmann::json to_json(const BinnedComparison& c) {
  auto small = nlohmann::json::array();
  for (bool flag : c.small_sample) small.push_back(flag);
  return nlohmann::json{{"n", c.n},
                        {"z", c.z},
                        {"bin_edges", c.bin_edges},
                        {"observed_counts", c.observed_counts},
                        {"expected_mass", c.expected_mass},
                        {"relative_error", finite_array(c.relative_error)},
                        {"wilson_low", finite_array(c.wilson_low)},
                        {"wilson_high", finite_array(c.wilson_high)},
                        {"small_sample", small}};
}

double brier_score(std::span<const double> predictions, std::span<const Label> labels) {
  if (predictions.size() != labels.size()) {
    throw Error(ErrorCode::LengthMismatch, "predictions and labels differ in length");
  }
  if (predictions.empty()) throw Error(ErrorCode::InvalidArgument, "brier score of no predictions");
  double sum = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double diff = predictions[i] - (labels[i] != 0 ? 1.0 : 0.0);
    sum += diff * diff;
  }
  return sum / static_cast<double>(predictions.size());
}

EceResult ece_em_sweep(std::span<const double> predictions, std::span<const Label> labels) {
  if (predictions.size() != labels.size()) {
    throw Error(ErrorCode::LengthMismatch, "predictions and labels differ in length");
  }
  const std::size_t n = predictions.size();
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "ECE needs at least two predictions");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return predictions[a] < predictions[b];
  });
  std::vector<double> sorted(n);
  std::vector<double> pred_prefix(n + 1, 0.0);
  std::vector<double> label_prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    sorted[i] = predictions[order[i]];
    pred_prefix[i + 1] = pred_prefix[i] + sorted[i];
    label_prefix[i + 1] = label_prefix[i] + (labels[order[i]] != 0 ? 1.0 : 0.0);
  }
  // run_end[i]: one past the last index holding the same prediction as i
  std::vector<std::size_t> run_end(n);
  for (std::size_t i = n; i-- > 0;) {
    run_end[i] = (i + 1 < n && sorted[i + 1] == sorted[i]) ? run_end[i + 1] : i + 1;
  }

  std::vector<std::size_t> cuts;
  auto evaluate = [&](std::size_t bins, EceResult& result) {
    cuts.clear();
    cuts.push_back(0);
    for (std::size_t j = 1; j < bins; ++j) {
      std::size_t cut = j * n / bins;
      if (cut > 0 && cut < n) cut = run_end[cut - 1];
      if (cut > cuts.back() && cut < n) cuts.push_back(cut);
    }
    cuts.push_back(n);
    double ece = 0.0;
    double previous_rate = -1.0;
    bool monotone = true;
    for (std::size_t j = 0; j + 1 < cuts.size(); ++j) {
      const std::size_t lo = cuts[j];
      const std::size_t hi = cuts[j + 1];
      const double count = static_cast<double>(hi - lo);
      const double mean_pred = (pred_prefix[hi] - pred_prefix[lo]) / count;
      const double rate = (label_prefix[hi] - label_prefix[lo]) / count;
      if (rate < previous_rate) monotone = false;
      previous_rate = rate;
      ece += count / static_cast<double>(n) * std::abs(mean_pred - rate);
    }
    result.ece = ece;
    result.bins_used = cuts.size() - 1;
    return monotone;
  };

  EceResult selected;
  evaluate(1, selected);
  const auto max_bins = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n))));
  EceResult candidate;
  for (std::size_t b = 2; b <= max_bins; ++b) {
    if (evaluate(b, candidate)) selected = candidate;
  }
  return selected;
}

CalibrationReport calibration_report(std::span<const double> predictions,
                                     std::span<const Label> labels) {
  CalibrationReport report;
  const auto ece = ece_em_sweep(predictions, labels);
  report.ece = ece.ece;
  report.ece_bins_used = ece.bins_used;
  report.brier = brier_score(predictions, labels);
  report.n = predictions.size();
  return report;
}

nlohmann::json to_json(const CalibrationReport& report) {
  return nlohmann::json{{"ece", report.ece},
                        {"ece_bins_used", report.ece_bins_used},
                        {"brier", report.brier},
                        {"n", report.n}};
}

}  // namespace scoregate
