#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "scoregate/quantile_table.hpp"
#include "scoregate/types.hpp"

namespace scoregate {

// Two-component Beta mixture prior for a predictor's score distribution:
//
//   f(y) = (1 - w) Beta(y; alpha0, beta0) + w Beta(y; alpha1, beta1)
//
// with w the positive-class prior.
struct BetaMixtureFit {
  double w = 0.0;
  double alpha0 = 1.0;
  double beta0 = 1.0;
  double alpha1 = 1.0;
  double beta1 = 1.0;
  double jsd = 0.0;
  int trials_run = 0;
  std::uint64_t seed = 0;

  // Throws Error{InvalidArgument} on non-positive shapes, w outside [0, 1]
  // or a negative jsd.
  void validate() const;
};

nlohmann::json to_json(const BetaMixtureFit& fit);
BetaMixtureFit beta_mixture_fit_from_json(const nlohmann::json& document);

// Histogram over [0, 1]: B+1 strictly increasing edges and B masses summing
// to one.
struct EmpiricalDensity {
  std::vector<double> bin_edges;
  std::vector<double> masses;
};

// Equal-width histogram; the value 1.0 falls into the last bin. Throws
// Error{EmptySampleSet} for no scores, Error{InvalidArgument} for values
// outside [0, 1] or bins == 0.
EmpiricalDensity empirical_density(std::span<const double> scores, std::size_t bins = 100);

// Bin masses of the mixture over the given edges, computed from the
// regularized incomplete Beta function (never from pointwise densities, which
// diverge at the endpoints for shapes < 1).
EmpiricalDensity mixture_density(const BetaMixtureFit& fit, std::span<const double> bin_edges);

double beta_pdf(double y, double alpha, double beta);
double mixture_pdf(double y, const BetaMixtureFit& fit);
double mixture_cdf(double y, const BetaMixtureFit& fit);
// Inverse CDF by bisection on mixture_cdf; level is clamped to [0, 1].
double mixture_quantile(double level, const BetaMixtureFit& fit);

// prod_{j<r} (alpha + j) / (alpha + beta + j)
double beta_raw_moment(int r, double alpha, double beta);
// r in 1..4, Error{InvalidArgument} otherwise.
double mixture_raw_moment(int r, const BetaMixtureFit& fit);

// (1/N) sum y_i^r for r = 1..4.
std::array<double, 4> empirical_raw_moments(std::span<const double> scores);

// sum_{r=1}^{4} |mu_r - ybar_r|^(2/r): the r-th root of each squared moment
// discrepancy.
double moment_loss(const BetaMixtureFit& fit, const std::array<double, 4>& empirical_moments);

// Jensen-Shannon divergence between two discrete distributions of equal
// length, base-2 logarithm, so the result lies in [0, 1].
double jensen_shannon_divergence(std::span<const double> p, std::span<const double> q);

struct DifferentialEvolutionOptions {
  int population = 32;
  int generations = 300;
  double mutation = 0.7;
  double crossover = 0.9;
  // Shape parameters are searched in log space within [lower, upper].
  double shape_lower = 0.05;
  double shape_upper = 500.0;
};

struct ColdStartOptions {
  int n_trials = 8;
  std::size_t histogram_bins = 100;
  DifferentialEvolutionOptions search;
  // Run the independent trials on worker threads.
  bool parallel = true;
  // Local least-squares refinement of each trial's DE winner on the moment
  // equations; kept only when it lowers the moment loss.
  bool polish = true;
};

// Moment-matching fit: w is the positive-label fraction; each of n_trials
// independent differential-evolution searches minimizes moment_loss over the
// four shapes, and the trial whose mixture has the lowest JSD against the
// empirical histogram wins (ties go to the lower trial index).
//
// Throws Error{LengthMismatch}, Error{InvalidArgument} (fewer than 100
// scores, values outside [0, 1], n_trials < 1) or Error{DegenerateLabels}.
BetaMixtureFit fit_beta_mixture(std::span<const double> scores, std::span<const Label> labels,
                                std::uint64_t seed, const ColdStartOptions& options = {});

// Cold-start table: source_q[i] is the mixture quantile at levels[i]. The
// result has sample_count == 0.
QuantileTable default_quantile_table(const BetaMixtureFit& fit,
                                     std::span<const double> reference_q,
                                     std::span<const double> levels,
                                     std::string version = "v0-coldstart",
                                     std::string fitted_at = {});

}  // namespace scoregate
