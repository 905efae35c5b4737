#include "scoregate/coldstart.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <random>

#include <boost/math/special_functions/beta.hpp>
#include <nlohmann/json.hpp>

#include "scoregate/error.hpp"

namespace scoregate {

void BetaMixtureFit::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!(w >= 0.0 && w <= 1.0)) throw Error(ErrorCode::InvalidArgument, "mixture weight outside [0, 1]");
  if (!positive(alpha0) || !positive(beta0) || !positive(alpha1) || !positive(beta1)) {
    throw Error(ErrorCode::InvalidArgument, "mixture shape parameters must be positive");
  }
  if (!(jsd >= 0.0)) throw Error(ErrorCode::InvalidArgument, "jsd must be >= 0");
}

nlohmann::json to_json(const BetaMixtureFit& fit) {
  return nlohmann::json{{"w", fit.w},           {"alpha0", fit.alpha0}, {"beta0", fit.beta0},
                        {"alpha1", fit.alpha1}, {"beta1", fit.beta1},   {"jsd", fit.jsd},
                        {"trials_run", fit.trials_run}, {"seed", fit.seed}};
}

BetaMixtureFit beta_mixture_fit_from_json(const nlohmann::json& document) {
  BetaMixtureFit fit;
  try {
    fit.w = document.at("w").get<double>();
    fit.alpha0 = document.at("alpha0").get<double>();
    fit.beta0 = document.at("beta0").get<double>();
    fit.alpha1 = document.at("alpha1").get<double>();
    fit.beta1 = document.at("beta1").get<double>();
    fit.jsd = document.value("jsd", 0.0);
    fit.trials_run = document.value("trials_run", 0);
    fit.seed = document.value("seed", std::uint64_t{0});
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("beta mixture fit: ") + e.what());
  }
  fit.validate();
  return fit;
}

EmpiricalDensity empirical_density(std::span<const double> scores, std::size_t bins) {
  if (bins == 0) throw Error(ErrorCode::InvalidArgument, "histogram needs at least one bin");
  if (scores.empty()) throw Error(ErrorCode::EmptySampleSet, "no scores to histogram");
  EmpiricalDensity density;
  density.bin_edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) {
    density.bin_edges[i] = static_cast<double>(i) / static_cast<double>(bins);
  }
  std::vector<std::size_t> counts(bins, 0);
  for (double y : scores) {
    if (!(y >= 0.0 && y <= 1.0)) throw Error(ErrorCode::InvalidArgument, "score outside [0, 1]");
    auto bin = static_cast<std::size_t>(y * static_cast<double>(bins));
    ++counts[std::min(bin, bins - 1)];
  }
  density.masses.resize(bins);
  const double n = static_cast<double>(scores.size());
  for (std::size_t i = 0; i < bins; ++i) density.masses[i] = static_cast<double>(counts[i]) / n;
  return density;
}

EmpiricalDensity mixture_density(const BetaMixtureFit& fit, std::span<const double> bin_edges) {
  if (bin_edges.size() < 2) throw Error(ErrorCode::InvalidArgument, "need at least two bin edges");
  EmpiricalDensity density;
  density.bin_edges.assign(bin_edges.begin(), bin_edges.end());
  density.masses.resize(bin_edges.size() - 1);
  double previous = mixture_cdf(bin_edges.front(), fit);
  for (std::size_t i = 0; i + 1 < bin_edges.size(); ++i) {
    const double next = mixture_cdf(bin_edges[i + 1], fit);
    density.masses[i] = std::max(0.0, next - previous);
    previous = next;
  }
  return density;
}

double beta_pdf(double y, double alpha, double beta) {
  if (y < 0.0 || y > 1.0) return 0.0;
  const double log_norm = std::lgamma(alpha + beta) - std::lgamma(alpha) - std::lgamma(beta);
  if (y == 0.0) {
    if (alpha < 1.0) return std::numeric_limits<double>::infinity();
    return alpha == 1.0 ? std::exp(log_norm) : 0.0;
  }
  if (y == 1.0) {
    if (beta < 1.0) return std::numeric_limits<double>::infinity();
    return beta == 1.0 ? std::exp(log_norm) : 0.0;
  }
  return std::exp(log_norm + (alpha - 1.0) * std::log(y) + (beta - 1.0) * std::log1p(-y));
}

double mixture_pdf(double y, const BetaMixtureFit& fit) {
  const double negative = beta_pdf(y, fit.alpha0, fit.beta0);
  const double positive = beta_pdf(y, fit.alpha1, fit.beta1);
  // avoid 0 * inf when one component carries no weight
  double pdf = 0.0;
  if (fit.w < 1.0) pdf += (1.0 - fit.w) * negative;
  if (fit.w > 0.0) pdf += fit.w * positive;
  return pdf;
}

double mixture_cdf(double y, const BetaMixtureFit& fit) {
  if (y <= 0.0) return 0.0;
  if (y >= 1.0) return 1.0;
  return (1.0 - fit.w) * boost::math::ibeta(fit.alpha0, fit.beta0, y) +
         fit.w * boost::math::ibeta(fit.alpha1, fit.beta1, y);
}

double mixture_quantile(double level, const BetaMixtureFit& fit) {
  if (level <= 0.0) return 0.0;
  if (level >= 1.0) return 1.0;
  double lo = 0.0;
  double hi = 1.0;
  for (int iter = 0; iter < 200 && hi - lo > 1e-15; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mixture_cdf(mid, fit) < level) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double beta_raw_moment(int r, double alpha, double beta) {
  double moment = 1.0;
  for (int j = 0; j < r; ++j) moment *= (alpha + j) / (alpha + beta + j);
  return moment;
}

double mixture_raw_moment(int r, const BetaMixtureFit& fit) {
  if (r < 1 || r > 4) throw Error(ErrorCode::InvalidArgument, "raw moment order must be 1..4");
  return (1.0 - fit.w) * beta_raw_moment(r, fit.alpha0, fit.beta0) +
         fit.w * beta_raw_moment(r, fit.alpha1, fit.beta1);
}

std::array<double, 4> empirical_raw_moments(std::span<const double> scores) {
  if (scores.empty()) throw Error(ErrorCode::EmptySampleSet, "no scores for moments");
  std::array<double, 4> sums{};
  for (double y : scores) {
    double power = y;
    for (auto& sum : sums) {
      sum += power;
      power *= y;
    }
  }
  for (auto& sum : sums) sum /= static_cast<double>(scores.size());
  return sums;
}

double moment_loss(const BetaMixtureFit& fit, const std::array<double, 4>& empirical_moments) {
  double loss = 0.0;
  for (int r = 1; r <= 4; ++r) {
    const double diff = mixture_raw_moment(r, fit) - empirical_moments[static_cast<std::size_t>(r - 1)];
    loss += std::pow(diff * diff, 1.0 / r);
  }
  return loss;
}

double jensen_shannon_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw Error(ErrorCode::LengthMismatch, "JSD over histograms of different length");
  double divergence = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    if (p[i] > 0.0) divergence += 0.5 * p[i] * std::log2(p[i] / m);
    if (q[i] > 0.0) divergence += 0.5 * q[i] * std::log2(q[i] / m);
  }
  return std::clamp(divergence, 0.0, 1.0);
}

namespace {

using Shapes = std::array<double, 4>;  // log alpha0, log beta0, log alpha1, log beta1

BetaMixtureFit to_fit(double w, const Shapes& log_shapes) {
  BetaMixtureFit fit;
  fit.w = w;
  fit.alpha0 = std::exp(log_shapes[0]);
  fit.beta0 = std::exp(log_shapes[1]);
  fit.alpha1 = std::exp(log_shapes[2]);
  fit.beta1 = std::exp(log_shapes[3]);
  return fit;
}

// DE/rand/1/bin over the log-shape box.
Shapes differential_evolution(double w, const std::array<double, 4>& moments,
                              const DifferentialEvolutionOptions& options, std::uint64_t seed,
                              int trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial)};
  std::mt19937_64 rng(seq);
  const double lower = std::log(options.shape_lower);
  const double upper = std::log(options.shape_upper);
  std::uniform_real_distribution<double> in_box(lower, upper);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int np = std::max(options.population, 4);
  std::uniform_int_distribution<int> pick(0, np - 1);
  std::uniform_int_distribution<int> pick_dim(0, 3);

  std::vector<Shapes> population(static_cast<std::size_t>(np));
  std::vector<double> cost(static_cast<std::size_t>(np));
  for (std::size_t i = 0; i < population.size(); ++i) {
    for (double& x : population[i]) x = in_box(rng);
    cost[i] = moment_loss(to_fit(w, population[i]), moments);
  }

  for (int gen = 0; gen < options.generations; ++gen) {
    for (int i = 0; i < np; ++i) {
      int a = 0;
      int b = 0;
      int c = 0;
      do { a = pick(rng); } while (a == i);
      do { b = pick(rng); } while (b == i || b == a);
      do { c = pick(rng); } while (c == i || c == a || c == b);
      const auto& xa = population[static_cast<std::size_t>(a)];
      const auto& xb = population[static_cast<std::size_t>(b)];
      const auto& xc = population[static_cast<std::size_t>(c)];
      const auto& xi = population[static_cast<std::size_t>(i)];
      Shapes trial_vector = xi;
      const int forced = pick_dim(rng);
      for (int d = 0; d < 4; ++d) {
        if (d == forced || unit(rng) < options.crossover) {
          double v = xa[d] + options.mutation * (xb[d] - xc[d]);
          // out-of-box components land between the base vector and the bound
          if (v < lower) v = lower + unit(rng) * (xa[d] - lower);
          if (v > upper) v = upper - unit(rng) * (upper - xa[d]);
          trial_vector[d] = v;
        }
      }
      const double trial_cost = moment_loss(to_fit(w, trial_vector), moments);
      if (trial_cost <= cost[static_cast<std::size_t>(i)]) {
        population[static_cast<std::size_t>(i)] = trial_vector;
        cost[static_cast<std::size_t>(i)] = trial_cost;
      }
    }
  }
  const auto best = std::min_element(cost.begin(), cost.end()) - cost.begin();
  return population[static_cast<std::size_t>(best)];
}

// Levenberg-Marquardt on the relative moment residuals, started from the DE
// winner. DE alone stalls on the creases the fractional powers put into the
// loss; the caller keeps this result only if the loss actually drops.
Shapes polish(double w, Shapes x, const std::array<double, 4>& moments,
              const DifferentialEvolutionOptions& options) {
  const double lower = std::log(options.shape_lower);
  const double upper = std::log(options.shape_upper);
  auto residuals = [&](const Shapes& at) {
    const auto fit = to_fit(w, at);
    std::array<double, 4> r{};
    for (int i = 0; i < 4; ++i) {
      const auto k = static_cast<std::size_t>(i);
      r[k] = mixture_raw_moment(i + 1, fit) / moments[k] - 1.0;
    }
    return r;
  };
  auto norm2 = [](const std::array<double, 4>& r) {
    double s = 0.0;
    for (double v : r) s += v * v;
    return s;
  };

  auto r = residuals(x);
  double damping = 1e-3;
  for (int iter = 0; iter < 100 && norm2(r) > 1e-24; ++iter) {
    double jac[4][4];
    for (std::size_t j = 0; j < 4; ++j) {
      Shapes step = x;
      step[j] += 1e-6;
      const auto rs = residuals(step);
      for (std::size_t i = 0; i < 4; ++i) jac[i][j] = (rs[i] - r[i]) / 1e-6;
    }
    // (J'J + damping * diag(J'J)) dx = -J'r, solved by Gauss-Jordan
    double a[4][5];
    for (std::size_t p = 0; p < 4; ++p) {
      for (std::size_t q = 0; q < 4; ++q) {
        double sum = 0.0;
        for (std::size_t i = 0; i < 4; ++i) sum += jac[i][p] * jac[i][q];
        a[p][q] = p == q ? sum * (1.0 + damping) : sum;
      }
      double g = 0.0;
      for (std::size_t i = 0; i < 4; ++i) g += jac[i][p] * r[i];
      a[p][4] = -g;
    }
    bool singular = false;
    for (std::size_t c = 0; c < 4 && !singular; ++c) {
      std::size_t pivot = c;
      for (std::size_t q = c + 1; q < 4; ++q) {
        if (std::abs(a[q][c]) > std::abs(a[pivot][c])) pivot = q;
      }
      std::swap(a[c], a[pivot]);
      if (!(std::abs(a[c][c]) > 1e-300)) {
        singular = true;
        break;
      }
      for (std::size_t q = 0; q < 4; ++q) {
        if (q == c) continue;
        const double f = a[q][c] / a[c][c];
        for (std::size_t k = c; k < 5; ++k) a[q][k] -= f * a[c][k];
      }
    }
    if (singular) break;

    Shapes next;
    for (std::size_t j = 0; j < 4; ++j) next[j] = std::clamp(x[j] + a[j][4] / a[j][j], lower, upper);
    const auto rn = residuals(next);
    if (norm2(rn) < norm2(r)) {
      x = next;
      r = rn;
      damping *= 0.3;
    } else {
      damping *= 10.0;
      if (damping > 1e8) break;
    }
  }
  return x;
}

}  // namespace

BetaMixtureFit fit_beta_mixture(std::span<const double> scores, std::span<const Label> labels,
                                std::uint64_t seed, const ColdStartOptions& options) {
  if (scores.size() != labels.size()) {
    throw Error(ErrorCode::LengthMismatch, "scores and labels differ in length");
  }
  if (scores.size() < 100) {
    throw Error(ErrorCode::InvalidArgument, "cold-start fit needs at least 100 labeled scores");
  }
  if (options.n_trials < 1) throw Error(ErrorCode::InvalidArgument, "n_trials must be >= 1");
  const auto positives = static_cast<std::size_t>(std::count_if(labels.begin(), labels.end(), [](Label l) { return l != 0; }));
  if (positives == 0 || positives == labels.size()) {
    throw Error(ErrorCode::DegenerateLabels, "labels must contain both classes");
  }
  const double w = static_cast<double>(positives) / static_cast<double>(labels.size());
  const auto moments = empirical_raw_moments(scores);
  const EmpiricalDensity empirical = empirical_density(scores, options.histogram_bins);

  auto run = [&](int trial) {
    const Shapes searched = differential_evolution(w, moments, options.search, seed, trial);
    BetaMixtureFit fit = to_fit(w, searched);
    if (options.polish) {
      const BetaMixtureFit polished = to_fit(w, polish(w, searched, moments, options.search));
      if (moment_loss(polished, moments) < moment_loss(fit, moments)) fit = polished;
    }
    fit.jsd = jensen_shannon_divergence(empirical.masses,
                                        mixture_density(fit, empirical.bin_edges).masses);
    return fit;
  };

  std::vector<BetaMixtureFit> candidates;
  candidates.reserve(static_cast<std::size_t>(options.n_trials));
  if (options.parallel && options.n_trials > 1) {
    std::vector<std::future<BetaMixtureFit>> pending;
    for (int t = 0; t < options.n_trials; ++t) pending.push_back(std::async(std::launch::async, run, t));
    for (auto& f : pending) candidates.push_back(f.get());
  } else {
    for (int t = 0; t < options.n_trials; ++t) candidates.push_back(run(t));
  }

  std::size_t best = 0;
  for (std::size_t t = 1; t < candidates.size(); ++t) {
    if (candidates[t].jsd < candidates[best].jsd) best = t;
  }
  BetaMixtureFit result = candidates[best];
  result.trials_run = options.n_trials;
  result.seed = seed;
  return result;
}

QuantileTable default_quantile_table(const BetaMixtureFit& fit,
                                     std::span<const double> reference_q,
                                     std::span<const double> levels, std::string version,
                                     std::string fitted_at) {
  fit.validate();
  if (levels.size() != reference_q.size()) {
    throw Error(ErrorCode::LengthMismatch, "levels and reference quantiles differ in length");
  }
  if (!std::is_sorted(levels.begin(), levels.end())) {
    throw Error(ErrorCode::LevelsNotSorted, "probability levels must be sorted");
  }
  std::vector<double> source(levels.size());
  double previous = 0.0;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    source[i] = std::max(previous, mixture_quantile(levels[i], fit));
    previous = source[i];
  }
  if (!source.empty()) {
    source.front() = 0.0;
    source.back() = 1.0;
  }
  return QuantileTable(std::move(source), std::vector<double>(reference_q.begin(), reference_q.end()),
                       std::move(version), std::move(fitted_at), 0);
}

}  // namespace scoregate
