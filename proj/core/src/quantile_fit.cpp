#include "scoregate/quantile_fit.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "scoregate/coldstart.hpp"
#include "scoregate/error.hpp"

namespace scoregate {

void SampleSet::validate() const {
  if (scores.empty()) throw Error(ErrorCode::EmptySampleSet, "sample set is empty");
  for (double y : scores) {
    if (!(y >= 0.0 && y <= 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "sample " + std::to_string(y) + " outside [0, 1]");
    }
  }
}

void SampleSizeQuery::validate() const {
  if (!(alert_rate > 0.0 && alert_rate < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "alert rate must lie in (0, 1)");
  }
  if (!(relative_error > 0.0)) throw Error(ErrorCode::InvalidArgument, "relative error must be > 0");
  if (!(z_score > 0.0) || !std::isfinite(z_score)) {
    throw Error(ErrorCode::InvalidArgument, "z-score must be a positive finite number");
  }
}

std::uint64_t required_samples(const SampleSizeQuery& query) {
  query.validate();
  const double a = query.alert_rate;
  const double n = query.z_score * query.z_score * (1.0 - a) /
                   (query.relative_error * query.relative_error * a);
  // ceil, tolerant of the last-ulp noise in an exact integer quotient
  const double rounded = std::ceil(n - 1e-9 * std::max(1.0, n));
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::max(rounded, 0.0)));
}

std::vector<double> uniform_levels(std::size_t count) {
  if (count < 2) throw Error(ErrorCode::InvalidArgument, "need at least two probability levels");
  std::vector<double> levels(count);
  const double step = static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) levels[i] = static_cast<double>(i) / step;
  return levels;
}

double empirical_quantile(std::span<const double> sorted, double level) {
  if (sorted.empty()) throw Error(ErrorCode::EmptySampleSet, "quantile of an empty sample");
  level = std::clamp(level, 0.0, 1.0);
  const double h = level * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

namespace {

// 0.9 Beta(1, 12) + 0.1 Beta(2, 3): mean ~0.12, about 3% of the mass above
// 0.5.
constexpr BetaMixtureFit kSkewedReference{0.1, 1.0, 12.0, 2.0, 3.0, 0.0, 0, 0};

}  // namespace

std::vector<double> builtin_reference_quantiles(BuiltinReference kind,
                                                std::span<const double> levels) {
  if (levels.size() < 2) throw Error(ErrorCode::InvalidArgument, "need at least two levels");
  if (!std::is_sorted(levels.begin(), levels.end())) {
    throw Error(ErrorCode::LevelsNotSorted, "probability levels must be sorted");
  }
  if (levels.front() != 0.0 || levels.back() != 1.0) {
    throw Error(ErrorCode::InvalidArgument, "probability levels must start at 0 and end at 1");
  }
  std::vector<double> reference(levels.size());
  for (std::size_t i = 0; i < levels.size(); ++i) {
    reference[i] = kind == BuiltinReference::Uniform ? levels[i]
                                                     : mixture_quantile(levels[i], kSkewedReference);
    if (i > 0 && !(reference[i] > reference[i - 1])) {
      throw Error(ErrorCode::LevelsNotSorted, "probability levels must be strictly increasing");
    }
  }
  reference.front() = 0.0;
  reference.back() = 1.0;
  return reference;
}

std::optional<BuiltinReference> parse_builtin_reference(std::string_view name) {
  if (name == "uniform") return BuiltinReference::Uniform;
  if (name == "skewed") return BuiltinReference::Skewed;
  return std::nullopt;
}

FittedTable fit_quantile_table(const SampleSet& samples, std::span<const double> reference_q,
                               std::span<const double> levels, const FitOptions& options) {
  samples.validate();
  if (levels.size() != reference_q.size()) {
    throw Error(ErrorCode::LengthMismatch, "levels and reference quantiles differ in length");
  }
  if (levels.size() < 2) throw Error(ErrorCode::InvalidArgument, "need at least two levels");
  if (!std::is_sorted(levels.begin(), levels.end())) {
    throw Error(ErrorCode::LevelsNotSorted, "probability levels must be sorted");
  }
  for (double level : levels) {
    if (!(level >= 0.0 && level <= 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "probability level outside [0, 1]");
    }
  }

  std::vector<double> sorted = samples.scores;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> source(levels.size());
  for (std::size_t i = 0; i < levels.size(); ++i) source[i] = empirical_quantile(sorted, levels[i]);
  source.front() = 0.0;
  source.back() = 1.0;

  FittedTable fitted{QuantileTable(std::move(source),
                                   std::vector<double>(reference_q.begin(), reference_q.end()),
                                   options.version, options.fitted_at, sorted.size()),
                     {}};

  // The finest alert rate the table resolves is one minus the largest
  // interior level.
  double finest_rate = 1.0;
  for (double level : levels) {
    if (level > 0.0 && level < 1.0) finest_rate = std::min(finest_rate, 1.0 - level);
  }
  if (finest_rate < 1.0) {
    const auto needed =
        required_samples(SampleSizeQuery{finest_rate, options.relative_error, options.z_score});
    if (sorted.size() < needed) {
      std::ostringstream msg;
      msg << "only " << sorted.size() << " samples; alert rate " << finest_rate
          << " needs " << needed << " for relative error " << options.relative_error
          << " at z=" << options.z_score;
      fitted.warnings.push_back(msg.str());
    }
  }
  return fitted;
}

CoverageReport validate_sample_size_bound(double alert_rate, double relative_error,
                                          double z_score, std::uint64_t trials,
                                          std::uint64_t seed) {
  if (trials < 1000) throw Error(ErrorCode::InvalidArgument, "need at least 1000 trials");
  CoverageReport report;
  report.alert_rate = alert_rate;
  report.relative_error = relative_error;
  report.z_score = z_score;
  report.trials = trials;
  report.seed = seed;
  // an infinite tolerance collapses n to 1
  report.samples_per_trial = required_samples(SampleSizeQuery{alert_rate, relative_error, z_score});
  const std::uint64_t n = report.samples_per_trial;
  const double ideal_k = std::round((1.0 - alert_rate) * static_cast<double>(n + 1));
  const std::uint64_t k = std::clamp<std::uint64_t>(static_cast<std::uint64_t>(std::max(ideal_k, 1.0)), 1, n);
  report.order_statistic = k;
  report.predicted_mean = static_cast<double>(k) / static_cast<double>(n + 1);
  report.predicted_variance = alert_rate * (1.0 - alert_rate) / static_cast<double>(n);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<double> draws(n);
  const double tolerance = relative_error * alert_rate;
  std::uint64_t covered = 0;
  // Welford accumulation of the threshold's mean and variance
  double mean = 0.0;
  double m2 = 0.0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    for (double& u : draws) u = uniform(rng);
    auto kth = draws.begin() + static_cast<std::ptrdiff_t>(k - 1);
    std::nth_element(draws.begin(), kth, draws.end());
    const double threshold = *kth;
    const double rate = 1.0 - threshold;
    if (std::abs(rate - alert_rate) <= tolerance) ++covered;
    const double delta = threshold - mean;
    mean += delta / static_cast<double>(t + 1);
    m2 += delta * (threshold - mean);
  }
  report.coverage = static_cast<double>(covered) / static_cast<double>(trials);
  report.threshold_mean = mean;
  report.threshold_variance = m2 / static_cast<double>(trials - 1);
  return report;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) {
    const auto first = field.find_first_not_of(" \t\r");
    const auto last = field.find_last_not_of(" \t\r");
    fields.push_back(first == std::string::npos ? std::string{} : field.substr(first, last - first + 1));
  }
  return fields;
}

double parse_double(const std::string& text, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const double value = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw Error(ErrorCode::ParseError,
                "line " + std::to_string(line_no) + ": '" + text + "' is not a number");
  }
}

struct CsvHeader {
  std::size_t score = 0;
  std::optional<std::size_t> label;
};

CsvHeader read_header(std::istream& in, bool need_label) {
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") != std::string::npos) break;
  }
  const auto columns = split_csv(line);
  CsvHeader header;
  auto find = [&](std::string_view name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (columns[i] == name) return i;
    }
    return std::nullopt;
  };
  auto score = find("score");
  if (!score) throw Error(ErrorCode::ParseError, "CSV header lacks a 'score' column");
  header.score = *score;
  header.label = find("label");
  if (need_label && !header.label) throw Error(ErrorCode::ParseError, "CSV header lacks a 'label' column");
  return header;
}

}  // namespace

SampleSet read_scores_csv(std::istream& in) {
  const CsvHeader header = read_header(in, false);
  SampleSet samples;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split_csv(line);
    if (header.score >= fields.size()) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": missing score");
    }
    samples.scores.push_back(parse_double(fields[header.score], line_no));
  }
  return samples;
}

SampleSet read_scores_jsonl(std::istream& in, const JsonlFilter& filter) {
  SampleSet samples;
  samples.predictor_id = filter.predictor_id;
  samples.tenant_id = filter.tenant_id;
  samples.window_start = filter.window_start;
  samples.window_end = filter.window_end;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
      if (!filter.predictor_id.empty() && record.at("predictor_id").get<std::string>() != filter.predictor_id) continue;
      if (!filter.tenant_id.empty() && record.at("tenant_id").get<std::string>() != filter.tenant_id) continue;
      if (!filter.window_start.empty() || !filter.window_end.empty()) {
        const auto ts = record.at("timestamp").get<std::string>();
        if (!filter.window_start.empty() && ts < filter.window_start) continue;
        if (!filter.window_end.empty() && ts > filter.window_end) continue;
      }
      samples.scores.push_back(record.at("score").get<double>());
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return samples;
}

LabeledScores read_labeled_csv(std::istream& in) {
  const CsvHeader header = read_header(in, true);
  LabeledScores data;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split_csv(line);
    if (header.score >= fields.size() || *header.label >= fields.size()) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": missing column");
    }
    data.scores.push_back(parse_double(fields[header.score], line_no));
    const std::string& label = fields[*header.label];
    if (label == "1" || label == "true") {
      data.labels.push_back(1);
    } else if (label == "0" || label == "false") {
      data.labels.push_back(0);
    } else {
      throw Error(ErrorCode::ParseError,
                  "line " + std::to_string(line_no) + ": label '" + label + "' is not 0/1");
    }
  }
  return data;
}

}  // namespace scoregate
