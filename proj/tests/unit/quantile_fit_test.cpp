#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "scoregate/quantile_fit.hpp"
#include "test_support.hpp"

namespace scoregate {
namespace {

using test::code_of;

TEST(RequiredSamples, Examples) {
  EXPECT_EQ(required_samples({0.01, 0.1, 1.96}), 38032u);
  EXPECT_EQ(required_samples({0.5, 1.0, 1.0}), 1u);
  const auto n = required_samples({0.05, 0.2, 1.96});
  EXPECT_NEAR(static_cast<double>(n) * 0.05, 1.96 * 1.96 / 0.04 * 0.95, 0.05);
  EXPECT_NEAR(static_cast<double>(n) * 0.05, 96.04, 5.0);
}

TEST(RequiredSamples, MonotoneOnGrid) {
  for (double a : {0.001, 0.01, 0.05, 0.2}) {
    for (double d : {0.05, 0.1, 0.3}) {
      for (double z : {1.0, 1.96, 2.58}) {
        const auto n = required_samples({a, d, z});
        EXPECT_GT(n, required_samples({a * 2, d, z}));
        EXPECT_GT(n, required_samples({a, d * 2, z}));
        EXPECT_LT(n, required_samples({a, d, z * 2}));
      }
    }
  }
}

TEST(RequiredSamples, RejectsBadQuery) {
  EXPECT_EQ(code_of([] { required_samples({0.0, 0.1, 1.96}); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { required_samples({1.0, 0.1, 1.96}); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { required_samples({0.1, 0.0, 1.96}); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { required_samples({0.1, 0.1, -1.0}); }), ErrorCode::InvalidArgument);
}

TEST(Levels, UniformGrid) {
  const auto levels = uniform_levels(1001);
  ASSERT_EQ(levels.size(), 1001u);
  EXPECT_EQ(levels.front(), 0.0);
  EXPECT_EQ(levels.back(), 1.0);
  EXPECT_NEAR(levels[500], 0.5, 1e-15);
}

TEST(EmpiricalQuantile, Type7) {
  const std::vector<double> sorted{1, 2, 3, 4};
  EXPECT_DOUBLE_EQ(empirical_quantile(sorted, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(empirical_quantile(sorted, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(empirical_quantile(sorted, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(empirical_quantile(sorted, 1.0 / 3.0), 2.0);
}

TEST(BuiltinReference, PinnedAndIncreasing) {
  const auto levels = uniform_levels(101);
  for (auto kind : {BuiltinReference::Uniform, BuiltinReference::Skewed}) {
    const auto q = builtin_reference_quantiles(kind, levels);
    EXPECT_EQ(q.front(), 0.0);
    EXPECT_EQ(q.back(), 1.0);
    for (std::size_t i = 1; i < q.size(); ++i) EXPECT_LT(q[i - 1], q[i]);
  }
  EXPECT_EQ(parse_builtin_reference("uniform"), BuiltinReference::Uniform);
  EXPECT_EQ(parse_builtin_reference("skewed"), BuiltinReference::Skewed);
  EXPECT_FALSE(parse_builtin_reference("other").has_value());
}

TEST(FitQuantileTable, UniformSamplesGiveIdentity) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SampleSet samples;
  for (int i = 0; i < 100000; ++i) samples.scores.push_back(u(rng));
  const auto levels = uniform_levels();
  const auto reference = builtin_reference_quantiles(BuiltinReference::Uniform, levels);
  const auto fitted = fit_quantile_table(samples, reference, levels);
  double sup = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    const double y = i / 1000.0;
    sup = std::max(sup, std::abs(fitted.table.map(y) - y));
  }
  EXPECT_LT(sup, 0.01);
  EXPECT_EQ(fitted.table.sample_count(), 100000u);
  EXPECT_FALSE(fitted.table.is_cold_start());
}

TEST(FitQuantileTable, AtomCollapsesToSingleKnot) {
  SampleSet samples;
  samples.scores.assign(500, 0.5);
  const auto levels = uniform_levels();
  const auto reference = builtin_reference_quantiles(BuiltinReference::Uniform, levels);
  const auto table = fit_quantile_table(samples, reference, levels).table;
  ASSERT_EQ(table.knot_sources().size(), 3u);
  EXPECT_EQ(table.knot_sources()[0], 0.0);
  EXPECT_EQ(table.knot_sources()[1], 0.5);
  EXPECT_EQ(table.knot_sources()[2], 1.0);
}

TEST(FitQuantileTable, SourceQuantilesMonotoneInLevel) {
  std::mt19937_64 rng(22);
  SampleSet samples;
  for (int i = 0; i < 3000; ++i) samples.scores.push_back(test::beta_draw(rng, 0.7, 9.0));
  const auto levels = uniform_levels(257);
  const auto reference = builtin_reference_quantiles(BuiltinReference::Skewed, levels);
  const auto table = fit_quantile_table(samples, reference, levels).table;
  const auto s = table.source_quantiles();
  for (std::size_t i = 1; i < s.size(); ++i) EXPECT_LE(s[i - 1], s[i]);
  EXPECT_EQ(s.front(), 0.0);
  EXPECT_EQ(s.back(), 1.0);
}

TEST(FitQuantileTable, WarnsBelowBound) {
  SampleSet samples;
  for (int i = 0; i < 50; ++i) samples.scores.push_back(i / 50.0);
  const auto levels = uniform_levels(11);
  const auto reference = builtin_reference_quantiles(BuiltinReference::Uniform, levels);
  EXPECT_FALSE(fit_quantile_table(samples, reference, levels).warnings.empty());
}

TEST(FitQuantileTable, Errors) {
  const auto levels = uniform_levels(11);
  const auto reference = builtin_reference_quantiles(BuiltinReference::Uniform, levels);
  EXPECT_EQ(code_of([&] { fit_quantile_table(SampleSet{}, reference, levels); }), ErrorCode::EmptySampleSet);
  SampleSet samples;
  samples.scores = {0.1, 0.2};
  auto shuffled = levels;
  std::swap(shuffled[2], shuffled[3]);
  EXPECT_EQ(code_of([&] { fit_quantile_table(samples, reference, shuffled); }), ErrorCode::LevelsNotSorted);
  const auto short_ref = builtin_reference_quantiles(BuiltinReference::Uniform, uniform_levels(5));
  EXPECT_EQ(code_of([&] { fit_quantile_table(samples, short_ref, levels); }), ErrorCode::LengthMismatch);
  samples.scores.push_back(1.5);
  EXPECT_EQ(code_of([&] { fit_quantile_table(samples, reference, levels); }), ErrorCode::InvalidArgument);
}

TEST(SampleSizeBound, CoverageNearConfidence) {
  const auto report = validate_sample_size_bound(0.05, 0.2, 1.96, 5000, 31);
  EXPECT_GE(report.coverage, 0.93);
  EXPECT_LE(report.coverage, 0.97);
  EXPECT_NEAR(report.threshold_variance / report.predicted_variance, 1.0, 0.15);
  const double se = std::sqrt(report.threshold_variance / static_cast<double>(report.trials));
  EXPECT_LE(std::abs(report.threshold_mean - 0.95), 3 * se + 1.0 / static_cast<double>(report.samples_per_trial));
}

TEST(SampleSizeBound, InfiniteToleranceCoversEverything) {
  const auto report = validate_sample_size_bound(0.5, 1e9, 1.96, 1000, 32);
  EXPECT_EQ(report.coverage, 1.0);
}

TEST(SampleSizeBound, NeedsEnoughTrials) {
  EXPECT_EQ(code_of([] { validate_sample_size_bound(0.05, 0.2, 1.96, 999, 1); }), ErrorCode::InvalidArgument);
}

TEST(Readers, Csv) {
  std::istringstream in("score,label\n0.1,0\n0.9,1\n0.5,true\n");
  const auto samples = read_scores_csv(in);
  EXPECT_EQ(samples.scores, (std::vector<double>{0.1, 0.9, 0.5}));
  std::istringstream again("score,label\n0.1,0\n0.9,1\n0.5,true\n");
  const auto labeled = read_labeled_csv(again);
  EXPECT_EQ(labeled.labels, (std::vector<Label>{0, 1, 1}));
}

TEST(Readers, CsvErrors) {
  std::istringstream missing("value\n0.1\n");
  EXPECT_EQ(code_of([&] { read_scores_csv(missing); }), ErrorCode::ParseError);
  std::istringstream bad("score\nabc\n");
  EXPECT_EQ(code_of([&] { read_scores_csv(bad); }), ErrorCode::ParseError);
}

TEST(Readers, JsonlFilters) {
  std::istringstream in(
      R"({"event_id":"a","tenant_id":"t1","predictor_id":"p","score":0.1,"config_version":"v","timestamp":"2024-01-01T00:00:00Z"}
{"event_id":"b","tenant_id":"t2","predictor_id":"p","score":0.2,"config_version":"v","timestamp":"2024-01-02T00:00:00Z"}
{"event_id":"c","tenant_id":"t1","predictor_id":"q","score":0.3,"config_version":"v","timestamp":"2024-01-03T00:00:00Z"}
{"event_id":"d","tenant_id":"t1","predictor_id":"p","score":0.4,"config_version":"v","timestamp":"2024-01-04T00:00:00Z"}
)");
  const auto samples = read_scores_jsonl(in, {"p", "t1", "", "2024-01-03T00:00:00Z"});
  EXPECT_EQ(samples.scores, (std::vector<double>{0.1}));
  EXPECT_EQ(samples.tenant_id, "t1");
}

}  // namespace
}  // namespace scoregate
