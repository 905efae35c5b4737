#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "scoregate/error.hpp"
#include "scoregate/types.hpp"
#include "test_support.hpp"

namespace scoregate {
namespace {

using test::code_of;

TEST(Score, AcceptsClosedUnitInterval) {
  EXPECT_EQ(Score(0.0).value(), 0.0);
  EXPECT_EQ(Score(1.0).value(), 1.0);
  EXPECT_EQ(Score(0.25).value(), 0.25);
}

TEST(Score, RejectsOutOfRangeAndNan) {
  EXPECT_EQ(code_of([] { Score(-1e-12); }), ErrorCode::InvalidScore);
  EXPECT_EQ(code_of([] { Score(1.0000001); }), ErrorCode::InvalidScore);
  EXPECT_EQ(code_of([] { Score(std::nan("")); }), ErrorCode::InvalidScore);
}

TEST(ValidateEvent, PassesWellFormedPayload) {
  const auto event = validate_event(nlohmann::json::parse(R"({"tenant":"bank1","features":{"amount":10.0}})"));
  EXPECT_EQ(event.tenant_id, "bank1");
  EXPECT_TRUE(event.event_id.empty());
  ASSERT_EQ(event.features.size(), 1u);
  EXPECT_DOUBLE_EQ(event.features.at("amount"), 10.0);
}

TEST(ValidateEvent, CarriesOptionalFields) {
  const auto event = validate_event(nlohmann::json::parse(
      R"({"event_id":"e1","tenant":"acme","geography":"NAMER","schema":"fraud_v1",
          "features":{"a":1,"b":-2.5},"tags":{"channel":"web"}})"));
  EXPECT_EQ(event.event_id, "e1");
  EXPECT_EQ(event.geography, "NAMER");
  EXPECT_EQ(event.schema_id, "fraud_v1");
  EXPECT_EQ(event.tags.at("channel"), "web");
}

TEST(ValidateEvent, RejectsEmptyTenant) {
  EXPECT_EQ(code_of([] { validate_event(nlohmann::json::parse(R"({"tenant":"","features":{"a":1}})")); }),
            ErrorCode::MissingTenant);
  EXPECT_EQ(code_of([] { validate_event(nlohmann::json::parse(R"({"features":{"a":1}})")); }),
            ErrorCode::MissingTenant);
}

TEST(ValidateEvent, RejectsNonFiniteFeature) {
  nlohmann::json payload{{"tenant", "bank1"}, {"features", {{"amount", std::numeric_limits<double>::quiet_NaN()}}}};
  EXPECT_EQ(code_of([&] { validate_event(payload); }), ErrorCode::NonFiniteFeature);
  payload["features"]["amount"] = std::numeric_limits<double>::infinity();
  EXPECT_EQ(code_of([&] { validate_event(payload); }), ErrorCode::NonFiniteFeature);
}

TEST(ValidateEvent, RejectsEmptyFeatures) {
  EXPECT_EQ(code_of([] { validate_event(nlohmann::json::parse(R"({"tenant":"x","features":{}})")); }),
            ErrorCode::EmptyFeatureVector);
  EXPECT_EQ(code_of([] { validate_event(nlohmann::json::parse(R"({"tenant":"x"})")); }),
            ErrorCode::EmptyFeatureVector);
}

TEST(ValidateEvent, RejectsWrongShapes) {
  EXPECT_EQ(code_of([] { validate_event(nlohmann::json::parse("[1,2]")); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { validate_event(nlohmann::json::parse(R"({"tenant":"x","features":{"a":"1"}})")); }),
            ErrorCode::ParseError);
}

TEST(PredictorSpec, NormalizesWeights) {
  const PredictorSpec spec("p", {{"m1", "b1", 0.1}, {"m2", "b2", 1.0}, {"m3", "b3", 0.5}}, {1.0, 3.0, 6.0}, "t");
  const auto& w = spec.weights();
  EXPECT_NEAR(std::accumulate(w.begin(), w.end(), 0.0), 1.0, 1e-12);
  EXPECT_NEAR(w[0], 0.1, 1e-15);
  EXPECT_NEAR(w[2], 0.6, 1e-15);
  EXPECT_FALSE(spec.is_single_expert());
}

TEST(PredictorSpec, NormalizationHoldsOnRandomWeights) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(1e-6, 1e6);
  for (int t = 0; t < 200; ++t) {
    std::vector<ExpertSpec> experts;
    std::vector<double> weights;
    for (int k = 0; k < 1 + t % 7; ++k) {
      experts.push_back({"m" + std::to_string(k), "b", 1.0});
      weights.push_back(u(rng));
    }
    const PredictorSpec spec("p", experts, weights, "t");
    EXPECT_NEAR(std::accumulate(spec.weights().begin(), spec.weights().end(), 0.0), 1.0, 1e-12);
  }
}

TEST(PredictorSpec, RejectsBadInput) {
  EXPECT_EQ(code_of([] { PredictorSpec("p", {}, {}, "t"); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { PredictorSpec("p", {{"m", "b", 1.0}}, {1.0, 1.0}, "t"); }), ErrorCode::LengthMismatch);
  EXPECT_EQ(code_of([] { PredictorSpec("p", {{"m", "b", 0.0}}, {1.0}, "t"); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { PredictorSpec("p", {{"m", "b", 1.0}}, {-1.0}, "t"); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { PredictorSpec("p", {{"m", "b", 1.0}}, {0.0}, "t"); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { PredictorSpec("", {{"m", "b", 1.0}}, {1.0}, "t"); }), ErrorCode::InvalidArgument);
}

TEST(ErrorCodes, ValidationSplit) {
  EXPECT_TRUE(is_validation_error(ErrorCode::MissingTenant));
  EXPECT_TRUE(is_validation_error(ErrorCode::InvalidTable));
  EXPECT_FALSE(is_validation_error(ErrorCode::BackendUnavailable));
  EXPECT_FALSE(is_validation_error(ErrorCode::NoMatchingRule));
  EXPECT_EQ(to_string(ErrorCode::EmptySampleSet), "EmptySampleSet");
}

}  // namespace
}  // namespace scoregate
