#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace scoregate {

// A score in the closed interval [0, 1]. Construction outside the interval
// (or from NaN) throws Error{InvalidScore}.
class Score {
 public:
  constexpr Score() = default;
  explicit Score(double value);

  constexpr double value() const noexcept { return value_; }

  friend constexpr bool operator==(Score a, Score b) noexcept { return a.value_ == b.value_; }
  friend constexpr auto operator<=>(Score a, Score b) noexcept { return a.value_ <=> b.value_; }

 private:
  double value_ = 0.0;
};

// Binary outcome label (0 or 1); bytes rather than bool so labels can be
// viewed through std::span.
using Label = std::uint8_t;

using FeatureMap = std::map<std::string, double, std::less<>>;

// A scoring request after validation. Immutable once built.
struct Event {
  std::string event_id;
  std::string tenant_id;
  std::string geography;
  std::string schema_id;
  FeatureMap features;
  // Extra intent dimensions. Carried through but never used for matching.
  std::map<std::string, std::string, std::less<>> tags;
};

// Parses the /v1/score wire payload:
//   {event_id?, tenant, geography?, schema?, features:{name:number}, tags?}
// Throws Error{MissingTenant | EmptyFeatureVector | NonFiniteFeature |
// ParseError}. A missing event_id is left empty for the caller to assign.
Event validate_event(const nlohmann::json& payload);

struct ExpertSpec {
  std::string model_id;
  std::string backend_ref;
  // Fraction of the negative class kept during training, in (0, 1].
  double undersampling_ratio = 1.0;
};

// Declarative predictor: a set of experts, their aggregation weights and the
// quantile table applied last. Weights are normalized to sum to one here so
// the request path only multiplies and adds.
class PredictorSpec {
 public:
  PredictorSpec(std::string predictor_id, std::vector<ExpertSpec> experts,
                std::vector<double> aggregation_weights, std::string quantile_table_ref,
                bool apply_posterior_correction = true);

  const std::string& predictor_id() const noexcept { return predictor_id_; }
  const std::vector<ExpertSpec>& experts() const noexcept { return experts_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  const std::string& quantile_table_ref() const noexcept { return quantile_table_ref_; }
  bool apply_posterior_correction() const noexcept { return apply_posterior_correction_; }
  bool is_single_expert() const noexcept { return experts_.size() == 1; }

 private:
  std::string predictor_id_;
  std::vector<ExpertSpec> experts_;
  std::vector<double> weights_;
  std::string quantile_table_ref_;
  bool apply_posterior_correction_;
};

struct ScoreResponse {
  std::string event_id;
  std::string predictor_id;
  Score score;
  std::int64_t latency_micros = 0;
  // Shadow responses only ever reach the shadow sink.
  bool shadow = false;
};

// {event_id, predictor, score, latency_micros}
nlohmann::json to_json(const ScoreResponse& response);

}  // namespace scoregate
