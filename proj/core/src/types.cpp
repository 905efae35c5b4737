#include "scoregate/types.hpp"

#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "scoregate/error.hpp"

namespace scoregate {

Score::Score(double value) : value_(value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw Error(ErrorCode::InvalidScore, "score " + std::to_string(value) + " outside [0, 1]");
  }
}

namespace {

std::string optional_string(const nlohmann::json& payload, const char* key) {
  auto it = payload.find(key);
  if (it == payload.end() || it->is_null()) return {};
  if (!it->is_string()) {
    throw Error(ErrorCode::ParseError, std::string("field '") + key + "' must be a string");
  }
  return it->get<std::string>();
}

}  // namespace

Event validate_event(const nlohmann::json& payload) {
  if (!payload.is_object()) {
    throw Error(ErrorCode::ParseError, "request payload must be a JSON object");
  }
  Event event;
  event.event_id = optional_string(payload, "event_id");
  event.tenant_id = optional_string(payload, "tenant");
  if (event.tenant_id.empty()) {
    throw Error(ErrorCode::MissingTenant, "tenant is missing or empty");
  }
  event.geography = optional_string(payload, "geography");
  event.schema_id = optional_string(payload, "schema");

  auto features = payload.find("features");
  if (features == payload.end() || features->is_null()) {
    throw Error(ErrorCode::EmptyFeatureVector, "features are missing");
  }
  if (!features->is_object()) {
    throw Error(ErrorCode::ParseError, "features must be an object of name -> number");
  }
  if (features->empty()) {
    throw Error(ErrorCode::EmptyFeatureVector, "feature vector is empty");
  }
  for (const auto& [name, value] : features->items()) {
    if (!value.is_number()) {
      throw Error(ErrorCode::ParseError, "feature '" + name + "' is not a number");
    }
    const double x = value.get<double>();
    if (!std::isfinite(x)) {
      throw Error(ErrorCode::NonFiniteFeature, "feature '" + name + "' is not finite");
    }
    event.features.emplace(name, x);
  }

  if (auto tags = payload.find("tags"); tags != payload.end() && !tags->is_null()) {
    if (!tags->is_object()) throw Error(ErrorCode::ParseError, "tags must be an object");
    for (const auto& [key, value] : tags->items()) {
      if (!value.is_string()) throw Error(ErrorCode::ParseError, "tag '" + key + "' must be a string");
      event.tags.emplace(key, value.get<std::string>());
    }
  }
  return event;
}

PredictorSpec::PredictorSpec(std::string predictor_id, std::vector<ExpertSpec> experts,
                             std::vector<double> aggregation_weights,
                             std::string quantile_table_ref, bool apply_posterior_correction)
    : predictor_id_(std::move(predictor_id)),
      experts_(std::move(experts)),
      weights_(std::move(aggregation_weights)),
      quantile_table_ref_(std::move(quantile_table_ref)),
      apply_posterior_correction_(apply_posterior_correction) {
  if (predictor_id_.empty()) {
    throw Error(ErrorCode::InvalidArgument, "predictor id must not be empty");
  }
  if (experts_.empty()) {
    throw Error(ErrorCode::InvalidArgument, predictor_id_ + ": predictor needs at least one expert");
  }
  if (weights_.size() != experts_.size()) {
    throw Error(ErrorCode::LengthMismatch,
                predictor_id_ + ": " + std::to_string(experts_.size()) + " experts but " +
                    std::to_string(weights_.size()) + " weights");
  }
  for (const auto& expert : experts_) {
    const double beta = expert.undersampling_ratio;
    if (!(beta > 0.0 && beta <= 1.0)) {
      throw Error(ErrorCode::InvalidArgument,
                  predictor_id_ + ": undersampling ratio of " + expert.model_id + " outside (0, 1]");
    }
    if (expert.backend_ref.empty()) {
      throw Error(ErrorCode::InvalidArgument, predictor_id_ + ": expert without backend reference");
    }
  }
  for (double w : weights_) {
    if (!std::isfinite(w) || w < 0.0) {
      throw Error(ErrorCode::InvalidArgument, predictor_id_ + ": weights must be finite and >= 0");
    }
  }
  const double total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
  if (!(total > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, predictor_id_ + ": weights must sum to a positive value");
  }
  for (double& w : weights_) w /= total;
}

nlohmann::json to_json(const ScoreResponse& response) {
  return nlohmann::json{{"event_id", response.event_id},
                        {"predictor", response.predictor_id},
                        {"score", response.score.value()},
                        {"latency_micros", response.latency_micros}};
}

}  // namespace scoregate
