#include "scoregate/transforms.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "scoregate/error.hpp"

namespace scoregate {

Score posterior_correct(Score raw, double beta) {
  if (!(beta > 0.0 && beta <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "undersampling ratio must lie in (0, 1]");
  }
  const double y = raw.value();
  const double corrected = beta * y / (1.0 - (1.0 - beta) * y);
  return Score(std::clamp(corrected, 0.0, 1.0));
}

AggregationSpec::AggregationSpec(std::vector<double> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw Error(ErrorCode::InvalidArgument, "aggregation needs at least one weight");
  for (double w : weights_) {
    if (!std::isfinite(w) || w < 0.0) {
      throw Error(ErrorCode::InvalidArgument, "aggregation weights must be finite and >= 0");
    }
  }
  const double total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-12) {
    throw Error(ErrorCode::InvalidArgument, "aggregation weights must sum to 1");
  }
}

Score aggregate(std::span<const Score> corrected, const AggregationSpec& spec) {
  const auto weights = spec.weights();
  if (corrected.size() != weights.size()) {
    throw Error(ErrorCode::LengthMismatch, "aggregate: " + std::to_string(corrected.size()) +
                                               " scores for " + std::to_string(weights.size()) +
                                               " weights");
  }
  double sum = 0.0;
  double lo = 1.0;
  double hi = 0.0;
  for (std::size_t i = 0; i < corrected.size(); ++i) {
    const double s = corrected[i].value();
    sum += weights[i] * s;
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  return Score(std::clamp(sum, lo, hi));
}

Score quantile_map(Score y, const QuantileTable& table) { return Score(table.map(y.value())); }

namespace {

Score run_expert(const Event& event, const ExpertSpec& expert, const BackendRegistry& backends) {
  const ExpertBackend* backend = backends.find(expert.backend_ref);
  if (backend == nullptr) {
    throw Error(ErrorCode::BackendUnavailable,
                expert.model_id + ": backend '" + expert.backend_ref + "' is not registered");
  }
  try {
    return backend->score(event);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::BackendUnavailable) throw;
    throw Error(ErrorCode::BackendUnavailable, expert.model_id + ": " + e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorCode::BackendUnavailable, expert.model_id + ": " + e.what());
  }
}

}  // namespace

Score aggregated_score(const Event& event, const PredictorSpec& spec,
                       const BackendRegistry& backends) {
  const auto& experts = spec.experts();
  if (spec.is_single_expert()) return run_expert(event, experts.front(), backends);

  const auto& weights = spec.weights();
  double sum = 0.0;
  double lo = 1.0;
  double hi = 0.0;
  for (std::size_t k = 0; k < experts.size(); ++k) {
    Score s = run_expert(event, experts[k], backends);
    if (spec.apply_posterior_correction()) s = posterior_correct(s, experts[k].undersampling_ratio);
    sum += weights[k] * s.value();
    lo = std::min(lo, s.value());
    hi = std::max(hi, s.value());
  }
  return Score(std::clamp(sum, lo, hi));
}

ScoreResponse predict(const Event& event, const PredictorSpec& spec,
                      const BackendRegistry& backends, const QuantileTable& table) {
  const auto start = std::chrono::steady_clock::now();
  const Score mapped = quantile_map(aggregated_score(event, spec, backends), table);
  const auto elapsed = std::chrono::steady_clock::now() - start;
  return ScoreResponse{event.event_id, spec.predictor_id(), mapped,
                       std::chrono::duration_cast<std::chrono::microseconds>(elapsed).count(),
                       false};
}

ScoreResponse predict(const Event& event, const PredictorSpec& spec,
                      const BackendRegistry& backends, const TableSet& tables) {
  const auto& ref = spec.quantile_table_ref();
  auto it = tables.find(ref);
  if (it != tables.end() && it->second) return predict(event, spec, backends, *it->second);
  if (ref == kIdentityTableRef) {
    static const QuantileTable kIdentity = QuantileTable::identity();
    return predict(event, spec, backends, kIdentity);
  }
  throw Error(ErrorCode::UnknownQuantileTable,
              spec.predictor_id() + ": quantile table '" + ref + "' is not loaded");
}

}  // namespace scoregate
