#pragma once

#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "scoregate/backend.hpp"
#include "scoregate/quantile_table.hpp"
#include "scoregate/types.hpp"

namespace scoregate {

// Reverses the score inflation caused by keeping only a fraction `beta` of
// the negative class at training time:
//
//   T(y) = beta * y / (1 - (1 - beta) * y)
//
// Strictly increasing in y for fixed beta, with fixed points 0 and 1.
// Throws Error{InvalidArgument} when beta is outside (0, 1].
Score posterior_correct(Score raw, double beta);

// Aggregation weights, non-negative and summing to 1 (within 1e-12).
class AggregationSpec {
 public:
  explicit AggregationSpec(std::vector<double> weights);

  std::span<const double> weights() const noexcept { return weights_; }

 private:
  std::vector<double> weights_;
};

// Weighted average. The result is clamped into [min(s), max(s)] to absorb
// rounding. Throws Error{LengthMismatch}.
Score aggregate(std::span<const Score> corrected, const AggregationSpec& spec);

Score quantile_map(Score y, const QuantileTable& table);

using TableSet = std::unordered_map<std::string, std::shared_ptr<const QuantileTable>>;

// Built-in table reference that always resolves to QuantileTable::identity().
inline constexpr std::string_view kIdentityTableRef = "identity";

// Runs a predictor's DAG on one event:
//   single expert:  T^Q(m(x))
//   ensemble:       T^Q(A([T^C_k(m_k(x))]))   (T^C skipped when the
//                                              predictor disables it)
// Throws Error{BackendUnavailable} when an expert's backend is missing or
// fails, Error{UnknownQuantileTable} when the table reference is unresolved.
ScoreResponse predict(const Event& event, const PredictorSpec& spec,
                      const BackendRegistry& backends, const QuantileTable& table);
ScoreResponse predict(const Event& event, const PredictorSpec& spec,
                      const BackendRegistry& backends, const TableSet& tables);

// The pre-T^Q score (raw expert output or the aggregated ensemble score).
Score aggregated_score(const Event& event, const PredictorSpec& spec,
                       const BackendRegistry& backends);

}  // namespace scoregate
