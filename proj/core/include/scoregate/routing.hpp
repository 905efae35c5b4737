#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scoregate/snapshot.hpp"
#include "scoregate/types.hpp"

namespace scoregate {

// Absent fields match everything; an empty condition is a catch-all. Within
// a field any listed value matches (OR); across fields all present fields
// must match (AND). Comparison is exact and case-sensitive.
struct RuleCondition {
  std::optional<std::vector<std::string>> tenants;
  std::optional<std::vector<std::string>> geographies;
  std::optional<std::vector<std::string>> schemas;

  bool matches(const Event& event) const noexcept;
  bool is_catch_all() const noexcept { return !tenants && !geographies && !schemas; }
};

struct ScoringRule {
  std::string description;
  RuleCondition condition;
  std::string target_predictor;
};

struct ShadowRule {
  std::string description;
  RuleCondition condition;
  std::vector<std::string> target_predictors;
};

struct RoutingConfig {
  std::vector<ScoringRule> scoring_rules;
  std::vector<ShadowRule> shadow_rules;
  std::string version;
  // Load-time findings that do not invalidate the config (e.g. no catch-all).
  std::vector<std::string> warnings;
};

struct RoutingDecision {
  std::string live_predictor;
  // Deduplicated, in first-seen rule order.
  std::vector<std::string> shadow_predictors;
  std::string matched_rule_description;
  // Version of the snapshot that produced this decision.
  std::string config_version;
};

// Parses the declarative routing document:
//
//   routing:
//     version: "..."            # optional; defaults to a content hash
//     scoringRules:
//       - description: "..."
//         condition: {tenants: [...], geographies: [...], schemas: [...]}
//         targetPredictorName: "..."
//     shadowRules:
//       - description: "..."
//         condition: {...}
//         targetPredictorNames: [...]
//
// Every target must be one of `registered_predictors`.
// Throws Error{ParseError}, Error{UnknownPredictor},
// Error{DuplicatePredictorId} (repeated id in registered_predictors).
RoutingConfig load_config(std::string_view document,
                          std::span<const std::string> registered_predictors);

// First matching scoring rule picks the live predictor; every matching
// shadow rule contributes its targets. Throws Error{NoMatchingRule}.
RoutingDecision resolve(const Event& event, const RoutingConfig& config);

// Holds the active config snapshot. Readers grab a shared_ptr and keep using
// it for the whole request; swap replaces the pointer atomically.
class ConfigStore {
 public:
  explicit ConfigStore(std::shared_ptr<const RoutingConfig> initial);

  std::shared_ptr<const RoutingConfig> snapshot() const noexcept;
  // Returns the version that was active before the swap.
  std::string swap_config(std::shared_ptr<const RoutingConfig> next);

 private:
  AtomicSnapshot<RoutingConfig> active_;
};

}  // namespace scoregate
