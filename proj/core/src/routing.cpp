#include "scoregate/routing.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <set>
#include <unordered_set>

#include <yaml-cpp/yaml.h>

#include "scoregate/error.hpp"

namespace scoregate {

namespace {

bool contains(const std::optional<std::vector<std::string>>& allowed, const std::string& value) {
  if (!allowed) return true;
  return std::find(allowed->begin(), allowed->end(), value) != allowed->end();
}

std::string content_version(std::string_view document) {
  std::uint64_t hash = 1469598103934665603ULL;  // FNV-1a 64
  for (unsigned char c : document) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  char buffer[24];
  std::snprintf(buffer, sizeof buffer, "fnv1a-%016llx", static_cast<unsigned long long>(hash));
  return buffer;
}

std::string scalar(const YAML::Node& node, const std::string& where) {
  if (!node || !node.IsScalar()) throw Error(ErrorCode::ParseError, where + " must be a string");
  return node.as<std::string>();
}

std::optional<std::vector<std::string>> string_list(const YAML::Node& condition, const char* key,
                                                    const std::string& where) {
  const YAML::Node node = condition[key];
  if (!node || node.IsNull()) return std::nullopt;
  if (!node.IsSequence()) throw Error(ErrorCode::ParseError, where + "." + key + " must be a list");
  std::vector<std::string> values;
  for (const auto& item : node) values.push_back(scalar(item, where + "." + key + "[]"));
  return values;
}

RuleCondition parse_condition(const YAML::Node& node, const std::string& where) {
  RuleCondition condition;
  if (!node || node.IsNull()) return condition;
  if (!node.IsMap()) throw Error(ErrorCode::ParseError, where + ".condition must be a mapping");
  for (const auto& entry : node) {
    const auto key = entry.first.as<std::string>();
    if (key != "tenants" && key != "geographies" && key != "schemas") {
      throw Error(ErrorCode::ParseError, where + ".condition: unknown field '" + key + "'");
    }
  }
  condition.tenants = string_list(node, "tenants", where + ".condition");
  condition.geographies = string_list(node, "geographies", where + ".condition");
  condition.schemas = string_list(node, "schemas", where + ".condition");
  return condition;
}

void check_target(const std::string& name, const std::set<std::string, std::less<>>& registered,
                  const std::string& where) {
  if (!registered.contains(name)) {
    throw Error(ErrorCode::UnknownPredictor, where + ": unknown predictor '" + name + "'");
  }
}

}  // namespace

bool RuleCondition::matches(const Event& event) const noexcept {
  return contains(tenants, event.tenant_id) && contains(geographies, event.geography) &&
         contains(schemas, event.schema_id);
}

RoutingConfig load_config(std::string_view document,
                          std::span<const std::string> registered_predictors) {
  std::set<std::string, std::less<>> registered;
  for (const auto& id : registered_predictors) {
    if (!registered.insert(id).second) {
      throw Error(ErrorCode::DuplicatePredictorId, "predictor '" + id + "' registered twice");
    }
  }

  YAML::Node root;
  try {
    root = YAML::Load(std::string(document));
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::ParseError, std::string("routing config: ") + e.what());
  }

  RoutingConfig config;
  try {
    const YAML::Node routing = root["routing"];
    if (!routing || !routing.IsMap()) {
      throw Error(ErrorCode::ParseError, "routing config needs a top-level 'routing' mapping");
    }
    config.version = routing["version"] ? scalar(routing["version"], "routing.version")
                                        : content_version(document);

    if (const YAML::Node rules = routing["scoringRules"]; rules && !rules.IsNull()) {
      if (!rules.IsSequence()) throw Error(ErrorCode::ParseError, "scoringRules must be a list");
      for (std::size_t i = 0; i < rules.size(); ++i) {
        const std::string where = "scoringRules[" + std::to_string(i) + "]";
        const YAML::Node rule = rules[i];
        if (!rule.IsMap()) throw Error(ErrorCode::ParseError, where + " must be a mapping");
        ScoringRule parsed;
        parsed.description = rule["description"] ? scalar(rule["description"], where + ".description") : "";
        parsed.condition = parse_condition(rule["condition"], where);
        parsed.target_predictor = scalar(rule["targetPredictorName"], where + ".targetPredictorName");
        check_target(parsed.target_predictor, registered, where);
        config.scoring_rules.push_back(std::move(parsed));
      }
    }

    if (const YAML::Node rules = routing["shadowRules"]; rules && !rules.IsNull()) {
      if (!rules.IsSequence()) throw Error(ErrorCode::ParseError, "shadowRules must be a list");
      for (std::size_t i = 0; i < rules.size(); ++i) {
        const std::string where = "shadowRules[" + std::to_string(i) + "]";
        const YAML::Node rule = rules[i];
        if (!rule.IsMap()) throw Error(ErrorCode::ParseError, where + " must be a mapping");
        ShadowRule parsed;
        parsed.description = rule["description"] ? scalar(rule["description"], where + ".description") : "";
        parsed.condition = parse_condition(rule["condition"], where);
        const YAML::Node targets = rule["targetPredictorNames"];
        if (!targets || !targets.IsSequence()) {
          throw Error(ErrorCode::ParseError, where + ".targetPredictorNames must be a list");
        }
        for (const auto& target : targets) {
          parsed.target_predictors.push_back(scalar(target, where + ".targetPredictorNames[]"));
          check_target(parsed.target_predictors.back(), registered, where);
        }
        config.shadow_rules.push_back(std::move(parsed));
      }
    }
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::ParseError, std::string("routing config: ") + e.what());
  }

  const bool has_catch_all =
      std::any_of(config.scoring_rules.begin(), config.scoring_rules.end(),
                  [](const ScoringRule& rule) { return rule.condition.is_catch_all(); });
  if (!has_catch_all) {
    config.warnings.push_back("no catch-all scoring rule; unmatched requests fail with NoMatchingRule");
  }
  return config;
}

RoutingDecision resolve(const Event& event, const RoutingConfig& config) {
  RoutingDecision decision;
  decision.config_version = config.version;
  auto live = std::find_if(config.scoring_rules.begin(), config.scoring_rules.end(),
                           [&](const ScoringRule& rule) { return rule.condition.matches(event); });
  if (live == config.scoring_rules.end()) {
    throw Error(ErrorCode::NoMatchingRule, "no scoring rule matches tenant '" + event.tenant_id +
                                               "' (config " + config.version + ")");
  }
  decision.live_predictor = live->target_predictor;
  decision.matched_rule_description = live->description;
  for (const auto& rule : config.shadow_rules) {
    if (!rule.condition.matches(event)) continue;
    for (const auto& target : rule.target_predictors) {
      if (std::find(decision.shadow_predictors.begin(), decision.shadow_predictors.end(), target) ==
          decision.shadow_predictors.end()) {
        decision.shadow_predictors.push_back(target);
      }
    }
  }
  return decision;
}

ConfigStore::ConfigStore(std::shared_ptr<const RoutingConfig> initial) : active_(std::move(initial)) {
  if (!active_.load()) throw Error(ErrorCode::InvalidArgument, "config store needs an initial config");
}

std::shared_ptr<const RoutingConfig> ConfigStore::snapshot() const noexcept { return active_.load(); }

std::string ConfigStore::swap_config(std::shared_ptr<const RoutingConfig> next) {
  if (!next) throw Error(ErrorCode::InvalidArgument, "cannot swap in a null config");
  return active_.exchange(std::move(next))->version;
}

}  // namespace scoregate
