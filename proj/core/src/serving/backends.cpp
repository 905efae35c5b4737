#include "scoregate/serving/backends.hpp"

#include <cmath>
#include <thread>

#include <nlohmann/json.hpp>

#include "scoregate/error.hpp"

namespace scoregate::serving {

std::uint64_t stable_hash(std::string_view text) noexcept {
  std::uint64_t hash = 14695981039346656037ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  return hash;
}

TableLookupBackend::TableLookupBackend(std::string id,
                                       std::map<std::string, double, std::less<>> scores)
    : id_(std::move(id)), scores_(std::move(scores)) {
  for (const auto& [event_id, value] : scores_) Score{value};
}

Score TableLookupBackend::score(const Event& event) const {
  auto it = scores_.find(event.event_id);
  if (it == scores_.end()) {
    throw Error(ErrorCode::BackendUnavailable, id_ + ": no score for event '" + event.event_id + "'");
  }
  return Score(it->second);
}

LinearLogisticBackend::LinearLogisticBackend(std::string id,
                                             std::map<std::string, double, std::less<>> weights,
                                             double bias)
    : id_(std::move(id)), weights_(std::move(weights)), bias_(bias) {
  if (!std::isfinite(bias_)) throw Error(ErrorCode::InvalidArgument, id_ + ": bias must be finite");
  for (const auto& [name, w] : weights_) {
    if (!std::isfinite(w)) throw Error(ErrorCode::InvalidArgument, id_ + ": weight '" + name + "' not finite");
  }
}

Score LinearLogisticBackend::score(const Event& event) const {
  double logit = bias_;
  for (const auto& [name, w] : weights_) {
    auto it = event.features.find(name);
    if (it == event.features.end()) {
      throw Error(ErrorCode::BackendUnavailable, id_ + ": missing feature '" + name + "'");
    }
    logit += w * it->second;
  }
  return Score(1.0 / (1.0 + std::exp(-logit)));
}

std::vector<std::string> LinearLogisticBackend::feature_names() const {
  std::vector<std::string> names;
  for (const auto& entry : weights_) names.push_back(entry.first);
  return names;
}

ScriptedSequenceBackend::ScriptedSequenceBackend(std::string id, std::vector<double> sequence)
    : id_(std::move(id)) {
  if (sequence.empty()) throw Error(ErrorCode::InvalidArgument, id_ + ": empty score sequence");
  for (double v : sequence) sequence_.emplace_back(v);
}

Score ScriptedSequenceBackend::score(const Event& event) const {
  return sequence_[stable_hash(event.event_id) % sequence_.size()];
}

EnrichingBackend::EnrichingBackend(std::shared_ptr<const ExpertBackend> inner, FeatureMap defaults)
    : inner_(std::move(inner)), defaults_(std::move(defaults)) {}

Score EnrichingBackend::score(const Event& event) const {
  Event enriched = event;
  // insert() keeps existing keys, so request values win
  enriched.features.insert(defaults_.begin(), defaults_.end());
  return inner_->score(enriched);
}

std::vector<std::string> EnrichingBackend::feature_names() const {
  std::vector<std::string> names;
  for (auto& name : inner_->feature_names()) {
    if (!defaults_.contains(name)) names.push_back(std::move(name));
  }
  return names;
}

DelayedBackend::DelayedBackend(std::shared_ptr<const ExpertBackend> inner,
                               std::chrono::microseconds fixed, std::chrono::microseconds jitter)
    : inner_(std::move(inner)), fixed_(fixed), jitter_(jitter) {}

Score DelayedBackend::score(const Event& event) const {
  auto delay = fixed_;
  if (jitter_.count() > 0) {
    delay += std::chrono::microseconds(
        static_cast<std::int64_t>(stable_hash(event.event_id) % static_cast<std::uint64_t>(jitter_.count() + 1)));
  }
  if (delay.count() > 0) std::this_thread::sleep_for(delay);
  return inner_->score(event);
}

namespace {

std::map<std::string, double, std::less<>> number_map(const nlohmann::json& node, const std::string& what) {
  if (!node.is_object()) throw Error(ErrorCode::ParseError, what + " must be an object");
  std::map<std::string, double, std::less<>> out;
  for (const auto& [key, value] : node.items()) {
    if (!value.is_number()) throw Error(ErrorCode::ParseError, what + "." + key + " must be a number");
    out.emplace(key, value.get<double>());
  }
  return out;
}

}  // namespace

std::shared_ptr<const ExpertBackend> backend_from_json(const nlohmann::json& entry) {
  try {
    const auto id = entry.at("id").get<std::string>();
    if (id.empty()) throw Error(ErrorCode::InvalidArgument, "backend id must not be empty");
    const auto kind = entry.at("kind").get<std::string>();
    std::shared_ptr<const ExpertBackend> backend;
    if (kind == "table-lookup") {
      backend = std::make_shared<TableLookupBackend>(id, number_map(entry.at("scores"), id + ".scores"));
    } else if (kind == "linear-logistic") {
      backend = std::make_shared<LinearLogisticBackend>(
          id, number_map(entry.at("weights"), id + ".weights"), entry.value("bias", 0.0));
    } else if (kind == "scripted-sequence") {
      backend = std::make_shared<ScriptedSequenceBackend>(id, entry.at("sequence").get<std::vector<double>>());
    } else {
      throw Error(ErrorCode::InvalidArgument, id + ": unknown backend kind '" + kind + "'");
    }
    if (auto defaults = entry.find("defaults"); defaults != entry.end()) {
      auto values = number_map(*defaults, id + ".defaults");
      backend = std::make_shared<EnrichingBackend>(std::move(backend), FeatureMap(values.begin(), values.end()));
    }
    const auto fixed = entry.value("latency_micros", std::int64_t{0});
    const auto jitter = entry.value("latency_jitter_micros", std::int64_t{0});
    if (fixed < 0 || jitter < 0) throw Error(ErrorCode::InvalidArgument, id + ": negative latency");
    if (fixed > 0 || jitter > 0) {
      backend = std::make_shared<DelayedBackend>(std::move(backend), std::chrono::microseconds(fixed),
                                                 std::chrono::microseconds(jitter));
    }
    return backend;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("backend entry: ") + e.what());
  }
}

}  // namespace scoregate::serving
