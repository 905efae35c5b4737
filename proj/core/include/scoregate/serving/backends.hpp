#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "scoregate/backend.hpp"

namespace scoregate::serving {

// Deterministic stand-ins for remote model servers.

// Looks the score up by event_id; unknown ids fail the call.
class TableLookupBackend final : public ExpertBackend {
 public:
  TableLookupBackend(std::string id, std::map<std::string, double, std::less<>> scores);

  const std::string& id() const noexcept override { return id_; }
  Score score(const Event& event) const override;

 private:
  std::string id_;
  std::map<std::string, double, std::less<>> scores_;
};

// sigmoid(bias + sum_f weight_f * x_f). Every weighted feature must be
// present in the event.
class LinearLogisticBackend final : public ExpertBackend {
 public:
  LinearLogisticBackend(std::string id, std::map<std::string, double, std::less<>> weights,
                        double bias);

  const std::string& id() const noexcept override { return id_; }
  Score score(const Event& event) const override;
  std::vector<std::string> feature_names() const override;

 private:
  std::string id_;
  std::map<std::string, double, std::less<>> weights_;
  double bias_;
};

// Replays a fixed score sequence, indexed by a stable hash of the event id so
// the same event always gets the same score.
class ScriptedSequenceBackend final : public ExpertBackend {
 public:
  ScriptedSequenceBackend(std::string id, std::vector<double> sequence);

  const std::string& id() const noexcept override { return id_; }
  Score score(const Event& event) const override;

 private:
  std::string id_;
  std::vector<Score> sequence_;
};

// Feature-store stand-in: merges static per-model defaults under the
// request's features (request values win) before delegating.
class EnrichingBackend final : public ExpertBackend {
 public:
  EnrichingBackend(std::shared_ptr<const ExpertBackend> inner, FeatureMap defaults);

  const std::string& id() const noexcept override { return inner_->id(); }
  Score score(const Event& event) const override;
  std::vector<std::string> feature_names() const override;

 private:
  std::shared_ptr<const ExpertBackend> inner_;
  FeatureMap defaults_;
};

// Latency injection: sleeps fixed + jitter before delegating. The jitter is
// derived from the event id, so a replay sleeps the same amount.
class DelayedBackend final : public ExpertBackend {
 public:
  DelayedBackend(std::shared_ptr<const ExpertBackend> inner, std::chrono::microseconds fixed,
                 std::chrono::microseconds jitter);

  const std::string& id() const noexcept override { return inner_->id(); }
  Score score(const Event& event) const override;
  std::vector<std::string> feature_names() const override { return inner_->feature_names(); }

 private:
  std::shared_ptr<const ExpertBackend> inner_;
  std::chrono::microseconds fixed_;
  std::chrono::microseconds jitter_;
};

// Builds a backend from its manifest entry:
//   {"id": "...", "kind": "table-lookup" | "linear-logistic" | "scripted-sequence",
//    "scores": {...} | "weights": {...}, "bias": x | "sequence": [...],
//    "defaults": {...}?, "latency_micros": n?, "latency_jitter_micros": n?}
// Throws Error{ParseError} / Error{InvalidArgument}.
std::shared_ptr<const ExpertBackend> backend_from_json(const nlohmann::json& entry);

std::uint64_t stable_hash(std::string_view text) noexcept;

}  // namespace scoregate::serving
