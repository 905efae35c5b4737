#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>

#include <nlohmann/json_fwd.hpp>

#include "scoregate/error.hpp"
#include "scoregate/routing.hpp"
#include "scoregate/serving/deployment.hpp"
#include "scoregate/serving/shadow.hpp"
#include "scoregate/snapshot.hpp"

namespace scoregate::serving {

struct ServiceOptions {
  std::size_t shadow_queue_depth = 4096;
  // Zero disables the warm-up deadline.
  std::chrono::milliseconds warmup_timeout{0};
  // Warm-up calls per second across all predictors, zero for as fast as possible.
  double warmup_rate = 0.0;
  // Monotonic microsecond clock for latency_micros. Tests pin it to make
  // responses reproducible byte for byte.
  std::function<std::int64_t()> clock_micros;
  // Wall-clock stamp written into shadow records.
  std::function<std::string()> timestamp;
};

struct ServiceCounters {
  std::uint64_t live_ok = 0;
  std::uint64_t live_errors = 0;
  std::uint64_t shadow_ok = 0;
  std::uint64_t shadow_failures = 0;
  std::uint64_t shadow_dropped = 0;
  std::uint64_t warmup_calls = 0;
  std::uint64_t warmup_errors = 0;
};

nlohmann::json to_json(const ServiceCounters& counters);

struct VersionAck {
  std::string previous;
  std::string current;
};

struct HttpReply {
  int status = 200;
  std::string body;
};

// Status for a failed request: 400 validation, 404 no rule, 503 not ready,
// 500 otherwise.
int status_for(ErrorCode code) noexcept;
std::string error_body(ErrorCode code, std::string_view message);

std::string utc_timestamp();

class ScoringService {
 public:
  // sink may be null, in which case shadow rules are resolved but not run.
  ScoringService(std::shared_ptr<const Deployment> deployment,
                 std::shared_ptr<const RoutingConfig> routing, std::shared_ptr<ShadowSink> sink,
                 ServiceOptions options = {});
  ~ScoringService();

  ScoringService(const ScoringService&) = delete;
  ScoringService& operator=(const ScoringService&) = delete;

  // Throws Error: NotReady before warm-up, validation codes, NoMatchingRule,
  // BackendUnavailable, UnknownQuantileTable.
  ScoreResponse score(const nlohmann::json& request);

  HttpReply handle_score(std::string_view body);
  HttpReply handle_config_upload(std::string_view body);
  HttpReply handle_table_upload(std::string_view ref, std::string_view body);
  HttpReply handle_version() const;
  HttpReply handle_ready() const;
  HttpReply handle_metrics() const;

  // Validate then swap atomically; a failure leaves the active state alone.
  VersionAck reload_config(std::string_view document);
  VersionAck reload_table(const std::string& ref, std::string_view document);

  // Drives per_predictor synthetic events through every registered predictor
  // with the sink suppressed, then marks the service ready. Returns the number
  // of internal calls. Throws Error{WarmupTimeout} past the deadline.
  std::uint64_t warmup(std::size_t per_predictor, std::uint64_t seed);
  bool ready() const noexcept { return ready_.load(std::memory_order_acquire); }

  void flush_shadows();
  ServiceCounters counters() const noexcept;

  std::shared_ptr<const RoutingConfig> routing_snapshot() const noexcept { return routing_.snapshot(); }
  std::shared_ptr<const TableSet> tables_snapshot() const noexcept { return tables_.load(); }
  const Deployment& deployment() const noexcept { return *deployment_; }

 private:
  std::int64_t now_micros() const;
  void fan_out_shadows(const Event& event, const RoutingDecision& decision,
                       std::shared_ptr<const TableSet> tables);

  std::shared_ptr<const Deployment> deployment_;
  ConfigStore routing_;
  AtomicSnapshot<TableSet> tables_;
  std::mutex admin_mutex_;
  std::shared_ptr<ShadowSink> sink_;
  ServiceOptions options_;
  std::atomic<bool> ready_{false};
  std::atomic<std::uint64_t> next_event_{1};

  std::atomic<std::uint64_t> live_ok_{0};
  std::atomic<std::uint64_t> live_errors_{0};
  std::atomic<std::uint64_t> shadow_ok_{0};
  std::atomic<std::uint64_t> shadow_failures_{0};
  std::atomic<std::uint64_t> shadow_dropped_{0};
  std::atomic<std::uint64_t> warmup_calls_{0};
  std::atomic<std::uint64_t> warmup_errors_{0};

  // declared last: its worker must stop before the members above go away
  std::unique_ptr<ShadowDispatcher> dispatcher_;
};

}  // namespace scoregate::serving
