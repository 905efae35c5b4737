#include "scoregate/serving/service.hpp"

#include <ctime>
#include <random>
#include <thread>

#include <nlohmann/json.hpp>

#include "scoregate/error.hpp"
#include "scoregate/quantile_table.hpp"
#include "scoregate/transforms.hpp"

namespace scoregate::serving {

nlohmann::json to_json(const ServiceCounters& c) {
  return nlohmann::json{{"live_ok", c.live_ok},
                        {"live_errors", c.live_errors},
                        {"shadow_ok", c.shadow_ok},
                        {"shadow_failures", c.shadow_failures},
                        {"shadow_dropped", c.shadow_dropped},
                        {"warmup_calls", c.warmup_calls},
                        {"warmup_errors", c.warmup_errors}};
}

int status_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NoMatchingRule: return 404;
    case ErrorCode::NotReady:
    case ErrorCode::WarmupTimeout: return 503;
    default: return is_validation_error(code) ? 400 : 500;
  }
}

std::string error_body(ErrorCode code, std::string_view message) {
  return nlohmann::json{{"error", to_string(code)}, {"message", message}}.dump();
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const auto micros =
      std::chrono::duration_cast<std::chrono::microseconds>(now.time_since_epoch()).count() % 1000000;
  const std::time_t seconds = std::chrono::system_clock::to_time_t(now);
  std::tm parts{};
  gmtime_r(&seconds, &parts);
  char buffer[40];
  const auto len = std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%S", &parts);
  std::snprintf(buffer + len, sizeof buffer - len, ".%06lldZ", static_cast<long long>(micros));
  return buffer;
}

ScoringService::ScoringService(std::shared_ptr<const Deployment> deployment,
                               std::shared_ptr<const RoutingConfig> routing,
                               std::shared_ptr<ShadowSink> sink, ServiceOptions options)
    : deployment_(std::move(deployment)),
      routing_(std::move(routing)),
      tables_(nullptr),
      sink_(std::move(sink)),
      options_(std::move(options)) {
  if (!deployment_) throw Error(ErrorCode::InvalidArgument, "service needs a deployment");
  tables_.exchange(std::make_shared<const TableSet>(deployment_->tables));
  if (!options_.timestamp) options_.timestamp = utc_timestamp;
  dispatcher_ = std::make_unique<ShadowDispatcher>(options_.shadow_queue_depth);
}

ScoringService::~ScoringService() {
  // finish queued shadow work while the sink is still alive
  dispatcher_.reset();
  if (sink_) sink_->flush();
}

std::int64_t ScoringService::now_micros() const {
  if (options_.clock_micros) return options_.clock_micros();
  return std::chrono::duration_cast<std::chrono::microseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

ScoreResponse ScoringService::score(const nlohmann::json& request) {
  if (!ready()) throw Error(ErrorCode::NotReady, "service is warming up");
  const auto start = now_micros();
  try {
    Event event = validate_event(request);
    if (event.event_id.empty()) {
      event.event_id = "evt-" + std::to_string(next_event_.fetch_add(1, std::memory_order_relaxed));
    }
    // one snapshot of each for the whole request
    const auto routing = routing_.snapshot();
    auto tables = tables_.load();
    const auto decision = resolve(event, *routing);
    const auto* spec = deployment_->find_predictor(decision.live_predictor);
    if (!spec) {
      throw Error(ErrorCode::UnknownPredictor, "predictor '" + decision.live_predictor + "' not deployed");
    }
    auto response = predict(event, *spec, deployment_->backends, *tables);
    if (!decision.shadow_predictors.empty()) fan_out_shadows(event, decision, std::move(tables));
    response.latency_micros = std::max<std::int64_t>(0, now_micros() - start);
    live_ok_.fetch_add(1, std::memory_order_relaxed);
    return response;
  } catch (...) {
    live_errors_.fetch_add(1, std::memory_order_relaxed);
    throw;
  }
}

void ScoringService::fan_out_shadows(const Event& event, const RoutingDecision& decision,
                                     std::shared_ptr<const TableSet> tables) {
  if (!sink_) return;
  auto job = [this, event, targets = decision.shadow_predictors, version = decision.config_version,
              tables = std::move(tables)] {
    for (const auto& target : targets) {
      try {
        const auto* spec = deployment_->find_predictor(target);
        if (!spec) throw Error(ErrorCode::UnknownPredictor, target);
        const auto response = predict(event, *spec, deployment_->backends, *tables);
        sink_->write(ShadowRecord{event.event_id, event.tenant_id, target, response.score.value(),
                                  version, options_.timestamp()});
        shadow_ok_.fetch_add(1, std::memory_order_relaxed);
      } catch (...) {
        shadow_failures_.fetch_add(1, std::memory_order_relaxed);
      }
    }
  };
  if (!dispatcher_->try_submit(std::move(job))) {
    shadow_dropped_.fetch_add(decision.shadow_predictors.size(), std::memory_order_relaxed);
  }
}

HttpReply ScoringService::handle_score(std::string_view body) {
  nlohmann::json request;
  try {
    request = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    live_errors_.fetch_add(1, std::memory_order_relaxed);
    return {400, error_body(ErrorCode::ParseError, e.what())};
  }
  try {
    return {200, to_json(score(request)).dump()};
  } catch (const Error& e) {
    return {status_for(e.code()), error_body(e.code(), e.what())};
  } catch (const std::exception& e) {
    return {500, error_body(ErrorCode::BackendUnavailable, e.what())};
  }
}

namespace {

HttpReply ack_reply(const VersionAck& ack) {
  return {200, nlohmann::json{{"previous", ack.previous}, {"current", ack.current}}.dump()};
}

HttpReply admin_failure(const Error& e) {
  return {is_validation_error(e.code()) || e.code() == ErrorCode::UnknownQuantileTable ? 422 : 500,
          error_body(e.code(), e.what())};
}

}  // namespace

HttpReply ScoringService::handle_config_upload(std::string_view body) {
  try {
    return ack_reply(reload_config(body));
  } catch (const Error& e) {
    return admin_failure(e);
  }
}

HttpReply ScoringService::handle_table_upload(std::string_view ref, std::string_view body) {
  try {
    return ack_reply(reload_table(std::string(ref), body));
  } catch (const Error& e) {
    return admin_failure(e);
  }
}

HttpReply ScoringService::handle_version() const {
  nlohmann::json tables = nlohmann::json::object();
  for (const auto& [ref, table] : *tables_.load()) tables[ref] = table->version();
  return {200, nlohmann::json{{"routing", routing_.snapshot()->version}, {"tables", tables}}.dump()};
}

HttpReply ScoringService::handle_ready() const {
  const bool is_ready = ready();
  return {is_ready ? 200 : 503, nlohmann::json{{"ready", is_ready}}.dump()};
}

HttpReply ScoringService::handle_metrics() const { return {200, to_json(counters()).dump()}; }

VersionAck ScoringService::reload_config(std::string_view document) {
  const auto ids = deployment_->predictor_ids();
  auto next = std::make_shared<const RoutingConfig>(load_config(document, ids));
  std::lock_guard lock(admin_mutex_);
  VersionAck ack;
  ack.current = next->version;
  ack.previous = routing_.swap_config(std::move(next));
  return ack;
}

VersionAck ScoringService::reload_table(const std::string& ref, std::string_view document) {
  if (ref.empty() || ref == kIdentityTableRef) {
    throw Error(ErrorCode::InvalidArgument, "table ref '" + ref + "' cannot be replaced");
  }
  auto table = std::make_shared<const QuantileTable>(parse_quantile_table(document));
  std::lock_guard lock(admin_mutex_);
  const auto current = tables_.load();
  bool referenced = current->contains(ref);
  for (const auto& [id, spec] : deployment_->predictors) referenced = referenced || spec.quantile_table_ref() == ref;
  if (!referenced) throw Error(ErrorCode::UnknownQuantileTable, "no predictor uses table '" + ref + "'");

  VersionAck ack;
  if (auto it = current->find(ref); it != current->end()) ack.previous = it->second->version();
  ack.current = table->version();
  auto next = std::make_shared<TableSet>(*current);
  (*next)[ref] = std::move(table);
  tables_.exchange(std::move(next));
  return ack;
}

std::uint64_t ScoringService::warmup(std::size_t per_predictor, std::uint64_t seed) {
  const auto deadline = std::chrono::steady_clock::now() + options_.warmup_timeout;
  const bool bounded = options_.warmup_timeout.count() > 0;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uint64_t calls = 0;
  const bool paced = options_.warmup_rate > 0.0;
  const auto gap = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
      std::chrono::duration<double>(paced ? 1.0 / options_.warmup_rate : 0.0));
  auto next_call = std::chrono::steady_clock::now();

  for (const auto& [id, spec] : deployment_->predictors) {
    auto features = deployment_->required_features(spec);
    if (features.empty()) features.push_back("x0");
    for (std::size_t i = 0; i < per_predictor; ++i) {
      if (bounded && std::chrono::steady_clock::now() > deadline) {
        throw Error(ErrorCode::WarmupTimeout, "warm-up exceeded its deadline after " +
                                                  std::to_string(calls) + " calls");
      }
      if (paced) {
        std::this_thread::sleep_until(next_call);
        next_call += gap;
      }
      nlohmann::json request{{"event_id", "warmup-" + id + "-" + std::to_string(i)},
                             {"tenant", "warmup"},
                             {"geography", "warmup"},
                             {"schema", "warmup"}};
      for (const auto& name : features) request["features"][name] = unit(rng);
      ++calls;
      warmup_calls_.fetch_add(1, std::memory_order_relaxed);
      try {
        // same path as a live call minus routing and shadows
        const Event event = validate_event(request);
        const auto response = predict(event, spec, deployment_->backends, *tables_.load());
        (void)to_json(response).dump();
      } catch (const Error&) {
        warmup_errors_.fetch_add(1, std::memory_order_relaxed);
      }
    }
  }
  ready_.store(true, std::memory_order_release);
  return calls;
}

void ScoringService::flush_shadows() {
  dispatcher_->drain();
  if (sink_) sink_->flush();
}

ServiceCounters ScoringService::counters() const noexcept {
  ServiceCounters c;
  c.live_ok = live_ok_.load();
  c.live_errors = live_errors_.load();
  c.shadow_ok = shadow_ok_.load();
  c.shadow_failures = shadow_failures_.load();
  c.shadow_dropped = shadow_dropped_.load();
  c.warmup_calls = warmup_calls_.load();
  c.warmup_errors = warmup_errors_.load();
  return c;
}

}  // namespace scoregate::serving
