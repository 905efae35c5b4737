#include "scoregate/serving/shadow.hpp"

#include <nlohmann/json.hpp>

#include "scoregate/error.hpp"

namespace scoregate::serving {

nlohmann::json to_json(const ShadowRecord& r) {
  return nlohmann::json{{"event_id", r.event_id},         {"tenant_id", r.tenant_id},
                        {"predictor_id", r.predictor_id}, {"score", r.score},
                        {"config_version", r.config_version}, {"timestamp", r.timestamp}};
}

ShadowRecord shadow_record_from_json(const nlohmann::json& line) {
  try {
    ShadowRecord r;
    r.event_id = line.at("event_id").get<std::string>();
    r.tenant_id = line.at("tenant_id").get<std::string>();
    r.predictor_id = line.at("predictor_id").get<std::string>();
    r.score = line.at("score").get<double>();
    r.config_version = line.at("config_version").get<std::string>();
    r.timestamp = line.at("timestamp").get<std::string>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("shadow record: ") + e.what());
  }
}

JsonlShadowSink::JsonlShadowSink(const std::filesystem::path& path)
    : out_(path, std::ios::app | std::ios::binary) {
  if (!out_) throw Error(ErrorCode::Io, "cannot open shadow sink '" + path.string() + "'");
}

void JsonlShadowSink::write(const ShadowRecord& record) { out_ << to_json(record).dump() << '\n'; }

void JsonlShadowSink::flush() { out_.flush(); }

void MemoryShadowSink::write(const ShadowRecord& record) {
  std::lock_guard lock(mutex_);
  records_.push_back(record);
}

std::vector<ShadowRecord> MemoryShadowSink::records() const {
  std::lock_guard lock(mutex_);
  return records_;
}

ShadowDispatcher::ShadowDispatcher(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw Error(ErrorCode::InvalidArgument, "shadow queue depth must be >= 1");
  worker_ = std::thread([this] { run(); });
}

ShadowDispatcher::~ShadowDispatcher() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  wake_.notify_one();
  worker_.join();
}

bool ShadowDispatcher::try_submit(Job job) {
  {
    std::lock_guard lock(mutex_);
    if (queue_.size() >= capacity_) return false;
    queue_.push_back(std::move(job));
  }
  wake_.notify_one();
  return true;
}

void ShadowDispatcher::drain() {
  std::unique_lock lock(mutex_);
  idle_.wait(lock, [this] { return queue_.empty() && !busy_; });
}

void ShadowDispatcher::run() {
  std::unique_lock lock(mutex_);
  for (;;) {
    wake_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
    if (queue_.empty()) return;  // stopping and nothing left
    Job job = std::move(queue_.front());
    queue_.pop_front();
    busy_ = true;
    lock.unlock();
    job();  // jobs swallow their own failures
    lock.lock();
    busy_ = false;
    if (queue_.empty()) idle_.notify_all();
  }
}

}  // namespace scoregate::serving
