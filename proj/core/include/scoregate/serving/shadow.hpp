#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace scoregate::serving {

struct ShadowRecord {
  std::string event_id;
  std::string tenant_id;
  std::string predictor_id;
  double score = 0.0;
  std::string config_version;
  std::string timestamp;
};

nlohmann::json to_json(const ShadowRecord& record);
ShadowRecord shadow_record_from_json(const nlohmann::json& line);

// Only ever called from the dispatcher's worker thread.
class ShadowSink {
 public:
  virtual ~ShadowSink() = default;
  virtual void write(const ShadowRecord& record) = 0;
  virtual void flush() {}
};

// Append-only JSONL file, one record per line.
class JsonlShadowSink final : public ShadowSink {
 public:
  explicit JsonlShadowSink(const std::filesystem::path& path);
  void write(const ShadowRecord& record) override;
  void flush() override;

 private:
  std::ofstream out_;
};

class MemoryShadowSink final : public ShadowSink {
 public:
  void write(const ShadowRecord& record) override;
  std::vector<ShadowRecord> records() const;

 private:
  mutable std::mutex mutex_;
  std::vector<ShadowRecord> records_;
};

// Bounded FIFO drained by one worker. submit() never blocks: when the queue
// is full the job is rejected and the caller counts the drop.
class ShadowDispatcher {
 public:
  using Job = std::function<void()>;

  explicit ShadowDispatcher(std::size_t capacity);
  ~ShadowDispatcher();

  ShadowDispatcher(const ShadowDispatcher&) = delete;
  ShadowDispatcher& operator=(const ShadowDispatcher&) = delete;

  bool try_submit(Job job);
  // Blocks until every accepted job has run.
  void drain();
  std::size_t capacity() const noexcept { return capacity_; }

 private:
  void run();

  std::size_t capacity_;
  std::mutex mutex_;
  std::condition_variable wake_;
  std::condition_variable idle_;
  std::deque<Job> queue_;
  bool busy_ = false;
  bool stopping_ = false;
  std::thread worker_;
};

}  // namespace scoregate::serving
