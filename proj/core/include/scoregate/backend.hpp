#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "scoregate/types.hpp"

namespace scoregate {

// A model server as seen from the orchestration layer. Implementations must
// be deterministic in (event, parameters) and safe to call concurrently.
// Failures are reported by throwing; the caller turns them into
// BackendUnavailable.
class ExpertBackend {
 public:
  virtual ~ExpertBackend() = default;

  virtual const std::string& id() const noexcept = 0;
  virtual Score score(const Event& event) const = 0;
  // Names of the features this backend reads, used to synthesize warm-up
  // traffic. Empty when the backend ignores features.
  virtual std::vector<std::string> feature_names() const { return {}; }
};

class BackendRegistry {
 public:
  // Throws Error{InvalidArgument} on a repeated id.
  void add(std::shared_ptr<const ExpertBackend> backend);

  // nullptr when unknown.
  const ExpertBackend* find(std::string_view id) const noexcept;

  std::size_t size() const noexcept { return backends_.size(); }

 private:
  std::unordered_map<std::string, std::shared_ptr<const ExpertBackend>> backends_;
};

}  // namespace scoregate
