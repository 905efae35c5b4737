#include "scoregate/backend.hpp"

#include "scoregate/error.hpp"

namespace scoregate {

void BackendRegistry::add(std::shared_ptr<const ExpertBackend> backend) {
  if (!backend) throw Error(ErrorCode::InvalidArgument, "null backend");
  const std::string id = backend->id();
  if (!backends_.emplace(id, std::move(backend)).second) {
    throw Error(ErrorCode::InvalidArgument, "backend '" + id + "' registered twice");
  }
}

const ExpertBackend* BackendRegistry::find(std::string_view id) const noexcept {
  auto it = backends_.find(std::string(id));
  return it == backends_.end() ? nullptr : it->second.get();
}

}  // namespace scoregate
