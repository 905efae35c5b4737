#pragma once

#include <atomic>
#include <memory>

namespace scoregate {

// Atomically replaceable pointer to an immutable value. Readers never block
// writers; a reader keeps the snapshot it loaded alive until it drops it.
template <typename T>
class AtomicSnapshot {
 public:
  explicit AtomicSnapshot(std::shared_ptr<const T> initial) : ptr_(std::move(initial)) {}

  AtomicSnapshot(const AtomicSnapshot&) = delete;
  AtomicSnapshot& operator=(const AtomicSnapshot&) = delete;

#if defined(__cpp_lib_atomic_shared_ptr)
  std::shared_ptr<const T> load() const noexcept { return ptr_.load(std::memory_order_acquire); }
  std::shared_ptr<const T> exchange(std::shared_ptr<const T> next) noexcept {
    return ptr_.exchange(std::move(next), std::memory_order_acq_rel);
  }

 private:
  std::atomic<std::shared_ptr<const T>> ptr_;
#else
  // libstdc++ < 12 only ships the (C++20-deprecated) free functions.
#pragma GCC diagnostic push
#pragma GCC diagnostic ignored "-Wdeprecated-declarations"
  std::shared_ptr<const T> load() const noexcept {
    return std::atomic_load_explicit(&ptr_, std::memory_order_acquire);
  }
  std::shared_ptr<const T> exchange(std::shared_ptr<const T> next) noexcept {
    return std::atomic_exchange_explicit(&ptr_, std::move(next), std::memory_order_acq_rel);
  }
#pragma GCC diagnostic pop

 private:
  std::shared_ptr<const T> ptr_;
#endif
};

}  // namespace scoregate
