#pragma once

#include <chrono>
#include <thread>

#include "tae/error.hpp"

namespace tae {

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{250};
  double multiplier = 2.0;
};

/// Calls f() until it returns, retrying retryable ProviderErrors with
/// exponential backoff. The last error propagates. `attempts` receives the
/// number of calls made.
template <class F>
auto with_retries(const RetryPolicy& policy, F&& f, int* attempts = nullptr) -> decltype(f()) {
  auto delay = policy.initial_backoff;
  for (int attempt = 1;; ++attempt) {
    if (attempts) *attempts = attempt;
    try {
      return f();
    } catch (const ProviderError& e) {
      if (!e.retryable() || attempt >= policy.max_attempts) throw;
    }
    if (delay.count() > 0) std::this_thread::sleep_for(delay);
    delay = std::chrono::milliseconds(
        static_cast<long long>(static_cast<double>(delay.count()) * policy.multiplier));
  }
}

}  // namespace tae
