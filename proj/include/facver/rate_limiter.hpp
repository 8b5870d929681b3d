#pragma once

#include <chrono>
#include <functional>
#include <mutex>

namespace facver {

// Injectable time source so rate limiting can be tested against a virtual clock.
struct Clock {
  std::function<std::chrono::steady_clock::time_point()> now;
  std::function<void(std::chrono::steady_clock::duration)> sleep;
};

Clock system_clock_source();

// Paces calls so that no more than `limit` acquisitions start within any
// 60-second sliding window. Implemented by reserving evenly spaced slots:
// each acquisition takes the later of "now" and the next free slot, and the
// next free slot advances by 60/limit seconds. Zero or negative limit
// disables pacing.
class RateLimiter {
 public:
  explicit RateLimiter(double per_minute, Clock clock = system_clock_source());

  // Blocks (via the injected sleep) until the caller may proceed.
  void acquire();

  double per_minute() const { return per_minute_; }

 private:
  double per_minute_;
  std::chrono::steady_clock::duration spacing_{};
  std::chrono::steady_clock::time_point next_free_{};
  bool primed_ = false;
  Clock clock_;
  std::mutex mu_;
};

}  // namespace facver
