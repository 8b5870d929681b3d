#include "facver/rate_limiter.hpp"

#include <thread>

namespace facver {

Clock system_clock_source() {
  return Clock{
      [] { return std::chrono::steady_clock::now(); },
      [](std::chrono::steady_clock::duration d) { std::this_thread::sleep_for(d); },
  };
}

RateLimiter::RateLimiter(double per_minute, Clock clock)
    : per_minute_(per_minute), clock_(std::move(clock)) {
  if (per_minute_ > 0.0) {
    spacing_ = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(60.0 / per_minute_));
  }
}

void RateLimiter::acquire() {
  if (per_minute_ <= 0.0) return;

  std::chrono::steady_clock::time_point slot;
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto now = clock_.now();
    if (!primed_) {
      next_free_ = now;
      primed_ = true;
    }
    slot = next_free_ > now ? next_free_ : now;
    next_free_ = slot + spacing_;
  }
  auto now = clock_.now();
  if (slot > now) clock_.sleep(slot - now);
}

}  // namespace facver
