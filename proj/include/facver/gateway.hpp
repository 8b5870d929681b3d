#pragma once

#include <atomic>
#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <semaphore>
#include <string>
#include <vector>

#include "facver/rate_limiter.hpp"

namespace facver {

class ResponseCache;

enum class Provider { openai_chat, openai_base, anthropic, scripted };

std::string to_string(Provider p);
Provider provider_from_string(const std::string& name);

// Whether a provider's transport can return per-token probabilities.
bool provider_supports_token_distribution(Provider p);

struct ModelSpec {
  Provider provider = Provider::scripted;
  std::string model_name;
  double temperature = 0.0;
  int max_tokens = 512;
  // Override the provider default; mainly for tests and scripted runs.
  std::optional<bool> supports_token_distribution;

  bool token_distribution_available() const {
    return supports_token_distribution.value_or(provider_supports_token_distribution(provider));
  }
};

struct Message {
  std::string role;  // "system" | "user" | "assistant"
  std::string content;
};

struct CompletionRequest {
  ModelSpec model;
  std::vector<Message> messages;
  bool want_token_distribution = false;

  // Single-user-turn convenience constructor is in gateway.cpp.
  std::string cache_key() const;
};

CompletionRequest make_request(const ModelSpec& model, std::string user_prompt,
                               bool want_token_distribution = false);

struct TokenProb {
  std::string token;
  double probability = 0.0;
};

struct TokenUsage {
  long long prompt_tokens = 0;
  long long completion_tokens = 0;
};

struct CompletionResponse {
  std::string text;
  // Probability distribution over the first generated token, when requested
  // and supported. Empty otherwise.
  std::vector<TokenProb> token_distribution;
  TokenUsage usage;
  bool cache_hit = false;
};

// Transport-level backend: performs one completion. Implementations must be
// thread-safe.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual CompletionResponse complete(const CompletionRequest& request) = 0;
  virtual std::string name() const = 0;
};

enum class YesProbMode { raw, normalized };

struct GatewayOptions {
  int max_in_flight = 4;
  double rate_limit_per_minute = 0.0;  // <= 0 disables pacing
  int max_attempts = 5;
  std::chrono::milliseconds initial_backoff{500};
  unsigned long long retry_seed = 0;  // seeds backoff jitter
  Clock clock = system_clock_source();
};

struct GatewayCounters {
  long long requests_total = 0;
  long long backend_calls = 0;
  long long cache_hits = 0;
};

// Routes completion requests to per-provider backends with caching,
// retry-with-backoff, rate limiting, and a concurrency cap.
class Gateway {
 public:
  explicit Gateway(GatewayOptions options = {});

  void register_backend(Provider provider, std::shared_ptr<Backend> backend);
  // Send every provider to one backend (used by --scripted runs).
  void route_all_to(std::shared_ptr<Backend> backend);
  void set_cache(std::shared_ptr<ResponseCache> cache);

  CompletionResponse complete(const CompletionRequest& request);

  // Asks the model the given prompt and reads off the probability that its
  // first token is "Yes". Requires a token-distribution-capable model.
  double yes_probability(const std::string& prompt, const ModelSpec& model,
                         YesProbMode mode = YesProbMode::raw);

  GatewayCounters counters() const;

 private:
  Backend& backend_for(Provider provider);

  GatewayOptions options_;
  std::map<Provider, std::shared_ptr<Backend>> backends_;
  std::shared_ptr<Backend> catch_all_;
  std::shared_ptr<ResponseCache> cache_;
  RateLimiter limiter_;
  std::counting_semaphore<256> in_flight_;
  std::atomic<long long> requests_total_{0};
  std::atomic<long long> backend_calls_{0};
  std::atomic<long long> cache_hits_{0};
  std::mutex retry_rng_mu_;
  std::mt19937_64 retry_rng_;
};

// Extracts P(first token == "Yes") from a distribution: sums mass over tokens
// whose text equals "Yes" after trimming leading whitespace (case-sensitive).
double yes_mass(const std::vector<TokenProb>& distribution, const std::string& target = "Yes");

}  // namespace facver
