#include "facver/gateway.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <utility>

#include "facver/cache.hpp"
#include "facver/errors.hpp"
#include "facver/util.hpp"

namespace facver {

std::string to_string(Provider p) {
  switch (p) {
    case Provider::openai_chat: return "openai-chat";
    case Provider::openai_base: return "openai-base";
    case Provider::anthropic: return "anthropic";
    case Provider::scripted: return "scripted";
  }
  throw DomainError("unknown provider enum value");
}

Provider provider_from_string(const std::string& name) {
  if (name == "openai-chat") return Provider::openai_chat;
  if (name == "openai-base") return Provider::openai_base;
  if (name == "anthropic") return Provider::anthropic;
  if (name == "scripted") return Provider::scripted;
  throw ConfigError("unknown provider: " + name +
                    " (expected openai-chat|openai-base|anthropic|scripted)");
}

bool provider_supports_token_distribution(Provider p) {
  switch (p) {
    case Provider::openai_base: return true;   // completions API exposes logprobs
    case Provider::scripted: return true;      // scripts may carry distributions
    case Provider::openai_chat: return false;
    case Provider::anthropic: return false;
  }
  return false;
}

std::string CompletionRequest::cache_key() const {
  nlohmann::json j;
  j["provider"] = facver::to_string(model.provider);
  j["model_name"] = model.model_name;
  j["temperature"] = model.temperature;
  j["max_tokens"] = model.max_tokens;
  nlohmann::json msgs = nlohmann::json::array();
  for (const Message& m : messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
  j["messages"] = std::move(msgs);
  j["want_token_distribution"] = want_token_distribution;
  return sha256_hex(j.dump());
}

CompletionRequest make_request(const ModelSpec& model, std::string user_prompt,
                               bool want_token_distribution) {
  CompletionRequest request;
  request.model = model;
  request.messages.push_back(Message{"user", std::move(user_prompt)});
  request.want_token_distribution = want_token_distribution;
  return request;
}

double yes_mass(const std::vector<TokenProb>& distribution, const std::string& target) {
  double mass = 0.0;
  for (const TokenProb& tp : distribution) {
    if (trim_leading(tp.token) == target) mass += tp.probability;
  }
  return mass;
}

namespace {

constexpr int kMaxSemaphore = 256;

std::ptrdiff_t clamp_in_flight(int n) {
  return std::clamp(n, 1, kMaxSemaphore);
}

}  // namespace

Gateway::Gateway(GatewayOptions options)
    : options_(std::move(options)),
      limiter_(options_.rate_limit_per_minute, options_.clock),
      in_flight_(clamp_in_flight(options_.max_in_flight)),
      retry_rng_(options_.retry_seed) {}

void Gateway::register_backend(Provider provider, std::shared_ptr<Backend> backend) {
  backends_[provider] = std::move(backend);
}

void Gateway::route_all_to(std::shared_ptr<Backend> backend) {
  catch_all_ = std::move(backend);
}

void Gateway::set_cache(std::shared_ptr<ResponseCache> cache) { cache_ = std::move(cache); }

Backend& Gateway::backend_for(Provider provider) {
  if (catch_all_) return *catch_all_;
  auto it = backends_.find(provider);
  if (it == backends_.end()) {
    throw ConfigError("no backend registered for provider " + facver::to_string(provider));
  }
  return *it->second;
}

CompletionResponse Gateway::complete(const CompletionRequest& request) {
  requests_total_.fetch_add(1);

  std::string key = request.cache_key();
  if (cache_) {
    if (auto hit = cache_->lookup(key)) {
      cache_hits_.fetch_add(1);
      hit->cache_hit = true;
      return *hit;
    }
  }

  Backend& backend = backend_for(request.model.provider);

  in_flight_.acquire();
  struct Release {
    std::counting_semaphore<kMaxSemaphore>& sem;
    ~Release() { sem.release(); }
  } release{in_flight_};

  CompletionResponse response;
  int attempt = 0;
  while (true) {
    ++attempt;
    limiter_.acquire();
    backend_calls_.fetch_add(1);
    try {
      response = backend.complete(request);
      break;
    } catch (const TransportError& e) {
      if (!e.retryable() || attempt >= options_.max_attempts) throw;
      double jitter;
      {
        std::lock_guard<std::mutex> lock(retry_rng_mu_);
        jitter = 0.5 + (static_cast<double>(retry_rng_() >> 11) / 9007199254740992.0);
      }
      std::chrono::duration<double, std::milli> base(options_.initial_backoff);
      auto delay = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
          base * std::pow(2.0, attempt - 1) * jitter);
      options_.clock.sleep(delay);
    }
  }

  if (cache_) cache_->store(key, request, response);
  response.cache_hit = false;
  return response;
}

double Gateway::yes_probability(const std::string& prompt, const ModelSpec& model,
                                YesProbMode mode) {
  if (!model.token_distribution_available()) {
    throw CapabilityError("model " + model.model_name + " (provider " +
                          facver::to_string(model.provider) +
                          ") does not expose token probabilities; use a reasoning-based "
                          "verification strategy instead");
  }
  CompletionResponse response = complete(make_request(model, prompt, /*want_distribution=*/true));
  if (response.token_distribution.empty()) {
    throw ParseError("yes-probability",
                     "backend returned no token distribution for a distribution-capable model",
                     response.text);
  }
  double yes = yes_mass(response.token_distribution, "Yes");
  if (mode == YesProbMode::raw) return yes;
  double no = yes_mass(response.token_distribution, "No");
  if (yes + no <= 0.0) {
    throw ParseError("yes-probability", "neither Yes nor No carries probability mass",
                     response.text);
  }
  return yes / (yes + no);
}

GatewayCounters Gateway::counters() const {
  return GatewayCounters{requests_total_.load(), backend_calls_.load(), cache_hits_.load()};
}

}  // namespace facver
