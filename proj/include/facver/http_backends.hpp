#pragma once

#include <memory>
#include <string>

#include "facver/gateway.hpp"

namespace facver {

// Live HTTP transports. Each reads its API key from the environment at
// construction (OPENAI_API_KEY / ANTHROPIC_API_KEY) and throws ConfigError if
// the key is missing. Transport failures surface as TransportError with
// retryable set for timeouts, connection resets, HTTP 429, and HTTP 5xx.

std::shared_ptr<Backend> make_openai_chat_backend(const std::string& base_url = "https://api.openai.com");
std::shared_ptr<Backend> make_openai_base_backend(const std::string& base_url = "https://api.openai.com");
std::shared_ptr<Backend> make_anthropic_backend(const std::string& base_url = "https://api.anthropic.com");

// Builds the default backend for a provider, or throws CapabilityError for
// Provider::scripted (scripted backends need an explicit script).
std::shared_ptr<Backend> make_live_backend(Provider provider);

}  // namespace facver
