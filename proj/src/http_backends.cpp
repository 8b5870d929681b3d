#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdlib>

#include "facver/errors.hpp"
#include "facver/http_backends.hpp"

namespace facver {

namespace {

using nlohmann::json;

std::string require_env(const char* var, const std::string& provider) {
  const char* value = std::getenv(var);
  if (!value || !*value) {
    throw ConfigError(provider + " backend needs the " + var + " environment variable");
  }
  return value;
}

bool retryable_status(int status) { return status == 429 || status >= 500; }

// Runs the POST and normalizes transport-level failures. Returns the parsed
// body of a 2xx response.
json post_json(httplib::Client& client, const std::string& path, const httplib::Headers& headers,
               const json& body, const std::string& provider) {
  auto res = client.Post(path, headers, body.dump(), "application/json");
  if (!res) {
    throw TransportError(provider + " connection failed: " + httplib::to_string(res.error()),
                         /*status=*/0, /*retryable=*/true);
  }
  if (res->status < 200 || res->status >= 300) {
    std::string detail = res->body.substr(0, 500);
    throw TransportError(provider + " returned HTTP " + std::to_string(res->status) + ": " + detail,
                         res->status, retryable_status(res->status));
  }
  try {
    return json::parse(res->body);
  } catch (const json::exception& e) {
    throw TransportError(provider + " returned unparseable JSON: " + std::string(e.what()),
                         res->status, /*retryable=*/false);
  }
}

std::unique_ptr<httplib::Client> make_client(const std::string& base_url) {
  auto client = std::make_unique<httplib::Client>(base_url);
  client->set_connection_timeout(30);
  client->set_read_timeout(180);
  client->set_write_timeout(30);
  return client;
}

std::string joined_prompt(const CompletionRequest& request) {
  std::string prompt;
  for (const Message& m : request.messages) {
    if (!prompt.empty()) prompt += "\n\n";
    prompt += m.content;
  }
  return prompt;
}

class OpenAiChatBackend : public Backend {
 public:
  explicit OpenAiChatBackend(std::string base_url)
      : api_key_(require_env("OPENAI_API_KEY", "openai-chat")), base_url_(std::move(base_url)) {}

  CompletionResponse complete(const CompletionRequest& request) override {
    json body;
    body["model"] = request.model.model_name;
    body["temperature"] = request.model.temperature;
    body["max_tokens"] = request.model.max_tokens;
    json messages = json::array();
    for (const Message& m : request.messages) {
      messages.push_back({{"role", m.role}, {"content", m.content}});
    }
    body["messages"] = std::move(messages);
    if (request.want_token_distribution) {
      body["logprobs"] = true;
      body["top_logprobs"] = 20;
    }

    auto client = make_client(base_url_);
    httplib::Headers headers{{"Authorization", "Bearer " + api_key_}};
    json reply = post_json(*client, "/v1/chat/completions", headers, body, "openai-chat");

    CompletionResponse response;
    const json& choice = reply.at("choices").at(0);
    response.text = choice.at("message").value("content", "");
    if (request.want_token_distribution && choice.contains("logprobs") &&
        !choice["logprobs"].is_null()) {
      const json& content = choice["logprobs"].value("content", json::array());
      if (!content.empty()) {
        for (const auto& alt : content.at(0).value("top_logprobs", json::array())) {
          response.token_distribution.push_back(TokenProb{
              alt.at("token").get<std::string>(), std::exp(alt.at("logprob").get<double>())});
        }
      }
    }
    if (reply.contains("usage")) {
      response.usage.prompt_tokens = reply["usage"].value("prompt_tokens", 0LL);
      response.usage.completion_tokens = reply["usage"].value("completion_tokens", 0LL);
    }
    return response;
  }

  std::string name() const override { return "openai-chat"; }

 private:
  std::string api_key_;
  std::string base_url_;
};

class OpenAiBaseBackend : public Backend {
 public:
  explicit OpenAiBaseBackend(std::string base_url)
      : api_key_(require_env("OPENAI_API_KEY", "openai-base")), base_url_(std::move(base_url)) {}

  CompletionResponse complete(const CompletionRequest& request) override {
    json body;
    body["model"] = request.model.model_name;
    body["temperature"] = request.model.temperature;
    body["max_tokens"] = request.model.max_tokens;
    body["prompt"] = joined_prompt(request);
    if (request.want_token_distribution) body["logprobs"] = 5;

    auto client = make_client(base_url_);
    httplib::Headers headers{{"Authorization", "Bearer " + api_key_}};
    json reply = post_json(*client, "/v1/completions", headers, body, "openai-base");

    CompletionResponse response;
    const json& choice = reply.at("choices").at(0);
    response.text = choice.value("text", "");
    if (request.want_token_distribution && choice.contains("logprobs") &&
        !choice["logprobs"].is_null()) {
      const json& top = choice["logprobs"].value("top_logprobs", json::array());
      if (!top.empty()) {
        for (const auto& [token, logprob] : top.at(0).items()) {
          response.token_distribution.push_back(
              TokenProb{token, std::exp(logprob.get<double>())});
        }
      }
    }
    if (reply.contains("usage")) {
      response.usage.prompt_tokens = reply["usage"].value("prompt_tokens", 0LL);
      response.usage.completion_tokens = reply["usage"].value("completion_tokens", 0LL);
    }
    return response;
  }

  std::string name() const override { return "openai-base"; }

 private:
  std::string api_key_;
  std::string base_url_;
};

class AnthropicBackend : public Backend {
 public:
  explicit AnthropicBackend(std::string base_url)
      : api_key_(require_env("ANTHROPIC_API_KEY", "anthropic")), base_url_(std::move(base_url)) {}

  CompletionResponse complete(const CompletionRequest& request) override {
    json body;
    body["model"] = request.model.model_name;
    body["temperature"] = request.model.temperature;
    body["max_tokens"] = request.model.max_tokens;
    json messages = json::array();
    std::string system;
    for (const Message& m : request.messages) {
      if (m.role == "system") {
        system = m.content;  // messages API takes the system turn out of band
      } else {
        messages.push_back({{"role", m.role}, {"content", m.content}});
      }
    }
    body["messages"] = std::move(messages);
    if (!system.empty()) body["system"] = system;

    auto client = make_client(base_url_);
    httplib::Headers headers{{"x-api-key", api_key_}, {"anthropic-version", "2023-06-01"}};
    json reply = post_json(*client, "/v1/messages", headers, body, "anthropic");

    CompletionResponse response;
    for (const auto& block : reply.value("content", json::array())) {
      if (block.value("type", "") == "text") response.text += block.value("text", "");
    }
    if (reply.contains("usage")) {
      response.usage.prompt_tokens = reply["usage"].value("input_tokens", 0LL);
      response.usage.completion_tokens = reply["usage"].value("output_tokens", 0LL);
    }
    return response;
  }

  std::string name() const override { return "anthropic"; }

 private:
  std::string api_key_;
  std::string base_url_;
};

}  // namespace

std::shared_ptr<Backend> make_openai_chat_backend(const std::string& base_url) {
  return std::make_shared<OpenAiChatBackend>(base_url);
}

std::shared_ptr<Backend> make_openai_base_backend(const std::string& base_url) {
  return std::make_shared<OpenAiBaseBackend>(base_url);
}

std::shared_ptr<Backend> make_anthropic_backend(const std::string& base_url) {
  return std::make_shared<AnthropicBackend>(base_url);
}

std::shared_ptr<Backend> make_live_backend(Provider provider) {
  switch (provider) {
    case Provider::openai_chat: return make_openai_chat_backend();
    case Provider::openai_base: return make_openai_base_backend();
    case Provider::anthropic: return make_anthropic_backend();
    case Provider::scripted:
      throw CapabilityError("scripted provider has no live backend; pass --scripted <script>");
  }
  throw DomainError("unknown provider enum value");
}

}  // namespace facver
