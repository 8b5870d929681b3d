#include "facver/cache.hpp"

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>

#include "facver/errors.hpp"
#include "facver/gateway.hpp"
#include "facver/util.hpp"

namespace facver {

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::filesystem::path ResponseCache::entry_path(const std::string& key) const {
  if (key.size() < 2) throw DomainError("cache key too short: " + key);
  return dir_ / key.substr(0, 2) / (key + ".json");
}

std::optional<CompletionResponse> ResponseCache::lookup(const std::string& key) const {
  std::filesystem::path path = entry_path(key);
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception&) {
    // A corrupt entry reads as a miss; the rewrite is atomic.
    return std::nullopt;
  }
  CompletionResponse response;
  response.text = j.value("response_text", "");
  if (j.contains("first_token_distribution")) {
    for (const auto& [token, prob] : j.at("first_token_distribution").items()) {
      response.token_distribution.push_back(TokenProb{token, prob.get<double>()});
    }
  }
  if (j.contains("usage")) {
    response.usage.prompt_tokens = j["usage"].value("prompt_tokens", 0LL);
    response.usage.completion_tokens = j["usage"].value("completion_tokens", 0LL);
  }
  return response;
}

void ResponseCache::store(const std::string& key, const CompletionRequest& request,
                          const CompletionResponse& response) {
  nlohmann::json j;
  j["request_digest"] = key;
  j["model_name"] = request.model.model_name;
  j["created_at"] = utc_timestamp();
  j["response_text"] = response.text;
  if (!response.token_distribution.empty()) {
    nlohmann::json dist = nlohmann::json::object();
    for (const TokenProb& tp : response.token_distribution) {
      // Fold duplicate token texts; consumers only ever sum mass per text.
      dist[tp.token] = dist.value(tp.token, 0.0) + tp.probability;
    }
    j["first_token_distribution"] = std::move(dist);
  }
  j["usage"] = {{"prompt_tokens", response.usage.prompt_tokens},
                {"completion_tokens", response.usage.completion_tokens}};
  write_text_file_atomic(entry_path(key), j.dump(2) + "\n");
}

std::filesystem::path ResponseCache::resolve_dir(const std::optional<std::string>& explicit_dir) {
  if (explicit_dir && !explicit_dir->empty()) return *explicit_dir;
  if (const char* env = std::getenv("FACVER_CACHE_DIR"); env && *env) return env;
  return ".facver_cache";
}

}  // namespace facver
