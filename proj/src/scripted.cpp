#include "facver/scripted.hpp"

#include <nlohmann/json.hpp>

#include "facver/errors.hpp"
#include "facver/util.hpp"

namespace facver {

namespace {

// Rule matching inspects the last user message: every pipeline prompt is a
// single user turn, and revision turns end with the user's correction request.
const std::string& last_user_content(const CompletionRequest& request) {
  for (auto it = request.messages.rbegin(); it != request.messages.rend(); ++it) {
    if (it->role == "user") return it->content;
  }
  static const std::string empty;
  return empty;
}

}  // namespace

std::shared_ptr<ScriptedBackend> ScriptedBackend::from_file(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("script file " + path.string() + " is not valid JSON: " + e.what());
  }
  if (!j.contains("rules") || !j["rules"].is_array()) {
    throw ConfigError("script file " + path.string() + " must contain a \"rules\" array");
  }

  auto backend = std::make_shared<ScriptedBackend>();
  std::size_t index = 0;
  for (const auto& r : j["rules"]) {
    Rule rule;
    bool has_key = r.contains("match_key");
    bool has_sub = r.contains("match_substring");
    if (has_key == has_sub) {
      throw ConfigError("script rule #" + std::to_string(index) +
                        " must have exactly one of match_key / match_substring");
    }
    rule.trigger = has_key ? Rule::Trigger::key : Rule::Trigger::substring;
    rule.pattern = has_key ? r["match_key"].get<std::string>() : r["match_substring"].get<std::string>();
    rule.text = r.value("text", "");
    if (r.contains("token_distribution")) {
      for (const auto& tp : r["token_distribution"]) {
        rule.token_distribution.push_back(
            TokenProb{tp.at("token").get<std::string>(), tp.at("probability").get<double>()});
      }
    }
    backend->rules_.push_back(std::move(rule));
    ++index;
  }
  return backend;
}

void ScriptedBackend::add_substring_rule(std::string substring, std::string text,
                                         std::vector<TokenProb> distribution) {
  std::lock_guard<std::mutex> lock(mu_);
  rules_.push_back(Rule{Rule::Trigger::substring, std::move(substring), std::move(text),
                        std::move(distribution)});
}

void ScriptedBackend::add_key_rule(std::string key, std::string text,
                                   std::vector<TokenProb> distribution) {
  std::lock_guard<std::mutex> lock(mu_);
  rules_.push_back(
      Rule{Rule::Trigger::key, std::move(key), std::move(text), std::move(distribution)});
}

CompletionResponse ScriptedBackend::complete(const CompletionRequest& request) {
  const std::string& prompt = last_user_content(request);
  std::string key;  // computed lazily, only if a key rule exists

  std::lock_guard<std::mutex> lock(mu_);
  for (const Rule& rule : rules_) {
    bool matched = false;
    if (rule.trigger == Rule::Trigger::substring) {
      matched = prompt.find(rule.pattern) != std::string::npos;
    } else {
      if (key.empty()) key = request.cache_key();
      matched = key == rule.pattern;
    }
    if (matched) {
      CompletionResponse response;
      response.text = rule.text;
      if (request.want_token_distribution) response.token_distribution = rule.token_distribution;
      return response;
    }
  }

  std::string head = prompt.substr(0, 400);
  throw ScriptMissError("no script rule matches request (model " + request.model.model_name +
                        "); prompt head:\n" + head);
}

}  // namespace facver
