#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "facver/gateway.hpp"

namespace facver {

// Deterministic offline backend. Responses are produced by an ordered rule
// list; the first rule whose trigger matches the request wins. A request no
// rule matches raises ScriptMissError — silence would let fixture gaps
// masquerade as model behavior.
class ScriptedBackend : public Backend {
 public:
  struct Rule {
    enum class Trigger { key, substring } trigger = Trigger::substring;
    std::string pattern;  // exact cache key, or substring of the last user message
    std::string text;
    std::vector<TokenProb> token_distribution;
  };

  ScriptedBackend() = default;

  // Loads rules from a JSON script file:
  //   {"rules": [{"match_substring": "...", "text": "...",
  //               "token_distribution": [{"token": "Yes", "probability": 0.9}]}, ...]}
  // Each rule has exactly one of match_key / match_substring; text and
  // token_distribution are each optional.
  static std::shared_ptr<ScriptedBackend> from_file(const std::filesystem::path& path);

  void add_substring_rule(std::string substring, std::string text,
                          std::vector<TokenProb> distribution = {});
  void add_key_rule(std::string key, std::string text, std::vector<TokenProb> distribution = {});

  CompletionResponse complete(const CompletionRequest& request) override;
  std::string name() const override { return "scripted"; }

  std::size_t rule_count() const { return rules_.size(); }

 private:
  std::vector<Rule> rules_;
  mutable std::mutex mu_;
};

}  // namespace facver
