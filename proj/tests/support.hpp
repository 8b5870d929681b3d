// Shared helpers for the test binaries: temp directories, scripted gateways,
// and the benchmark fixture generator used by both the unit tests and the
// acceptance suite.
#pragma once

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <unistd.h>
#include <vector>

#include <nlohmann/json.hpp>

#include "facver/gateway.hpp"
#include "facver/prompts.hpp"
#include "facver/scripted.hpp"
#include "facver/util.hpp"

#ifndef FACVER_PROMPTS_DIR
#define FACVER_PROMPTS_DIR "prompts"
#endif

namespace testsupport {

inline facver::PromptCatalog prompts() { return facver::PromptCatalog(FACVER_PROMPTS_DIR); }

// Unique writable directory, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<unsigned> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("facver-test-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::unique_ptr<facver::Gateway> make_gateway(std::shared_ptr<facver::Backend> backend,
                                                     facver::GatewayOptions options = {}) {
  auto gateway = std::make_unique<facver::Gateway>(options);
  gateway->route_all_to(std::move(backend));
  return gateway;
}

// Wraps another backend and records every outgoing request so tests can
// inspect the exact prompts the pipeline sends.
struct RecordingBackend : facver::Backend {
  explicit RecordingBackend(std::shared_ptr<facver::Backend> inner) : inner(std::move(inner)) {}

  facver::CompletionResponse complete(const facver::CompletionRequest& request) override {
    {
      std::lock_guard<std::mutex> lock(mu);
      requests.push_back(request);
    }
    return inner->complete(request);
  }
  std::string name() const override { return "recording"; }

  std::string last_prompt() {
    std::lock_guard<std::mutex> lock(mu);
    if (requests.empty()) throw std::logic_error("no requests recorded");
    return requests.back().messages.back().content;
  }
  std::vector<facver::Message> last_messages() {
    std::lock_guard<std::mutex> lock(mu);
    if (requests.empty()) throw std::logic_error("no requests recorded");
    return requests.back().messages;
  }

  std::shared_ptr<facver::Backend> inner;
  std::vector<facver::CompletionRequest> requests;
  std::mutex mu;
};

inline facver::ModelSpec scripted_model(const std::string& name = "scripted-model") {
  facver::ModelSpec spec;
  spec.provider = facver::Provider::scripted;
  spec.model_name = name;
  return spec;
}

// Scripted judge limited to text responses: forces the reasoned Yes/No
// verification strategy so claim probabilities are exactly 0 or 1.
inline facver::ModelSpec cot_model(const std::string& name = "scripted-model") {
  facver::ModelSpec spec = scripted_model(name);
  spec.supports_token_distribution = false;
  return spec;
}

inline std::vector<facver::TokenProb> yes_no(double yes, double no) {
  return {facver::TokenProb{" Yes", yes}, facver::TokenProb{" No", no}};
}

// ---------------------------------------------------------------------------
// Benchmark fixture: `item_count` items, each expanding to a faithful and a
// hallucinated instance. Every summary decomposes (via scripted responses to
// the claim-extraction prompt) into one uniquely named claim; claim verdicts
// come back Yes for faithful summaries and No for hallucinated ones, except
// for instance ids listed in `flipped` whose verdict is inverted.

struct BenchFixture {
  std::vector<std::string> item_lines;           // dataset JSONL lines
  nlohmann::json script = {{"rules", nlohmann::json::array()}};

  std::string dataset_text() const {
    std::string out;
    for (const auto& line : item_lines) out += line + "\n";
    return out;
  }
};

inline std::string bench_item_id(int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "item%02d", i);
  return buf;
}

inline BenchFixture make_bench_fixture(int item_count,
                                       const std::vector<std::string>& flipped = {}) {
  BenchFixture fx;
  auto is_flipped = [&flipped](const std::string& instance_id) {
    for (const auto& f : flipped) {
      if (f == instance_id) return true;
    }
    return false;
  };

  for (int i = 0; i < item_count; ++i) {
    std::string id = bench_item_id(i);
    std::string document = "Station " + id + " recorded a flow of " + std::to_string(100 + i) +
                           " liters per hour during the audit period.";
    std::string faithful_summary =
        "Audit note " + id + ": flow measured at " + std::to_string(100 + i) + " liters per hour.";
    std::string hallucinated_summary =
        "Audit note " + id + ": the station was closed for the whole audit period.";

    nlohmann::json item;
    item["item_id"] = id;
    item["document"] = document;
    item["right_summary"] = faithful_summary;
    item["hallucinated_summary"] = hallucinated_summary;
    fx.item_lines.push_back(item.dump());

    std::string faithful_claim = "Checkpoint " + id + "F registered the audited flow.";
    std::string hallucinated_claim = "Checkpoint " + id + "H stayed closed throughout.";

    // Claim extraction: one claim per summary, keyed on the summary text.
    fx.script["rules"].push_back({{"match_substring", faithful_summary},
                                  {"text", "The claims are:\n- " + faithful_claim}});
    fx.script["rules"].push_back({{"match_substring", hallucinated_summary},
                                  {"text", "The claims are:\n- " + hallucinated_claim}});

    // Claim verdicts (reasoned Yes/No), honoring injected judge errors.
    bool faithful_yes = !is_flipped(id + "/faithful");
    bool hallucinated_no = !is_flipped(id + "/hallucinated");
    fx.script["rules"].push_back(
        {{"match_substring", "Claim: " + faithful_claim},
         {"text", std::string("Reasoning: \"flow\" matches the document.\nSupported: ") +
                      (faithful_yes ? "Yes" : "No")}});
    fx.script["rules"].push_back(
        {{"match_substring", "Claim: " + hallucinated_claim},
         {"text", std::string("Reasoning: \"closed\" contradicts the document.\nSupported: ") +
                      (hallucinated_no ? "No" : "Yes")}});
  }
  return fx;
}

inline std::filesystem::path write_bench_fixture(const BenchFixture& fx,
                                                 const std::filesystem::path& dir) {
  facver::write_text_file(dir / "dataset.jsonl", fx.dataset_text());
  facver::write_text_file(dir / "script.json", fx.script.dump(2) + "\n");
  return dir;
}

}  // namespace testsupport
