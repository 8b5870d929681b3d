#include <doctest.h>

#include <nlohmann/json.hpp>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "facver/util.hpp"
#include "support.hpp"

using nlohmann::json;
using facver::read_text_file;
using facver::write_text_file;
using testsupport::TempDir;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string shell_quote(const std::string& s) {
  std::string quoted = "'";
  for (char c : s) {
    if (c == '\'') {
      quoted += "'\\''";
    } else {
      quoted += c;
    }
  }
  quoted += "'";
  return quoted;
}

CliResult run_cli(const std::vector<std::string>& args, const TempDir& scratch,
                  const std::string& tag) {
  std::filesystem::path out_file = scratch / (tag + ".stdout");
  std::filesystem::path err_file = scratch / (tag + ".stderr");

  std::string command = shell_quote(FACVER_CLI_PATH);
  for (const std::string& arg : args) command += " " + shell_quote(arg);
  command += " > " + shell_quote(out_file.string()) + " 2> " + shell_quote(err_file.string());

  int status = std::system(command.c_str());

  CliResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.out = read_text_file(out_file);
  result.err = read_text_file(err_file);
  return result;
}

const std::string kPromptsDir = FACVER_PROMPTS_DIR;

// A one-item scripted world: a two-claim summary where the second claim is
// contradicted by the document.
void write_verify_fixture(const TempDir& dir, bool faithful) {
  write_text_file(dir / "document.txt",
                  "The reservoir held 500 megaliters in June and 440 in July.");
  write_text_file(dir / "summary.txt",
                  "The reservoir held 500 megaliters in June. Levels rose in July.");
  json script = {{"rules", json::array()}};
  script["rules"].push_back(
      {{"match_substring", "The reservoir held 500 megaliters in June. Levels rose in July."},
       {"text", "The claims are:\n- The June volume was 500 megaliters.\n- July was higher "
                "than June."}});
  script["rules"].push_back(
      {{"match_substring", "Claim: The June volume was 500 megaliters."},
       {"text", "Reasoning: matches the document.\nSupported: Yes"}});
  script["rules"].push_back(
      {{"match_substring", "Claim: July was higher than June."},
       {"text", faithful ? "Reasoning: treat as fine.\nSupported: Yes"
                         : "Reasoning: July was lower.\nSupported: No"}});
  write_text_file(dir / "script.json", script.dump(2) + "\n");
}

}  // namespace

TEST_CASE("cli: verify exit codes and report shape") {
  TempDir dir;

  SUBCASE("hallucinated summary exits 3 with a full JSON report") {
    write_verify_fixture(dir, /*faithful=*/false);
    CliResult r = run_cli({"verify", (dir / "document.txt").string(),
                           (dir / "summary.txt").string(), "--judge", "scripted:judge-m",
                           "--judge-token-probs", "no", "--threshold", "0.5", "--scripted",
                           (dir / "script.json").string(), "--no-cache", "--prompts-dir",
                           kPromptsDir},
                          dir, "verify");
    CHECK(r.exit_code == 3);
    json out = json::parse(r.out);
    CHECK(out["verdict"]["label"] == "hallucinated");
    CHECK(out["verdict"]["p_summary"] == 0.0);
    CHECK(out["verdict"]["reported_hallucination_count"] == 1);
    REQUIRE(out["verdict"]["claim_verdicts"].size() == 2);
    CHECK(out["verdict"]["claim_verdicts"][0]["supported"] == true);
    CHECK(out["verdict"]["claim_verdicts"][1]["supported"] == false);
    CHECK(out["manifest"]["command"] == "verify");
    CHECK(out["manifest"]["prompt_digests"].size() == 12);
    CHECK(out["manifest"]["gateway_requests"].get<int>() >= 3);
    CHECK(out["manifest"]["config"]["judge"] == "scripted:judge-m");
  }

  SUBCASE("faithful summary exits 0") {
    write_verify_fixture(dir, /*faithful=*/true);
    CliResult r = run_cli({"verify", (dir / "document.txt").string(),
                           (dir / "summary.txt").string(), "--judge", "scripted:judge-m",
                           "--judge-token-probs", "no", "--threshold", "0.5", "--scripted",
                           (dir / "script.json").string(), "--no-cache", "--prompts-dir",
                           kPromptsDir},
                          dir, "verify-ok");
    CHECK(r.exit_code == 0);
    CHECK(json::parse(r.out)["verdict"]["label"] == "faithful");
  }

  SUBCASE("threshold and calibrate together are a config error") {
    write_verify_fixture(dir, true);
    CliResult r = run_cli({"verify", (dir / "document.txt").string(),
                           (dir / "summary.txt").string(), "--judge", "scripted:judge-m",
                           "--threshold", "0.5", "--calibrate", (dir / "script.json").string(),
                           "--scripted", (dir / "script.json").string(), "--no-cache",
                           "--prompts-dir", kPromptsDir},
                          dir, "verify-conflict");
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("error [config]") != std::string::npos);
  }

  SUBCASE("missing positional files fail argument parsing") {
    CliResult r = run_cli({"verify", (dir / "nope.txt").string(), (dir / "nope2.txt").string(),
                           "--judge", "scripted:judge-m"},
                          dir, "verify-missing");
    CHECK(r.exit_code != 0);
    CHECK_FALSE(r.err.empty());
  }
}

TEST_CASE("cli: revise writes the artifact set") {
  TempDir dir;
  write_text_file(
      dir / "item.json",
      R"x({"query_id": "q2", "question": "beta effects?", "papers": [{"reference": "Beta (2002)", "title": "Beta study", "abstract": "Mild effects only."}]})x");
  write_text_file(dir / "preset.txt", "Beta (2002) found effects.");

  json script = {{"rules", json::array()}};
  script["rules"].push_back({{"match_substring", "Claim: Beta (2002) found effects."},
                             {"text", "Critique: the effects were mild.\nSupported: No\n"
                                      "Revised Claim: Beta (2002) found mild effects."}});
  script["rules"].push_back({{"match_substring", "the effects were mild"},
                             {"text", "Corrected summary: Beta (2002) found mild effects."}});
  write_text_file(dir / "script.json", script.dump(2) + "\n");

  CliResult r = run_cli({"revise", (dir / "item.json").string(), "--summary",
                         (dir / "preset.txt").string(), "--summarizer", "scripted:gen",
                         "--critic", "scripted:critic", "--out", (dir / "out").string(),
                         "--scripted", (dir / "script.json").string(), "--no-cache",
                         "--prompts-dir", kPromptsDir},
                        dir, "revise");
  REQUIRE(r.exit_code == 0);

  CHECK(read_text_file(dir / "out/revised_summary.txt") == "Beta (2002) found mild effects.\n");
  CHECK(read_text_file(dir / "out/critique.txt") ==
        "- For the sentence \"Beta (2002) found effects.\" in the summary: the effects were "
        "mild.\n");
  CHECK(read_text_file(dir / "out/diff.txt") ==
        "- Beta (2002) found effects.\n+ Beta (2002) found mild effects.\n");

  json result = json::parse(read_text_file(dir / "out/result.json"));
  CHECK(result["query_id"] == "q2");
  CHECK(result["original_summary"] == "Beta (2002) found effects.");
  CHECK(result["revised_summary"] == "Beta (2002) found mild effects.");
  CHECK(result["revision_calls"] == 1);
  CHECK(result["passes_executed"] == 1);

  json manifest = json::parse(read_text_file(dir / "out/manifest.json"));
  CHECK(manifest["command"] == "revise");
  CHECK(manifest["config"]["critic"] == "scripted:critic");
  CHECK(manifest["gateway_requests"] == 2);  // one critique + one revision
}

TEST_CASE("cli: benchmark run calibrates, reports, and replays from cache") {
  TempDir dir;
  testsupport::BenchFixture fx = testsupport::make_bench_fixture(40);
  write_bench_fixture(fx, dir.path());

  auto bench_args = [&](const std::string& out) {
    return std::vector<std::string>{"bench-halueval",
                                    (dir / "dataset.jsonl").string(),
                                    "--method",
                                    "factored",
                                    "--judge",
                                    "scripted:judge-m",
                                    "--judge-token-probs",
                                    "no",
                                    "--seed",
                                    "7",
                                    "--scripted",
                                    (dir / "script.json").string(),
                                    "--cache-dir",
                                    (dir / "cache").string(),
                                    "--out",
                                    (dir / out).string(),
                                    "--prompts-dir",
                                    kPromptsDir};
  };

  CliResult first = run_cli(bench_args("out1"), dir, "bench1");
  REQUIRE(first.exit_code == 0);

  json accuracy = json::parse(read_text_file(dir / "out1/accuracy.json"));
  REQUIRE(accuracy.size() == 1);
  CHECK(accuracy[0]["method"] == "factored");
  CHECK(accuracy[0]["model"] == "judge-m");
  CHECK(accuracy[0]["accuracy"] == 100.0);
  CHECK(accuracy[0]["abstentions"] == 0);
  CHECK(accuracy[0]["evaluated"] == 16);  // 20% of 80 instances
  CHECK(accuracy[0]["seed"] == 7);
  // Class means 1.0 and 0.0 put the calibrated boundary at their midpoint.
  CHECK(accuracy[0]["threshold"]["value"] == 0.5);
  CHECK(accuracy[0]["threshold"]["split_tag"] == "train@seed=7");

  CHECK(std::filesystem::exists(dir / "out1/predictions.jsonl"));
  CHECK(std::filesystem::exists(dir / "out1/report.txt"));
  std::string csv = read_text_file(dir / "out1/accuracy.csv");
  CHECK(csv.find("factored,judge-m,100.000000,") != std::string::npos);

  // A rerun against the warm cache reproduces every artifact byte for byte.
  CliResult second = run_cli(bench_args("out2"), dir, "bench2");
  REQUIRE(second.exit_code == 0);
  for (const char* name :
       {"accuracy.json", "predictions.jsonl", "report.txt", "accuracy.csv", "manifest.json"}) {
    CAPTURE(name);
    CHECK(read_text_file(dir / "out1" / name) == read_text_file(dir / "out2" / name));
  }
  json manifest = json::parse(read_text_file(dir / "out1/manifest.json"));
  CHECK(manifest["command"] == "bench-halueval");
  CHECK(manifest["config"]["method"] == "factored");
  CHECK(manifest["gateway_requests"].get<long long>() > 0);
}

TEST_CASE("cli: paper evaluation grid") {
  TempDir dir;
  std::string dataset =
      R"x({"query_id": "q1", "question": "alpha effects?", "papers": [{"reference": "Alpha (2001)", "title": "Alpha study", "abstract": "Effects were found."}]})x"
      "\n"
      R"x({"query_id": "q2", "question": "beta effects?", "papers": [{"reference": "Beta (2002)", "title": "Beta study", "abstract": "Mild effects only."}]})x"
      "\n";
  write_text_file(dir / "dataset.jsonl", dataset);
  write_text_file(dir / "summaries.jsonl",
                  R"x({"query_id": "q1", "summary": "Alpha (2001) found effects."})x"
                  "\n"
                  R"x({"query_id": "q2", "summary": "Beta (2002) found effects."})x"
                  "\n");

  // No generation rules: presets must make summarizer calls unnecessary.
  json script = {{"rules", json::array()}};
  script["rules"].push_back({{"match_substring", "Claim: Alpha (2001) found effects."},
                             {"text", "Critique: matches.\nSupported: Yes\nRevised Claim: N/A"}});
  script["rules"].push_back({{"match_substring", "Claim: Beta (2002) found effects."},
                             {"text", "Critique: the effects were mild.\nSupported: No\n"
                                      "Revised Claim: Beta (2002) found mild effects."}});
  script["rules"].push_back({{"match_substring", "Claim: Beta (2002) found mild effects."},
                             {"text", "Critique: matches.\nSupported: Yes\nRevised Claim: N/A"}});
  script["rules"].push_back({{"match_substring", "the effects were mild"},
                             {"text", "Corrected summary: Beta (2002) found mild effects."}});
  write_text_file(dir / "script.json", script.dump(2) + "\n");

  CliResult r = run_cli({"eval-papers", (dir / "dataset.jsonl").string(), "--role",
                         "scripted:gen,-,scripted:judge", "--role",
                         "scripted:gen,scripted:critic,scripted:judge", "--summaries",
                         (dir / "summaries.jsonl").string(), "--out", (dir / "out").string(),
                         "--scripted", (dir / "script.json").string(), "--no-cache",
                         "--prompts-dir", kPromptsDir},
                        dir, "eval");
  REQUIRE(r.exit_code == 0);

  json stats = json::parse(read_text_file(dir / "out/stats.json"));
  REQUIRE(stats.size() == 2);
  CHECK(stats[0]["config"] == "gen/-/judge");
  CHECK(stats[0]["stats"]["reported_per_summary"] == 0.5);
  CHECK(stats[0]["items_failed"] == 0);
  CHECK(stats[1]["config"] == "gen/critic/judge");
  CHECK(stats[1]["stats"]["reported_per_summary"] == 0.0);

  std::string csv = read_text_file(dir / "out/stats.csv");
  CHECK(csv.find("gen,-,judge,2,0.500000,0.333333,50.00,0\n") != std::string::npos);
  CHECK(csv.find("gen,critic,judge,2,0.000000,0.000000,0.00,0\n") != std::string::npos);

  std::vector<std::string> verdict_lines;
  for (const std::string& line : facver::split_lines(read_text_file(dir / "out/verdicts.jsonl"))) {
    if (!facver::trim(line).empty()) verdict_lines.push_back(line);
  }
  REQUIRE(verdict_lines.size() == 4);
  json first_verdict = json::parse(verdict_lines[0]);
  CHECK(first_verdict["config"] == "gen/-/judge");
  CHECK(first_verdict["summary_id"] == "q1");

  CHECK(read_text_file(dir / "out/summary_diffs/gen_critic_judge/q2.diff") ==
        "- Beta (2002) found effects.\n+ Beta (2002) found mild effects.\n");
  CHECK(read_text_file(dir / "out/summary_diffs/gen_critic_judge/q1.diff") ==
        "  Alpha (2001) found effects.\n");
  CHECK(json::parse(read_text_file(dir / "out/manifest.json"))["command"] == "eval-papers");
}

TEST_CASE("cli: dataset import") {
  TempDir dir;
  write_text_file(
      dir / "published.json",
      R"x([{"id": "q9", "query": "what?", "abstracts": [{"reference": "A (2000)", "title": "T", "text": "body"}]}])x");

  CliResult r = run_cli({"import-papers", (dir / "published.json").string(),
                         (dir / "canonical.jsonl").string()},
                        dir, "import");
  REQUIRE(r.exit_code == 0);

  std::string out = read_text_file(dir / "canonical.jsonl");
  json record = json::parse(facver::split_lines(out)[0]);
  CHECK(record["query_id"] == "q9");
  CHECK(record["question"] == "what?");
  CHECK(record["papers"][0]["abstract"] == "body");
}
