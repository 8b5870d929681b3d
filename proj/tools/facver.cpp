// Command-line front end: verify / revise / bench-halueval / eval-papers /
// import-papers. Stdout carries machine-readable JSON only; diagnostics go to
// stderr. Exit codes: 0 success (verify: faithful), 3 verify: hallucinated,
// 1 any error.
#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "facver/cache.hpp"
#include "facver/critique.hpp"
#include "facver/decompose.hpp"
#include "facver/errors.hpp"
#include "facver/gateway.hpp"
#include "facver/halueval.hpp"
#include "facver/http_backends.hpp"
#include "facver/papers.hpp"
#include "facver/probability.hpp"
#include "facver/prompts.hpp"
#include "facver/scripted.hpp"
#include "facver/serialize.hpp"
#include "facver/util.hpp"
#include "facver/verify.hpp"

namespace {

using facver::ConfigError;
using facver::Gateway;
using facver::GatewayOptions;
using facver::ModelSpec;
using facver::PromptCatalog;
using facver::ResponseCache;
using facver::ScriptedBackend;
using facver::SourceDocument;
using facver::Threshold;
using nlohmann::json;

struct CommonOptions {
  std::string scripted_path;
  std::string cache_dir;
  bool no_cache = false;
  int max_in_flight = 4;
  double rate_limit = 0.0;
  std::uint64_t seed = 0;
  std::string prompts_dir;
  double temperature = 0.0;
  int max_tokens = 512;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--scripted", o.scripted_path,
                  "JSON script file; routes every provider to the deterministic scripted backend")
      ->check(CLI::ExistingFile);
  cmd->add_option("--cache-dir", o.cache_dir,
                  "Response cache directory (default: $FACVER_CACHE_DIR or .facver_cache)");
  cmd->add_flag("--no-cache", o.no_cache, "Disable the response cache");
  cmd->add_option("--max-in-flight", o.max_in_flight, "Maximum concurrent backend requests")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--rate-limit", o.rate_limit,
                  "Pace backend calls to this many requests per minute (0 = unpaced)");
  cmd->add_option("--seed", o.seed, "Seed for sampling and retry jitter");
  cmd->add_option("--prompts-dir", o.prompts_dir,
                  "Prompt template directory (default: $FACVER_PROMPTS_DIR or ./prompts)");
  cmd->add_option("--temperature", o.temperature, "Sampling temperature for every role");
  cmd->add_option("--max-tokens", o.max_tokens, "Completion token cap for every role");
}

ModelSpec parse_model_spec(const std::string& text, const CommonOptions& common) {
  std::size_t colon = text.find(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == text.size()) {
    throw ConfigError("model spec must be <provider>:<model_name>, got \"" + text + "\"");
  }
  ModelSpec spec;
  spec.provider = facver::provider_from_string(text.substr(0, colon));
  spec.model_name = text.substr(colon + 1);
  spec.temperature = common.temperature;
  spec.max_tokens = common.max_tokens;
  return spec;
}

void apply_token_probs_override(ModelSpec& spec, const std::string& value) {
  if (value == "auto" || value.empty()) return;
  if (value == "yes") {
    spec.supports_token_distribution = true;
  } else if (value == "no") {
    spec.supports_token_distribution = false;
  } else {
    throw ConfigError("--judge-token-probs must be auto|yes|no, got " + value);
  }
}

PromptCatalog open_prompts(const CommonOptions& common) {
  return common.prompts_dir.empty() ? PromptCatalog() : PromptCatalog(common.prompts_dir);
}

std::unique_ptr<Gateway> make_gateway(const CommonOptions& common,
                                      const std::vector<ModelSpec>& used_models) {
  GatewayOptions options;
  options.max_in_flight = common.max_in_flight;
  options.rate_limit_per_minute = common.rate_limit;
  options.retry_seed = common.seed;
  auto gateway = std::make_unique<Gateway>(options);

  if (!common.scripted_path.empty()) {
    gateway->route_all_to(ScriptedBackend::from_file(common.scripted_path));
  } else {
    std::set<facver::Provider> providers;
    for (const ModelSpec& m : used_models) providers.insert(m.provider);
    for (facver::Provider p : providers) {
      gateway->register_backend(p, facver::make_live_backend(p));
    }
  }

  if (!common.no_cache) {
    std::optional<std::string> dir;
    if (!common.cache_dir.empty()) dir = common.cache_dir;
    gateway->set_cache(std::make_shared<ResponseCache>(ResponseCache::resolve_dir(dir)));
  }
  return gateway;
}

json prompt_digests_json(const PromptCatalog& prompts) {
  json digests = json::object();
  for (const std::string& name : prompts.names()) digests[name] = prompts.digest(name);
  return digests;
}

// Replay contract: every field here is identical when the same command is
// rerun on the same inputs (requests_total counts logical requests, which the
// cache serves identically on replay).
json make_manifest(const std::string& command, const json& config, const PromptCatalog& prompts,
                   std::uint64_t seed, const Gateway& gateway) {
  json manifest;
  manifest["command"] = command;
  manifest["config"] = config;
  manifest["config_digest"] = facver::sha256_hex(config.dump());
  manifest["prompt_digests"] = prompt_digests_json(prompts);
  manifest["seed"] = seed;
  manifest["gateway_requests"] = gateway.counters().requests_total;
  return manifest;
}

json common_config_json(const CommonOptions& common) {
  json j;
  j["scripted"] = common.scripted_path;
  j["cache"] = !common.no_cache;
  j["max_in_flight"] = common.max_in_flight;
  j["rate_limit"] = common.rate_limit;
  j["temperature"] = common.temperature;
  j["max_tokens"] = common.max_tokens;
  return j;
}

std::string sanitize_label(const std::string& label) {
  std::string out;
  for (char c : label) {
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.') ? c : '_';
  }
  return out;
}

// ---------------------------------------------------------------------------
// verify

struct VerifyOptions {
  CommonOptions common;
  std::string document_path;
  std::string summary_path;
  std::string judge_spec;
  std::string decomposer_spec;
  std::string mode = "auto";  // auto|logprob|cot
  std::string judge_token_probs = "auto";
  std::string yes_mode = "raw";
  double threshold = 0.5;
  bool threshold_given = false;
  std::string calibrate_path;
};

int run_verify(const VerifyOptions& o) {
  PromptCatalog prompts = open_prompts(o.common);
  ModelSpec judge = parse_model_spec(o.judge_spec, o.common);
  apply_token_probs_override(judge, o.judge_token_probs);

  facver::VerificationMode mode;
  mode.judge = judge;
  if (!o.decomposer_spec.empty()) mode.decomposer = parse_model_spec(o.decomposer_spec, o.common);
  if (o.mode == "auto") {
    mode.strategy = judge.token_distribution_available() ? facver::VerifyStrategy::logprob
                                                         : facver::VerifyStrategy::cot;
  } else {
    mode.strategy = facver::verify_strategy_from_string(o.mode);
  }
  mode.yes_mode = o.yes_mode == "normalized" ? facver::YesProbMode::normalized
                                             : facver::YesProbMode::raw;

  std::vector<ModelSpec> used{judge};
  if (mode.decomposer) used.push_back(*mode.decomposer);
  std::unique_ptr<Gateway> gateway_ptr = make_gateway(o.common, used);
  Gateway& gateway = *gateway_ptr;

  std::string document = facver::read_text_file(o.document_path);
  std::string summary = facver::read_text_file(o.summary_path);

  Threshold threshold = Threshold::fixed(o.threshold);
  if (!o.calibrate_path.empty()) {
    if (o.threshold_given) {
      throw ConfigError("--threshold and --calibrate are mutually exclusive");
    }
    auto items = facver::halueval::load_halueval(o.calibrate_path);
    auto instances = facver::halueval::make_instances(items);
    auto splits = facver::halueval::sample_splits(instances.size(), o.common.seed);
    std::vector<std::pair<double, facver::Label>> labeled;
    for (std::size_t index : splits.train) {
      const auto& instance = instances[index];
      facver::SummaryVerdict v = facver::verify_summary(
          instance.instance_id, instance.summary, {SourceDocument{"", "", instance.document}},
          gateway, mode, prompts, Threshold::fixed(0.5), o.common.max_in_flight);
      labeled.emplace_back(v.p_summary, instance.gold);
    }
    threshold = facver::calibrate(labeled, "train@seed=" + std::to_string(o.common.seed));
  }

  facver::SummaryVerdict verdict =
      facver::verify_summary("summary", summary, {SourceDocument{"", "", document}}, gateway,
                             mode, prompts, threshold, o.common.max_in_flight);

  json config = common_config_json(o.common);
  config["judge"] = o.judge_spec;
  config["mode"] = facver::to_string(mode.strategy);
  config["threshold"] = facver::to_json(threshold);

  json out;
  out["verdict"] = facver::to_json(verdict);
  out["manifest"] = make_manifest("verify", config, prompts, o.common.seed, gateway);
  std::cout << facver::dump_json_pretty(out);

  return verdict.label == facver::Label::faithful ? 0 : 3;
}

// ---------------------------------------------------------------------------
// revise

struct ReviseOptions {
  CommonOptions common;
  std::string item_path;
  std::string summary_path;
  std::string summarizer_spec;
  std::string critic_spec;
  std::string out_dir;
  int passes = 1;
};

facver::papers::QueryItem load_single_item(const std::string& path) {
  std::string content = facver::read_text_file(path);
  std::string trimmed = facver::trim(content);
  if (!trimmed.empty() && trimmed.front() == '{' &&
      trimmed.find('\n') > trimmed.rfind('}')) {  // one-object file
    return facver::papers::query_item_from_json_line(trimmed, 1);
  }
  auto items = facver::papers::load_query_dataset(path);
  if (items.size() != 1) {
    throw ConfigError("revise expects exactly one query item; " + path + " holds " +
                      std::to_string(items.size()));
  }
  return items.front();
}

int run_revise(const ReviseOptions& o) {
  PromptCatalog prompts = open_prompts(o.common);
  ModelSpec summarizer = parse_model_spec(o.summarizer_spec, o.common);
  ModelSpec critic = o.critic_spec.empty() ? summarizer : parse_model_spec(o.critic_spec, o.common);
  std::unique_ptr<Gateway> gateway_ptr = make_gateway(o.common, {summarizer, critic});
  Gateway& gateway = *gateway_ptr;

  facver::papers::QueryItem item = load_single_item(o.item_path);

  std::string original;
  facver::ConversationContext context;
  if (!o.summary_path.empty()) {
    original = facver::read_text_file(o.summary_path);
    context.messages.push_back(
        facver::Message{"user", facver::papers::build_generation_prompt(item, prompts)});
    context.messages.push_back(facver::Message{"assistant", original});
  } else {
    facver::papers::GeneratedSummary generated =
        facver::papers::generate_summary(item, gateway, summarizer, prompts);
    original = generated.text;
    context = generated.context;
  }

  facver::SourceResolver resolve = [&item](const facver::Claim& claim) {
    return facver::papers::gather_sources(claim, item);
  };
  facver::RevisionOutcome outcome = facver::revise_pipeline(
      original, resolve, gateway, critic, summarizer, prompts, context, o.passes);

  std::filesystem::path out(o.out_dir);
  facver::write_text_file(out / "revised_summary.txt", outcome.revised_summary + "\n");
  facver::write_text_file(out / "critique.txt",
                          outcome.critique.empty() ? "" : outcome.critique.to_text() + "\n");
  facver::write_text_file(out / "diff.txt",
                          facver::papers::sentence_diff(original, outcome.revised_summary));

  json result;
  result["query_id"] = item.query_id;
  result["original_summary"] = original;
  result["revised_summary"] = outcome.revised_summary;
  result["revision_calls"] = outcome.revision_calls;
  result["passes_executed"] = outcome.pass_critiques.size();
  json pass_entries = json::array();
  for (const auto& fc : outcome.pass_critiques) pass_entries.push_back(facver::to_json(fc));
  result["pass_critiques"] = std::move(pass_entries);
  if (!outcome.warnings.empty()) result["warnings"] = outcome.warnings;
  facver::write_text_file(out / "result.json", facver::dump_json_pretty(result));

  json config = common_config_json(o.common);
  config["summarizer"] = o.summarizer_spec;
  config["critic"] = o.critic_spec.empty() ? o.summarizer_spec : o.critic_spec;
  config["passes"] = o.passes;
  config["summary_file"] = o.summary_path;
  facver::write_text_file(
      out / "manifest.json",
      facver::dump_json_pretty(make_manifest("revise", config, prompts, o.common.seed, gateway)));

  std::cerr << "wrote revision artifacts to " << out.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// bench-halueval

struct BenchOptions {
  CommonOptions common;
  std::string dataset_path;
  std::string method = "factored";
  std::string judge_spec;
  std::string decomposer_spec;
  std::string judge_token_probs = "auto";
  std::string yes_mode = "raw";
  std::string out_dir;
  double threshold = 0.0;
  bool threshold_given = false;
  bool strict = true;
};

int run_bench(const BenchOptions& o) {
  namespace he = facver::halueval;
  PromptCatalog prompts = open_prompts(o.common);

  he::Method method;
  method.kind = he::method_from_string(o.method);
  method.judge = parse_model_spec(o.judge_spec, o.common);
  apply_token_probs_override(method.judge, o.judge_token_probs);
  if (!o.decomposer_spec.empty()) method.decomposer = parse_model_spec(o.decomposer_spec, o.common);
  method.yes_mode = o.yes_mode == "normalized" ? facver::YesProbMode::normalized
                                               : facver::YesProbMode::raw;

  std::vector<ModelSpec> used{method.judge};
  if (method.decomposer) used.push_back(*method.decomposer);
  std::unique_ptr<Gateway> gateway_ptr = make_gateway(o.common, used);
  Gateway& gateway = *gateway_ptr;

  auto items = he::load_halueval(o.dataset_path);
  auto instances = he::make_instances(items);
  auto splits = he::sample_splits(instances.size(), o.common.seed);

  std::optional<Threshold> threshold;
  if (o.threshold_given) {
    threshold = Threshold::fixed(o.threshold);
  } else if (method.kind == he::MethodKind::factored) {
    // Calibrate on the train split: score each train instance, then place the
    // boundary between the class means. Test data never feeds calibration.
    facver::VerificationMode mode;
    mode.strategy = method.judge.token_distribution_available() ? facver::VerifyStrategy::logprob
                                                                : facver::VerifyStrategy::cot;
    mode.judge = method.judge;
    mode.decomposer = method.decomposer;
    mode.yes_mode = method.yes_mode;

    std::vector<std::pair<double, facver::Label>> labeled(splits.train.size());
    facver::parallel_for(splits.train.size(), o.common.max_in_flight, [&](std::size_t k) {
      const he::Instance& instance = instances[splits.train[k]];
      facver::SummaryVerdict v = facver::verify_summary(
          instance.instance_id, instance.summary, {SourceDocument{"", "", instance.document}},
          gateway, mode, prompts, Threshold::fixed(0.5), /*max_in_flight=*/1);
      labeled[k] = {v.p_summary, instance.gold};
    });
    threshold = facver::calibrate(labeled, "train@seed=" + std::to_string(o.common.seed));
    std::cerr << "calibrated threshold " << threshold->value << " on " << splits.train.size()
              << " train instances\n";
  }

  he::RunOptions run_options;
  run_options.max_in_flight = o.common.max_in_flight;
  auto predictions = he::run_method(instances, splits.test, method, gateway, prompts, threshold,
                                    run_options);

  he::AbstainPolicy policy =
      o.strict ? he::AbstainPolicy::count_as_incorrect : he::AbstainPolicy::exclude;
  double accuracy = he::compute_accuracy(predictions, instances, policy);
  double consistency = he::pairwise_consistency(predictions, instances);

  he::ReportInputs row;
  row.method_label = he::to_string(method.kind);
  row.model_label = method.judge.model_name;
  row.accuracy = accuracy;
  row.consistency = consistency;
  row.seed = o.common.seed;
  row.threshold = threshold;
  row.predictions = predictions;
  for (const std::string& name : prompts.names()) row.prompt_digests[name] = prompts.digest(name);
  row.evaluated = static_cast<long long>(predictions.size());
  for (const auto& p : predictions) {
    if (!p.predicted) ++row.abstentions;
  }

  std::filesystem::path out(o.out_dir);
  std::vector<he::ReportInputs> rows{std::move(row)};
  he::emit_report(out, rows);

  // Accuracy as CSV for external plotting.
  std::string csv = "method,judge,accuracy,pairwise_consistency,evaluated,abstentions\n";
  csv += rows[0].method_label + "," + rows[0].model_label + "," + std::to_string(accuracy) + "," +
         std::to_string(consistency) + "," + std::to_string(rows[0].evaluated) + "," +
         std::to_string(rows[0].abstentions) + "\n";
  facver::write_text_file(out / "accuracy.csv", csv);

  json config = common_config_json(o.common);
  config["dataset"] = o.dataset_path;
  config["method"] = o.method;
  config["judge"] = o.judge_spec;
  config["decomposer"] = o.decomposer_spec;
  config["strict"] = o.strict;
  config["threshold_flag"] = o.threshold_given ? json(o.threshold) : json();
  facver::write_text_file(out / "manifest.json",
                          facver::dump_json_pretty(make_manifest("bench-halueval", config, prompts,
                                                                 o.common.seed, gateway)));

  std::cerr << "accuracy " << accuracy << " over " << predictions.size() << " test instances ("
            << rows[0].abstentions << " abstentions); report in " << out.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// eval-papers

struct EvalPapersOptions {
  CommonOptions common;
  std::string dataset_path;
  std::string out_dir;
  std::vector<std::string> roles;  // "<summarizer>,<critic|->,<judge>"
  std::string summarizer_spec;
  std::string critic_spec;
  std::string judge_spec;
  std::string summaries_path;
  int passes = 1;
};

facver::papers::RoleConfig parse_role(const std::string& text, const CommonOptions& common) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = text.find(',', start);
    if (comma == std::string::npos) {
      parts.push_back(text.substr(start));
      break;
    }
    parts.push_back(text.substr(start, comma - start));
    start = comma + 1;
  }
  if (parts.size() != 3) {
    throw ConfigError("--role expects \"<summarizer>,<critic|->,<judge>\", got \"" + text + "\"");
  }
  facver::papers::RoleConfig config;
  config.summary_model = parse_model_spec(parts[0], common);
  config.summary_label = config.summary_model.model_name;
  if (parts[1] == "-" || parts[1].empty()) {
    config.critique_label = "-";
  } else {
    config.critique_model = parse_model_spec(parts[1], common);
    config.critique_label = config.critique_model->model_name;
  }
  config.judge_model = parse_model_spec(parts[2], common);
  config.judge_label = config.judge_model.model_name;
  return config;
}

int run_eval_papers(const EvalPapersOptions& o) {
  namespace fp = facver::papers;
  PromptCatalog prompts = open_prompts(o.common);

  std::vector<fp::RoleConfig> configs;
  if (!o.roles.empty()) {
    for (const std::string& role : o.roles) configs.push_back(parse_role(role, o.common));
  } else {
    if (o.summarizer_spec.empty() || o.judge_spec.empty()) {
      throw ConfigError("eval-papers needs either --role entries or --summarizer and --judge");
    }
    std::string role = o.summarizer_spec + "," + (o.critic_spec.empty() ? "-" : o.critic_spec) +
                       "," + o.judge_spec;
    configs.push_back(parse_role(role, o.common));
  }

  std::vector<ModelSpec> used;
  for (const fp::RoleConfig& c : configs) {
    used.push_back(c.summary_model);
    if (c.critique_model) used.push_back(*c.critique_model);
    used.push_back(c.judge_model);
  }
  std::unique_ptr<Gateway> gateway_ptr = make_gateway(o.common, used);
  Gateway& gateway = *gateway_ptr;

  std::vector<fp::QueryItem> items = fp::load_query_dataset(o.dataset_path);

  fp::MatrixOptions options;
  options.passes = o.passes;
  options.max_in_flight = o.common.max_in_flight;
  if (!o.summaries_path.empty()) {
    std::string content = facver::read_text_file(o.summaries_path);
    for (const std::string& line : facver::split_lines(content)) {
      if (facver::trim(line).empty()) continue;
      json j = json::parse(line);
      options.preset_summaries[j.at("query_id").get<std::string>()] =
          j.at("summary").get<std::string>();
    }
  }

  std::vector<fp::MatrixRow> grid = fp::run_interaction_matrix(items, configs, gateway, prompts,
                                                               options);

  std::filesystem::path out(o.out_dir);

  json stats = json::array();
  for (const fp::MatrixRow& row : grid) {
    json entry;
    entry["config"] = row.config.key();
    entry["summary_model"] = row.config.summary_label;
    entry["critique_model"] = row.config.critique_label;
    entry["judge_model"] = row.config.judge_label;
    entry["stats"] = facver::to_json(row.stats);
    entry["items_failed"] = row.items_failed;
    if (!row.errors.empty()) entry["errors"] = row.errors;
    stats.push_back(std::move(entry));
  }
  facver::write_text_file(out / "stats.json", facver::dump_json_pretty(stats));

  std::string verdict_lines;
  for (const fp::MatrixRow& row : grid) {
    for (const facver::SummaryVerdict& v : row.verdicts) {
      json j = facver::to_json(v);
      j["config"] = row.config.key();
      verdict_lines += facver::dump_json_line(j) + "\n";
    }
  }
  facver::write_text_file(out / "verdicts.jsonl", verdict_lines);

  std::string csv =
      "summary_model,critique_model,judge_model,summaries,reported_per_summary,"
      "adjusted_per_summary,pct_with_reported,items_failed\n";
  for (const fp::MatrixRow& row : grid) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%s,%s,%s,%zu,%.6f,%.6f,%.2f,%d\n",
                  row.config.summary_label.c_str(), row.config.critique_label.c_str(),
                  row.config.judge_label.c_str(), row.stats.summaries_evaluated,
                  row.stats.reported_per_summary, row.stats.adjusted_per_summary,
                  row.stats.pct_with_reported, row.items_failed);
    csv += buf;
  }
  facver::write_text_file(out / "stats.csv", csv);

  for (const fp::MatrixRow& row : grid) {
    if (!row.config.critique_model) continue;
    std::filesystem::path diff_dir = out / "summary_diffs" / sanitize_label(row.config.key());
    for (const auto& [query_id, before, after] : row.revisions) {
      facver::write_text_file(diff_dir / (sanitize_label(query_id) + ".diff"),
                              fp::sentence_diff(before, after));
    }
  }

  json config = common_config_json(o.common);
  config["dataset"] = o.dataset_path;
  json role_list = json::array();
  for (const fp::RoleConfig& c : configs) role_list.push_back(c.key());
  config["roles"] = std::move(role_list);
  config["passes"] = o.passes;
  config["summaries"] = o.summaries_path;
  facver::write_text_file(out / "manifest.json",
                          facver::dump_json_pretty(make_manifest("eval-papers", config, prompts,
                                                                 o.common.seed, gateway)));

  std::cerr << "evaluated " << items.size() << " items under " << configs.size()
            << " role configs; reports in " << out.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Factored hallucination detection and revision for abstractive summaries"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Config file (INI; command-line flags win)");

  VerifyOptions verify_options;
  CLI::App* verify = app.add_subcommand(
      "verify", "Check one summary against one document; exit 0 faithful / 3 hallucinated");
  verify->add_option("document", verify_options.document_path, "Source document file")
      ->required()
      ->check(CLI::ExistingFile);
  verify->add_option("summary", verify_options.summary_path, "Summary file")
      ->required()
      ->check(CLI::ExistingFile);
  verify->add_option("--judge", verify_options.judge_spec, "Judge model, <provider>:<model>")
      ->required();
  verify->add_option("--decomposer", verify_options.decomposer_spec,
                     "Claim-extraction model (default: judge)");
  verify->add_option("--mode", verify_options.mode, "Verification strategy: auto|logprob|cot");
  verify->add_option("--judge-token-probs", verify_options.judge_token_probs,
                     "Override judge token-probability capability: auto|yes|no");
  verify->add_option("--yes-mode", verify_options.yes_mode,
                     "Yes-probability reading: raw|normalized");
  verify->add_option("--threshold", verify_options.threshold, "Decision threshold in [0,1]")
      ->check(CLI::Range(0.0, 1.0));
  verify->add_option("--calibrate", verify_options.calibrate_path,
                     "Calibrate the threshold on this benchmark dataset's train split")
      ->check(CLI::ExistingFile);
  add_common(verify, verify_options.common);

  ReviseOptions revise_options;
  CLI::App* revise = app.add_subcommand(
      "revise", "Critique a generated summary claim-by-claim and revise it");
  revise->add_option("item", revise_options.item_path, "Query item file (JSON object or 1-line JSONL)")
      ->required()
      ->check(CLI::ExistingFile);
  revise->add_option("--summary", revise_options.summary_path,
                     "Pre-written summary file (skips generation)")
      ->check(CLI::ExistingFile);
  revise->add_option("--summarizer", revise_options.summarizer_spec,
                     "Summary/revision model, <provider>:<model>")
      ->required();
  revise->add_option("--critic", revise_options.critic_spec, "Critique model (default: summarizer)");
  revise->add_option("--passes", revise_options.passes, "Maximum critique-revise rounds")
      ->check(CLI::PositiveNumber);
  revise->add_option("--out", revise_options.out_dir, "Output directory")->required();
  add_common(revise, revise_options.common);

  BenchOptions bench_options;
  CLI::App* bench = app.add_subcommand("bench-halueval",
                                       "Run a detection method over a benchmark dataset");
  bench->add_option("dataset", bench_options.dataset_path, "Benchmark JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  bench->add_option("--method", bench_options.method,
                    "Detection method: fewshot|cot|factored|single_prompt")
      ->required();
  bench->add_option("--judge", bench_options.judge_spec, "Judge model, <provider>:<model>")
      ->required();
  bench->add_option("--decomposer", bench_options.decomposer_spec,
                    "Claim-extraction model for the factored method (default: judge)");
  bench->add_option("--judge-token-probs", bench_options.judge_token_probs,
                    "Override judge token-probability capability: auto|yes|no");
  bench->add_option("--yes-mode", bench_options.yes_mode, "Yes-probability reading: raw|normalized");
  bench->add_option("--threshold", bench_options.threshold,
                    "Fixed decision threshold (skips train calibration)")
      ->check(CLI::Range(0.0, 1.0));
  bench->add_flag("--strict,!--no-strict", bench_options.strict,
                  "Count abstentions as incorrect (default) instead of excluding them");
  bench->add_option("--out", bench_options.out_dir, "Report directory")->required();
  add_common(bench, bench_options.common);

  EvalPapersOptions eval_options;
  CLI::App* eval = app.add_subcommand(
      "eval-papers", "Generate, optionally revise, and judge cited paper summaries");
  eval->add_option("dataset", eval_options.dataset_path, "Query dataset JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--role", eval_options.roles,
                   "Role config \"<summarizer>,<critic|->,<judge>\" (repeatable)");
  eval->add_option("--summarizer", eval_options.summarizer_spec, "Summary model (single config)");
  eval->add_option("--critic", eval_options.critic_spec, "Critique model (single config)");
  eval->add_option("--judge", eval_options.judge_spec, "Judge model (single config)");
  eval->add_option("--summaries", eval_options.summaries_path,
                   "Reuse pre-generated summaries (JSONL {query_id, summary})")
      ->check(CLI::ExistingFile);
  eval->add_option("--passes", eval_options.passes, "Critique-revise rounds per summary")
      ->check(CLI::PositiveNumber);
  eval->add_option("--out", eval_options.out_dir, "Report directory")->required();
  add_common(eval, eval_options.common);

  std::string import_source, import_out;
  CLI::App* import_cmd = app.add_subcommand(
      "import-papers", "Convert a published dataset layout into the canonical query JSONL");
  import_cmd->add_option("source", import_source, "Source file (JSON array) or directory")
      ->required();
  import_cmd->add_option("out", import_out, "Output JSONL path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*verify) {
      verify_options.threshold_given = verify->count("--threshold") > 0;
      return run_verify(verify_options);
    }
    if (*revise) return run_revise(revise_options);
    if (*bench) {
      bench_options.threshold_given = bench->count("--threshold") > 0;
      return run_bench(bench_options);
    }
    if (*eval) return run_eval_papers(eval_options);
    if (*import_cmd) {
      facver::papers::import_dataset(import_source, import_out);
      std::cerr << "wrote " << import_out << "\n";
      return 0;
    }
  } catch (const facver::Error& e) {
    std::cerr << "error [" << e.category() << "]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
