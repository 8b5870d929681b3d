#include "facver/halueval.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <random>
#include <set>

#include "facver/errors.hpp"
#include "facver/serialize.hpp"
#include "facver/util.hpp"

namespace facver::halueval {

namespace {

using nlohmann::json;

// Uniform draw in [0, n) by rejection sampling — identical on every platform,
// unlike std::uniform_int_distribution whose algorithm is
// implementation-defined.
std::uint64_t bounded_draw(std::mt19937_64& rng, std::uint64_t n) {
  std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                        std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

}  // namespace

std::vector<Item> load_halueval(const std::filesystem::path& path) {
  std::string content = read_text_file(path);
  std::vector<Item> items;
  std::size_t line_number = 0;
  for (const std::string& line : split_lines(content)) {
    ++line_number;
    if (trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw IngestionError("line " + std::to_string(line_number) + ": invalid JSON: " + e.what());
    }
    Item item;
    item.item_id = j.contains("item_id") ? j["item_id"].get<std::string>()
                                         : std::to_string(items.size());
    item.document = j.value("document", "");
    item.right_summary = j.value("right_summary", "");
    item.hallucinated_summary = j.value("hallucinated_summary", "");
    if (item.document.empty() || item.right_summary.empty() ||
        item.hallucinated_summary.empty()) {
      throw IngestionError("line " + std::to_string(line_number) +
                           ": document, right_summary and hallucinated_summary are all required");
    }
    items.push_back(std::move(item));
  }
  return items;
}

std::vector<Instance> make_instances(std::span<const Item> items) {
  std::vector<Instance> instances;
  instances.reserve(items.size() * 2);
  for (const Item& item : items) {
    instances.push_back(
        Instance{item.item_id + "/faithful", item.document, item.right_summary, Label::faithful});
    instances.push_back(Instance{item.item_id + "/hallucinated", item.document,
                                 item.hallucinated_summary, Label::hallucinated});
  }
  return instances;
}

Splits sample_splits(std::size_t instance_count, std::uint64_t seed) {
  if (instance_count < 25) {
    throw DomainError("need at least 25 instances to draw 5%/20% splits (got " +
                      std::to_string(instance_count) + ")");
  }
  auto train_n = static_cast<std::size_t>(std::llround(0.05 * static_cast<double>(instance_count)));
  auto test_n = static_cast<std::size_t>(std::llround(0.20 * static_cast<double>(instance_count)));

  std::vector<std::size_t> indices(instance_count);
  for (std::size_t i = 0; i < instance_count; ++i) indices[i] = i;

  // Partial Fisher–Yates: the first train_n + test_n slots become a uniform
  // sample without replacement.
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < train_n + test_n; ++i) {
    std::size_t j = i + static_cast<std::size_t>(bounded_draw(rng, instance_count - i));
    std::swap(indices[i], indices[j]);
  }

  Splits splits;
  splits.train.assign(indices.begin(), indices.begin() + static_cast<std::ptrdiff_t>(train_n));
  splits.test.assign(indices.begin() + static_cast<std::ptrdiff_t>(train_n),
                     indices.begin() + static_cast<std::ptrdiff_t>(train_n + test_n));
  std::sort(splits.train.begin(), splits.train.end());
  std::sort(splits.test.begin(), splits.test.end());
  return splits;
}

MethodKind method_from_string(const std::string& name) {
  if (name == "fewshot") return MethodKind::fewshot;
  if (name == "cot") return MethodKind::cot;
  if (name == "factored") return MethodKind::factored;
  if (name == "single_prompt" || name == "single-prompt") return MethodKind::single_prompt;
  throw ConfigError("unknown method: " + name + " (expected fewshot|cot|factored|single_prompt)");
}

std::string to_string(MethodKind m) {
  switch (m) {
    case MethodKind::fewshot: return "fewshot";
    case MethodKind::cot: return "cot";
    case MethodKind::factored: return "factored";
    case MethodKind::single_prompt: return "single_prompt";
  }
  throw DomainError("unknown method enum value");
}

namespace {

// Parses the benchmark judgment: text after the last "Judgement:" marker, or
// the bare response, normalized to Yes/No. Yes means the judge saw
// hallucinated content.
bool parse_hallucination_judgement(const std::string& response) {
  static const std::string marker = "Judgement:";
  std::string value;
  std::string lowered = to_lower(response);
  std::size_t at = lowered.rfind(to_lower(marker));
  if (at != std::string::npos) {
    value = response.substr(at + marker.size());
  } else {
    value = response;
  }
  return parse_supported_field(value, "judgment", response);
}

Label whole_summary_judgement(const Instance& instance, const Method& method, Gateway& gateway,
                              const PromptCatalog& prompts) {
  const std::string templ = method.kind == MethodKind::fewshot ? "halueval_fewshot" : "halueval_cot";
  std::string prompt = render_template(
      prompts.text(templ), {{"document", instance.document}, {"summary", instance.summary}});

  bool hallucinated;
  try {
    hallucinated = parse_hallucination_judgement(gateway.complete(make_request(method.judge, prompt)).text);
  } catch (const ParseError&) {
    std::string retry = prompt + "\n\nAnswer with exactly the requested format.";
    hallucinated = parse_hallucination_judgement(gateway.complete(make_request(method.judge, retry)).text);
  }
  return hallucinated ? Label::hallucinated : Label::faithful;
}

}  // namespace

std::vector<Prediction> run_method(std::span<const Instance> instances,
                                   std::span<const std::size_t> indices, const Method& method,
                                   Gateway& gateway, const PromptCatalog& prompts,
                                   const std::optional<Threshold>& threshold,
                                   const RunOptions& options) {
  if (method.kind == MethodKind::factored && !threshold) {
    throw ConfigError("the factored method requires a threshold calibrated on the train split");
  }
  // Touch the templates up front so a missing prompt file is a configuration
  // error for the whole run, not 4000 abstentions.
  if (method.kind == MethodKind::fewshot) prompts.text("halueval_fewshot");
  if (method.kind == MethodKind::cot) prompts.text("halueval_cot");
  if (method.kind == MethodKind::factored) {
    prompts.text("decompose");
    if (method.judge.token_distribution_available()) {
      prompts.text("verify_fewshot");
      prompts.text("verify_fewshot_examples");
    } else {
      prompts.text("verify_cot");
    }
  }
  if (method.kind == MethodKind::single_prompt) prompts.text("verify_single");

  Threshold effective = threshold.value_or(Threshold::fixed(0.5));

  std::vector<Prediction> predictions(indices.size());
  parallel_for(indices.size(), options.max_in_flight, [&](std::size_t k) {
    const Instance& instance = instances[indices[k]];
    Prediction& prediction = predictions[k];
    prediction.instance_id = instance.instance_id;
    try {
      switch (method.kind) {
        case MethodKind::fewshot:
        case MethodKind::cot: {
          Label label = whole_summary_judgement(instance, method, gateway, prompts);
          prediction.predicted = label;
          prediction.p_summary = label == Label::faithful ? 1.0 : 0.0;
          break;
        }
        case MethodKind::factored: {
          VerificationMode mode;
          mode.strategy = method.judge.token_distribution_available() ? VerifyStrategy::logprob
                                                                      : VerifyStrategy::cot;
          mode.judge = method.judge;
          mode.decomposer = method.decomposer;
          mode.yes_mode = method.yes_mode;
          SummaryVerdict verdict =
              verify_summary(instance.instance_id, instance.summary,
                             {SourceDocument{"", "", instance.document}}, gateway, mode, prompts,
                             effective, /*max_in_flight=*/1);
          prediction.predicted = verdict.label;
          prediction.p_summary = verdict.p_summary;
          break;
        }
        case MethodKind::single_prompt: {
          SummaryVerdict verdict = verify_single_prompt(
              instance.instance_id, instance.summary,
              {SourceDocument{"", "", instance.document}}, gateway, method.judge, prompts,
              effective);
          prediction.predicted = verdict.label;
          prediction.p_summary = verdict.p_summary;
          break;
        }
      }
    } catch (const Error& e) {
      prediction.predicted = std::nullopt;
      prediction.error_tag = e.category();
    } catch (const std::exception&) {
      prediction.predicted = std::nullopt;
      prediction.error_tag = "internal";
    }
  });

  std::sort(predictions.begin(), predictions.end(),
            [](const Prediction& a, const Prediction& b) { return a.instance_id < b.instance_id; });
  return predictions;
}

double compute_accuracy(long long matches, long long total) {
  if (total <= 0) throw DomainError("accuracy needs a positive instance count");
  if (matches < 0 || matches > total) {
    throw DomainError("match count " + std::to_string(matches) + " outside [0, " +
                      std::to_string(total) + "]");
  }
  return (100.0 * static_cast<double>(matches)) / static_cast<double>(total);
}

double compute_accuracy(std::span<const Prediction> predictions,
                        std::span<const Instance> instances, AbstainPolicy policy) {
  std::map<std::string, Label> golds;
  for (const Instance& instance : instances) golds[instance.instance_id] = instance.gold;

  long long matches = 0;
  long long total = 0;
  for (const Prediction& p : predictions) {
    auto gold = golds.find(p.instance_id);
    if (gold == golds.end()) {
      throw DomainError("prediction for unknown instance " + p.instance_id);
    }
    if (!p.predicted && policy == AbstainPolicy::exclude) continue;
    ++total;
    if (p.predicted && *p.predicted == gold->second) ++matches;
  }
  return compute_accuracy(matches, total);
}

double pairwise_consistency(std::span<const Prediction> predictions,
                            std::span<const Instance> instances) {
  std::map<std::string, const Prediction*> by_id;
  for (const Prediction& p : predictions) by_id[p.instance_id] = &p;

  std::set<std::string> item_ids;
  for (const Instance& instance : instances) {
    std::string id = instance.instance_id;
    if (std::size_t slash = id.rfind('/'); slash != std::string::npos) id.resize(slash);
    item_ids.insert(std::move(id));
  }

  std::size_t pairs = 0, consistent = 0;
  for (const std::string& item : item_ids) {
    auto faithful = by_id.find(item + "/faithful");
    auto hallucinated = by_id.find(item + "/hallucinated");
    if (faithful == by_id.end() || hallucinated == by_id.end()) continue;
    if (!faithful->second->predicted || !hallucinated->second->predicted) continue;
    ++pairs;
    if (faithful->second->p_summary > hallucinated->second->p_summary) ++consistent;
  }
  if (pairs == 0) return 0.0;
  return static_cast<double>(consistent) / static_cast<double>(pairs);
}

void emit_report(const std::filesystem::path& dir, std::span<const ReportInputs> rows) {
  std::filesystem::create_directories(dir);

  json accuracy = json::array();
  for (const ReportInputs& row : rows) {
    json entry;
    entry["method"] = row.method_label;
    entry["model"] = row.model_label;
    entry["accuracy"] = row.accuracy;
    entry["pairwise_consistency"] = row.consistency;
    entry["seed"] = row.seed;
    entry["evaluated"] = row.evaluated;
    entry["abstentions"] = row.abstentions;
    if (row.threshold) entry["threshold"] = to_json(*row.threshold);
    json digests = json::object();
    for (const auto& [name, digest] : row.prompt_digests) digests[name] = digest;
    entry["prompt_digests"] = std::move(digests);
    accuracy.push_back(std::move(entry));
  }
  write_text_file(dir / "accuracy.json", dump_json_pretty(accuracy));

  std::string lines;
  for (const ReportInputs& row : rows) {
    for (const Prediction& p : row.predictions) {
      json j = to_json(p);
      j["method"] = row.method_label;
      lines += dump_json_line(j) + "\n";
    }
  }
  write_text_file(dir / "predictions.jsonl", lines);

  std::string table;
  table += "Hallucination detection benchmark\n";
  table += "=================================\n\n";
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-16s %-24s %9s %12s %6s\n", "Method", "Judge", "Accuracy",
                "Consistency", "n");
  table += buf;
  for (const ReportInputs& row : rows) {
    std::snprintf(buf, sizeof(buf), "%-16s %-24s %9.1f %12.3f %6lld\n", row.method_label.c_str(),
                  row.model_label.c_str(), row.accuracy, row.consistency, row.evaluated);
    table += buf;
  }
  table += "\n";
  for (const ReportInputs& row : rows) {
    table += "seed " + std::to_string(row.seed);
    if (row.threshold) {
      snprintf(buf, sizeof(buf), ", threshold %.6f", row.threshold->value);
      table += buf;
      if (!row.threshold->split_tag.empty()) table += " [" + row.threshold->split_tag + "]";
    }
    table += ", abstentions " + std::to_string(row.abstentions) + " (" + row.method_label + ")\n";
  }
  write_text_file(dir / "report.txt", table);
}

}  // namespace facver::halueval
