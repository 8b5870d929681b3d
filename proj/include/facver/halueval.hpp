#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "facver/gateway.hpp"
#include "facver/probability.hpp"
#include "facver/prompts.hpp"
#include "facver/types.hpp"
#include "facver/verify.hpp"

namespace facver::halueval {

struct Item {
  std::string item_id;
  std::string document;
  std::string right_summary;
  std::string hallucinated_summary;
};

struct Instance {
  std::string instance_id;  // "<item_id>/faithful" or "<item_id>/hallucinated"
  std::string document;
  std::string summary;
  Label gold = Label::faithful;
};

// JSONL: {"item_id"?, "document", "right_summary", "hallucinated_summary"}.
// item_id defaults to the 0-based line index. Malformed or incomplete lines
// raise IngestionError with the line number.
std::vector<Item> load_halueval(const std::filesystem::path& path);

// Two labeled instances per item: the right summary as faithful, the
// hallucinated one as hallucinated.
std::vector<Instance> make_instances(std::span<const Item> items);

struct Splits {
  std::vector<std::size_t> train;  // indices into the instance list
  std::vector<std::size_t> test;
};

// Draws disjoint train (5%) and test (20%) index sets, sizes rounded to
// nearest. Sampling is a hand-rolled Fisher–Yates prefix on mt19937_64 so the
// result is identical across platforms for a given seed.
Splits sample_splits(std::size_t instance_count, std::uint64_t seed);

enum class MethodKind { fewshot, cot, factored, single_prompt };

MethodKind method_from_string(const std::string& name);
std::string to_string(MethodKind m);

struct Method {
  MethodKind kind = MethodKind::factored;
  ModelSpec judge;
  // Claim-extraction model for the factored method; judge when absent (a
  // base-model judge still needs a chat model to enumerate claims).
  std::optional<ModelSpec> decomposer;
  YesProbMode yes_mode = YesProbMode::raw;
};

struct Prediction {
  std::string instance_id;
  std::optional<Label> predicted;  // absent = abstention (per-instance failure)
  double p_summary = 1.0;          // factored/single_prompt only; 1.0 otherwise
  std::optional<std::string> error_tag;
};

struct RunOptions {
  int max_in_flight = 1;
};

// Evaluates the given instances. fewshot/cot judge the whole summary with the
// vendored benchmark prompts; factored decomposes and runs the per-claim
// pipeline against `threshold` (required); single_prompt asks one direct
// question about the whole summary. Failures on individual instances become
// abstentions tagged with the error category. Output is sorted by
// instance_id.
std::vector<Prediction> run_method(std::span<const Instance> instances,
                                   std::span<const std::size_t> indices, const Method& method,
                                   Gateway& gateway, const PromptCatalog& prompts,
                                   const std::optional<Threshold>& threshold,
                                   const RunOptions& options = {});

enum class AbstainPolicy { count_as_incorrect, exclude };

// 100 × matches / total.
double compute_accuracy(long long matches, long long total);
double compute_accuracy(std::span<const Prediction> predictions,
                        std::span<const Instance> instances,
                        AbstainPolicy policy = AbstainPolicy::count_as_incorrect);

// Fraction of items (pairs sharing an item_id) where the faithful instance
// scored a strictly higher p_summary than its hallucinated sibling. Pairs
// with a missing side are skipped; no complete pairs -> 0.
double pairwise_consistency(std::span<const Prediction> predictions,
                            std::span<const Instance> instances);

struct ReportInputs {
  std::string method_label;
  std::string model_label;
  double accuracy = 0.0;
  double consistency = 0.0;
  std::uint64_t seed = 0;
  std::optional<Threshold> threshold;
  std::vector<Prediction> predictions;
  std::map<std::string, std::string> prompt_digests;
  long long abstentions = 0;
  long long evaluated = 0;
};

// Writes accuracy.json (one entry per row), predictions.jsonl, and a
// human-readable report.txt into `dir`. Deterministic: sorted keys,
// predictions sorted by instance_id within each row, no timestamps — a rerun
// over the same inputs is byte-identical.
void emit_report(const std::filesystem::path& dir, std::span<const ReportInputs> rows);

}  // namespace facver::halueval
