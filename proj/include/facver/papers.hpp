#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "facver/critique.hpp"
#include "facver/gateway.hpp"
#include "facver/prompts.hpp"
#include "facver/types.hpp"

namespace facver::papers {

struct PaperAbstract {
  int paper_index = 0;  // 1-based position in the item
  std::string reference;  // "Author (year)"
  std::string title;
  std::string abstract;

  SourceDocument to_source() const { return SourceDocument{reference, title, abstract}; }
};

struct QueryItem {
  std::string query_id;
  std::string question;
  std::vector<PaperAbstract> abstracts;
};

// Which models play which role. An absent critique model means the summary is
// evaluated as generated, with no revision pass.
struct RoleConfig {
  ModelSpec summary_model;
  std::optional<ModelSpec> critique_model;
  ModelSpec judge_model;
  std::string summary_label;
  std::string critique_label;  // "-" when critique_model is absent
  std::string judge_label;

  std::string key() const { return summary_label + "/" + critique_label + "/" + judge_label; }
};

// JSONL ingestion: one item per line,
// {"query_id": ..., "question": ..., "papers": [{"reference","title","abstract"}, ...]}.
// Items are returned sorted by query_id; invariant violations (no papers,
// duplicate references) raise IngestionError naming the record.
std::vector<QueryItem> load_query_dataset(const std::filesystem::path& path);
QueryItem query_item_from_json_line(const std::string& line, std::size_t line_number);

// Finds every "Author (year)" style citation in a sentence: Name (YYYY),
// Name et al. (YYYY), Name and Name (YYYY), Name & Name (YYYY). Returned in
// textual order, deduplicated by (lowercased author token, year). A bare
// parenthesized year with no preceding name never matches.
std::vector<CitationRef> parse_citations(const std::string& sentence);

// Sentence-level claims with citations attached.
std::vector<Claim> split_cited_claims(const std::string& summary);

// Claims with at least one citation, order preserved.
std::vector<Claim> select_checkable(const std::vector<Claim>& claims);

// Resolves each of the claim's citations against the item's papers:
// case-insensitive prefix match of the author token on the reference plus an
// exact year match. Citations are parsed from the claim text when the
// citations field is unpopulated; an uncited claim resolves to no sources.
// A citation with no matching paper raises DanglingCitationError.
std::vector<SourceDocument> gather_sources(const Claim& claim, const QueryItem& item);

// Numbered "Paper N:" blocks used by the generation prompt and the
// self-correction baseline.
std::string papers_block(const std::vector<PaperAbstract>& abstracts);

std::string build_generation_prompt(const QueryItem& item, const PromptCatalog& prompts);

struct GeneratedSummary {
  std::string text;
  ConversationContext context;  // generation exchange, replayed by revision turns
  std::vector<std::string> warnings;
};

GeneratedSummary generate_summary(const QueryItem& item, Gateway& gateway,
                                  const ModelSpec& summarizer, const PromptCatalog& prompts);

// Full per-summary citation check: sentence claims -> checkable subset ->
// per-claim critique against exactly the cited abstracts -> unsupported
// count. Dangling citations are recorded as unsupported with error_tag
// "dangling_citation" (a claim citing a nonexistent source cannot be
// supported by the provided context).
SummaryVerdict evaluate_summary(const std::string& summary_id, const std::string& summary,
                                const QueryItem& item, Gateway& gateway, const ModelSpec& judge,
                                const PromptCatalog& prompts, int max_in_flight = 1);

// Population-level roll-up; order-invariant. Empty input is a DomainError.
HallucinationStats aggregate_stats(std::span<const SummaryVerdict> verdicts,
                                   const std::string& model_label);

struct MatrixOptions {
  int passes = 1;
  int max_in_flight = 1;
  // query_id -> summary text. Items present here skip generation entirely
  // (zero summarizer calls); the revision conversation is reconstructed from
  // the generation prompt plus the given text.
  std::map<std::string, std::string> preset_summaries;
};

struct MatrixRow {
  RoleConfig config;
  HallucinationStats stats;
  std::vector<SummaryVerdict> verdicts;
  // (item id, original, revised) for configs with a critique model.
  std::vector<std::tuple<std::string, std::string, std::string>> revisions;
  int items_failed = 0;
  std::vector<std::string> errors;
};

// Runs every config over every item. Summaries for a given summary model are
// generated once and reused across configs; a failure under one config is
// recorded on that row and does not disturb the others.
std::vector<MatrixRow> run_interaction_matrix(const std::vector<QueryItem>& items,
                                              const std::vector<RoleConfig>& configs,
                                              Gateway& gateway, const PromptCatalog& prompts,
                                              const MatrixOptions& options = {});

// Sentence-level diff (longest-common-subsequence) rendered like a unified
// diff: "  " kept, "- " removed, "+ " added, one sentence per line.
std::string sentence_diff(const std::string& original, const std::string& revised);

// Converts the published dataset layout (a directory of per-query JSON files
// or a single JSON array) into the canonical JSONL ingestion format.
void import_dataset(const std::filesystem::path& source, const std::filesystem::path& out_jsonl);

}  // namespace facver::papers
