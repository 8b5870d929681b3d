#pragma once

#include <string>
#include <vector>

#include "facver/gateway.hpp"
#include "facver/prompts.hpp"
#include "facver/types.hpp"

namespace facver {

struct SentenceSplitOptions {
  // Suffixes that look like sentence ends but are not ("et al.", "e.g.", ...).
  // Compared case-sensitively against the text ending at a candidate period.
  std::vector<std::string> abbreviations = default_abbreviations();

  static std::vector<std::string> default_abbreviations();
};

// Rule-based sentence segmentation. A '.', '!' or '?' (plus any closing
// quotes/brackets) ends a sentence iff followed by whitespace and an
// uppercase letter, or by end of text. Periods ending a protected
// abbreviation or a single-letter initial never split. Guarantees:
// concatenating the results with single spaces preserves the input's
// non-whitespace character sequence, and splitting is idempotent.
std::vector<std::string> split_sentences(const std::string& text,
                                         const SentenceSplitOptions& options = {});

// Parses a model-produced claim list: drops everything through the first
// "The claims are:" marker (case-insensitive), then takes "-" bullets, one
// claim per bullet (continuation lines are folded into the open bullet).
// Zero extracted claims is a ParseError, not an empty result.
std::vector<std::string> parse_claim_list(const std::string& response);

// Asks `model` to enumerate the summary's claims and parses the reply. On a
// malformed reply, retries once with an appended format reminder before
// giving up (ParseError).
std::vector<Claim> decompose_prompted(const std::string& summary, Gateway& gateway,
                                      const ModelSpec& model, const PromptCatalog& prompts);

// Decomposition by sentence segmentation (used by the citation-checking
// pipeline, where each sentence is treated as one claim).
std::vector<Claim> decompose_sentences(const std::string& summary,
                                       const SentenceSplitOptions& options = {});

}  // namespace facver
