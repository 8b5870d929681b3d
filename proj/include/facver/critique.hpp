#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "facver/gateway.hpp"
#include "facver/prompts.hpp"
#include "facver/types.hpp"

namespace facver {

// Prior generation exchange, replayed so the "correct your summary" turn
// lands in the same conversation that produced the summary.
struct ConversationContext {
  std::vector<Message> messages;
};

// Critiques one claim against its cited sources (non-empty). Parses the
// Critique/Supported/Revised Claim block, with pluralized wording when
// several sources are cited. Field rules: an unsupported claim must carry a
// concrete revised claim ("N/A" is only valid for supported ones — a
// violation is re-asked once, then ParseError); a supported claim with a
// concrete revision has the revision dropped and a warning recorded.
Critique critique_claim(const Claim& claim, const std::vector<SourceDocument>& sources,
                        Gateway& gateway, const ModelSpec& critic, const PromptCatalog& prompts);

// Collects the critiques of unsupported claims into per-sentence feedback
// entries, in original summary order.
FactoredCritique assemble_factored_critique(const std::vector<Claim>& claims,
                                            const std::vector<Critique>& critiques);

// One revision turn: replays `context`, sends the factored feedback, returns
// the text after "Corrected summary:". Callers never invoke this with an
// empty critique (revise_pipeline short-circuits first).
std::string revise_summary(const std::string& original_summary, const FactoredCritique& critique,
                           const ModelSpec& reviser, Gateway& gateway,
                           const PromptCatalog& prompts, const ConversationContext& context);

// Maps a sentence-claim to the sources it should be checked against. An
// empty result marks the claim uncheckable (no citations) and it is skipped;
// DanglingCitationError marks it unsupported with a synthetic critique.
using SourceResolver = std::function<std::vector<SourceDocument>(const Claim&)>;

struct RevisionOutcome {
  std::string revised_summary;
  // Critique from the last pass that found problems; empty when the summary
  // came back clean on the first pass.
  FactoredCritique critique;
  std::vector<FactoredCritique> pass_critiques;  // one per executed pass
  int revision_calls = 0;                        // reviser invocations actually made
  std::vector<Critique> claim_critiques;         // per-claim critic outputs, final pass
  std::vector<std::string> warnings;
};

// The critique-and-revise loop: sentence claims -> per-claim critiques ->
// if any unsupported, one revision turn; up to `passes` rounds. A pass with
// an all-clean critique short-circuits: the summary is returned byte-for-byte
// and no reviser call is made.
RevisionOutcome revise_pipeline(const std::string& summary, const SourceResolver& resolve,
                                Gateway& gateway, const ModelSpec& critic,
                                const ModelSpec& reviser, const PromptCatalog& prompts,
                                const ConversationContext& context, int passes = 1);

struct SelfCorrectOutcome {
  std::string corrected_summary;
  std::string feedback;
  std::vector<std::string> warnings;
};

// Baseline self-correction: one holistic harsh-feedback call over the whole
// summary, then one revision turn feeding that feedback back verbatim.
SelfCorrectOutcome self_correct_baseline(const std::string& summary,
                                         const std::string& papers_block, Gateway& gateway,
                                         const ModelSpec& model, const PromptCatalog& prompts,
                                         const ConversationContext& context);

}  // namespace facver
