#pragma once

#include <optional>
#include <string>
#include <vector>

#include "facver/gateway.hpp"
#include "facver/probability.hpp"
#include "facver/prompts.hpp"
#include "facver/types.hpp"

namespace facver {

enum class VerifyStrategy {
  logprob,  // few-shot prompt, read P(Yes) from the token distribution
  cot,      // reasoning-then-verdict prompt, Yes -> 1.0 / No -> 0.0
};

VerifyStrategy verify_strategy_from_string(const std::string& name);
std::string to_string(VerifyStrategy s);

struct VerificationMode {
  VerifyStrategy strategy = VerifyStrategy::logprob;
  ModelSpec judge;
  // Model used for prompted claim extraction; the judge doubles as the
  // decomposer when absent (base-model judges need a chat decomposer).
  std::optional<ModelSpec> decomposer;
  YesProbMode yes_mode = YesProbMode::raw;
};

// Renders the shared document block: one source verbatim, several sources as
// "Document 1:\n...\n\nDocument 2:\n..." in order.
std::string render_document_block(const std::vector<SourceDocument>& documents);

// Few-shot token-probability scoring. Renders the few-shot template, cuts the
// prompt right after the final "Supported:", and reads P(Yes) at the answer
// position. CapabilityError if the judge lacks token distributions.
ClaimVerdict verify_logprob(const Claim& claim, const std::vector<SourceDocument>& documents,
                            Gateway& gateway, const ModelSpec& judge, const PromptCatalog& prompts,
                            YesProbMode yes_mode = YesProbMode::raw);

// Reasoning-based scoring: parses "Reasoning:"/"Supported:" fields, mapping
// Yes -> 1.0 and No -> 0.0. Accepts case/trailing-period variants of Yes/No;
// anything else is re-asked once and then raises ParseError — an unparseable
// verdict is never silently treated as No.
ClaimVerdict verify_cot(const Claim& claim, const std::vector<SourceDocument>& documents,
                        Gateway& gateway, const ModelSpec& judge, const PromptCatalog& prompts);

// Dispatch on mode.strategy.
ClaimVerdict verify_claim(const Claim& claim, const std::vector<SourceDocument>& documents,
                          Gateway& gateway, const VerificationMode& mode,
                          const PromptCatalog& prompts);

// The full per-summary method: prompted decomposition, per-claim verification
// (concurrent up to max_in_flight), product combination, thresholding.
SummaryVerdict verify_summary(const std::string& summary_id, const std::string& summary,
                              const std::vector<SourceDocument>& documents, Gateway& gateway,
                              const VerificationMode& mode, const PromptCatalog& prompts,
                              const Threshold& threshold, int max_in_flight = 1);

// Single-prompt ablation: one prompt asks the judge to write out each claim
// and verify it inline; each "Supported:" verdict becomes a 0/1 probability,
// combined and classified as usual. No enumeration found -> ParseError.
SummaryVerdict verify_single_prompt(const std::string& summary_id, const std::string& summary,
                                    const std::vector<SourceDocument>& documents, Gateway& gateway,
                                    const ModelSpec& judge, const PromptCatalog& prompts,
                                    const Threshold& threshold);

// Shared "Supported: Yes|No" field parser (exposed for the critique module).
// Returns true for Yes. Tolerates case and a trailing period; anything else
// raises ParseError tagged with `stage`.
bool parse_supported_field(const std::string& value, const std::string& stage,
                           const std::string& raw_response);

}  // namespace facver
