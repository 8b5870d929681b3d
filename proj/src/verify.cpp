#include "facver/verify.hpp"

#include <functional>

#include "facver/decompose.hpp"
#include "facver/errors.hpp"
#include "facver/util.hpp"

namespace facver {

VerifyStrategy verify_strategy_from_string(const std::string& name) {
  if (name == "logprob" || name == "fewshot" || name == "token-prob") return VerifyStrategy::logprob;
  if (name == "cot") return VerifyStrategy::cot;
  throw ConfigError("unknown verification strategy: " + name + " (expected logprob|cot)");
}

std::string to_string(VerifyStrategy s) {
  return s == VerifyStrategy::logprob ? "logprob" : "cot";
}

std::string render_document_block(const std::vector<SourceDocument>& documents) {
  if (documents.empty()) return "";
  if (documents.size() == 1) return documents[0].text;
  std::string block;
  for (std::size_t i = 0; i < documents.size(); ++i) {
    if (i) block += "\n\n";
    block += "Document " + std::to_string(i + 1) + ":\n" + documents[i].text;
  }
  return block;
}

bool parse_supported_field(const std::string& value, const std::string& stage,
                           const std::string& raw_response) {
  std::string v = trim(value);
  while (!v.empty() && (v.back() == '.' || v.back() == '"')) v.pop_back();
  if (!v.empty() && v.front() == '"') v.erase(v.begin());
  v = trim(v);
  if (iequals(v, "Yes")) return true;
  if (iequals(v, "No")) return false;
  throw ParseError(stage, "Supported field is neither Yes nor No: \"" + value + "\"", raw_response);
}

namespace {

struct SupportedVerdict {
  bool yes = false;
  std::string reasoning;
};

// Parses a response carrying one "Reasoning:" (optional) and one final
// "Supported:" field.
SupportedVerdict parse_verdict_response(const std::string& response, const std::string& stage) {
  std::vector<std::string> lines = split_lines(response);
  std::ptrdiff_t supported_at = -1;
  for (std::ptrdiff_t i = static_cast<std::ptrdiff_t>(lines.size()) - 1; i >= 0; --i) {
    if (istarts_with(trim(lines[i]), "Supported:")) {
      supported_at = i;
      break;
    }
  }
  if (supported_at < 0) {
    throw ParseError(stage, "response has no \"Supported:\" field", response);
  }

  SupportedVerdict out;
  std::string supported_line = trim(lines[supported_at]);
  out.yes = parse_supported_field(supported_line.substr(std::string("Supported:").size()), stage,
                                  response);

  // Reasoning: everything between the "Reasoning:" label and the verdict.
  std::ptrdiff_t reasoning_at = -1;
  for (std::ptrdiff_t i = 0; i < supported_at; ++i) {
    if (istarts_with(trim(lines[i]), "Reasoning:")) {
      reasoning_at = i;
      break;
    }
  }
  if (reasoning_at >= 0) {
    std::string reasoning = trim(lines[reasoning_at]).substr(std::string("Reasoning:").size());
    for (std::ptrdiff_t i = reasoning_at + 1; i < supported_at; ++i) {
      reasoning += "\n" + lines[i];
    }
    out.reasoning = trim(reasoning);
  }
  return out;
}

// Issues the prompt, parses with `parse`; on ParseError, re-asks once with an
// explicit format reminder (a new prompt, hence a fresh cache entry).
template <typename T>
T ask_with_reask(Gateway& gateway, const ModelSpec& model, const std::string& prompt,
                 const std::function<T(const std::string&)>& parse) {
  try {
    return parse(gateway.complete(make_request(model, prompt)).text);
  } catch (const ParseError&) {
    std::string retry = prompt + "\n\nAnswer with exactly the requested format.";
    return parse(gateway.complete(make_request(model, retry)).text);
  }
}

}  // namespace

ClaimVerdict verify_logprob(const Claim& claim, const std::vector<SourceDocument>& documents,
                            Gateway& gateway, const ModelSpec& judge, const PromptCatalog& prompts,
                            YesProbMode yes_mode) {
  std::string rendered = render_template(
      prompts.text("verify_fewshot"),
      {{"Few-shot examples", prompts.text("verify_fewshot_examples")},
       {"Document", render_document_block(documents)},
       {"Claim", claim.text}});

  // The template's last line is the answer slot "Supported: Yes"; the prompt
  // sent ends right after "Supported:" so the next token is the verdict.
  static const std::string marker = "Supported:";
  std::size_t at = rendered.rfind(marker);
  if (at == std::string::npos) {
    throw ConfigError("verify_fewshot template lacks the final \"Supported:\" answer slot");
  }
  std::string prompt = rendered.substr(0, at + marker.size());

  double p = gateway.yes_probability(prompt, judge, yes_mode);
  return make_claim_verdict(claim.id, p);
}

ClaimVerdict verify_cot(const Claim& claim, const std::vector<SourceDocument>& documents,
                        Gateway& gateway, const ModelSpec& judge, const PromptCatalog& prompts) {
  std::string prompt = render_template(prompts.text("verify_cot"),
                                       {{"document", render_document_block(documents)},
                                        {"claim", claim.text}});
  auto verdict = ask_with_reask<SupportedVerdict>(
      gateway, judge, prompt,
      [](const std::string& text) { return parse_verdict_response(text, "verification"); });
  return make_claim_verdict(claim.id, verdict.yes ? 1.0 : 0.0, verdict.reasoning);
}

ClaimVerdict verify_claim(const Claim& claim, const std::vector<SourceDocument>& documents,
                          Gateway& gateway, const VerificationMode& mode,
                          const PromptCatalog& prompts) {
  switch (mode.strategy) {
    case VerifyStrategy::logprob:
      return verify_logprob(claim, documents, gateway, mode.judge, prompts, mode.yes_mode);
    case VerifyStrategy::cot:
      return verify_cot(claim, documents, gateway, mode.judge, prompts);
  }
  throw DomainError("unknown verification strategy");
}

SummaryVerdict verify_summary(const std::string& summary_id, const std::string& summary,
                              const std::vector<SourceDocument>& documents, Gateway& gateway,
                              const VerificationMode& mode, const PromptCatalog& prompts,
                              const Threshold& threshold, int max_in_flight) {
  const ModelSpec& decomposer = mode.decomposer ? *mode.decomposer : mode.judge;
  std::vector<Claim> claims;
  try {
    claims = decompose_prompted(summary, gateway, decomposer, prompts);
  } catch (const ParseError& e) {
    throw ParseError(e.stage(), "summary " + summary_id + ": " + e.what(), e.raw_response());
  }

  std::vector<ClaimVerdict> verdicts(claims.size());
  parallel_for(claims.size(), max_in_flight, [&](std::size_t i) {
    try {
      verdicts[i] = verify_claim(claims[i], documents, gateway, mode, prompts);
    } catch (const Error& e) {
      throw Error(e.category(), "summary " + summary_id + ", claim " + std::to_string(i) + ": " +
                                    e.what());
    }
  });

  return make_summary_verdict(summary_id, std::move(verdicts), threshold);
}

SummaryVerdict verify_single_prompt(const std::string& summary_id, const std::string& summary,
                                    const std::vector<SourceDocument>& documents, Gateway& gateway,
                                    const ModelSpec& judge, const PromptCatalog& prompts,
                                    const Threshold& threshold) {
  std::string prompt = render_template(prompts.text("verify_single"),
                                       {{"document", render_document_block(documents)},
                                        {"summary", summary}});

  auto parse = [](const std::string& response) {
    std::vector<std::pair<std::string, bool>> entries;  // (claim text, supported)
    std::string current_claim;
    for (const std::string& raw : split_lines(response)) {
      std::string line = trim(raw);
      if (line.empty()) continue;
      if (istarts_with(line, "Supported:")) {
        bool yes = parse_supported_field(line.substr(std::string("Supported:").size()),
                                         "single-prompt", response);
        entries.emplace_back(trim(current_claim), yes);
        current_claim.clear();
      } else if (istarts_with(line, "Claim")) {
        if (std::size_t colon = line.find(':'); colon != std::string::npos) {
          current_claim = trim(std::string_view(line).substr(colon + 1));
        }
      }
    }
    if (entries.empty()) {
      throw ParseError("single-prompt", "response enumerates no verified claims", response);
    }
    return entries;
  };

  auto entries = ask_with_reask<std::vector<std::pair<std::string, bool>>>(gateway, judge, prompt,
                                                                           parse);

  std::vector<ClaimVerdict> verdicts;
  verdicts.reserve(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    ClaimVerdict v = make_claim_verdict(static_cast<int>(i), entries[i].second ? 1.0 : 0.0);
    v.reasoning = entries[i].first;
    verdicts.push_back(std::move(v));
  }
  return make_summary_verdict(summary_id, std::move(verdicts), threshold);
}

}  // namespace facver
