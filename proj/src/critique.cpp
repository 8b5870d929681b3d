#include "facver/critique.hpp"

#include "facver/decompose.hpp"
#include "facver/errors.hpp"
#include "facver/util.hpp"
#include "facver/verify.hpp"

namespace facver {

namespace {

// The template carries one source block; rendering repeats it per source.
const std::string kSourceBlock = "[reference]:\n\nTitle: [title]\n\nAbstract: [abstract]";
// The template carries one feedback line; rendering swaps in the full
// factored critique.
const std::string kFeedbackLine =
    "- For the sentence \"[original false claim]\" in the summary: [critique]";

std::string splice(const std::string& templ, const std::string& block,
                   const std::string& replacement, const std::string& templ_name) {
  std::size_t at = templ.find(block);
  if (at == std::string::npos) {
    throw ConfigError(templ_name + " template is missing its substitution block");
  }
  std::string out = templ;
  out.replace(at, block.size(), replacement);
  return out;
}

std::string strip_wrapping_quotes(std::string s) {
  s = trim(s);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = trim(s.substr(1, s.size() - 2));
  return s;
}

bool is_na(const std::string& s) {
  std::string v = strip_wrapping_quotes(s);
  while (!v.empty() && v.back() == '.') v.pop_back();
  return iequals(v, "N/A") || iequals(v, "NA") || iequals(v, "None");
}

struct CritiqueFields {
  std::string critique_text;
  bool supported = false;
  std::optional<std::string> revised_claim;
  std::vector<std::string> warnings;
};

CritiqueFields parse_critique_response(const std::string& response) {
  std::vector<std::string> lines = split_lines(response);
  std::ptrdiff_t critique_at = -1, supported_at = -1, revised_at = -1;
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(lines.size()); ++i) {
    std::string t = trim(lines[i]);
    if (critique_at < 0 && istarts_with(t, "Critique:")) critique_at = i;
    if (istarts_with(t, "Supported:")) supported_at = i;
    if (istarts_with(t, "Revised Claim:")) revised_at = i;
  }
  if (critique_at < 0) {
    throw ParseError("critique", "response has no \"Critique:\" field", response);
  }
  if (supported_at < 0 || supported_at < critique_at) {
    throw ParseError("critique", "response has no \"Supported:\" field after the critique",
                     response);
  }

  CritiqueFields out;
  {
    std::string text = trim(lines[critique_at]).substr(std::string("Critique:").size());
    for (std::ptrdiff_t i = critique_at + 1; i < supported_at; ++i) text += "\n" + lines[i];
    out.critique_text = trim(text);
  }
  out.supported = parse_supported_field(
      trim(lines[supported_at]).substr(std::string("Supported:").size()), "critique", response);

  std::optional<std::string> revised;
  if (revised_at > supported_at) {
    std::string text = trim(lines[revised_at]).substr(std::string("Revised Claim:").size());
    for (std::size_t i = revised_at + 1; i < lines.size(); ++i) text += "\n" + lines[i];
    text = strip_wrapping_quotes(trim(text));
    if (!text.empty() && !is_na(text)) revised = text;
  }

  if (out.supported) {
    if (revised) {
      out.warnings.push_back("critic offered a revision for a supported claim; revision dropped");
    }
  } else {
    if (!revised) {
      throw ParseError("critique",
                       "unsupported claim requires a concrete revised claim (got N/A or none)",
                       response);
    }
    out.revised_claim = std::move(revised);
  }
  return out;
}

std::string corrected_summary_marker_parse(const std::string& response, const std::string& stage) {
  static const std::string marker = "Corrected summary:";
  std::string lowered = to_lower(response);
  std::size_t at = lowered.find(to_lower(marker));
  if (at == std::string::npos) {
    throw ParseError(stage, "response has no \"Corrected summary:\" marker", response);
  }
  return trim(std::string_view(response).substr(at + marker.size()));
}

// Multi-turn request with one re-ask appended as an extra instruction.
template <typename T>
T converse_with_reask(Gateway& gateway, const ModelSpec& model, std::vector<Message> messages,
                      const std::function<T(const std::string&)>& parse) {
  CompletionRequest request;
  request.model = model;
  request.messages = messages;
  try {
    return parse(gateway.complete(request).text);
  } catch (const ParseError&) {
    CompletionRequest retry;
    retry.model = model;
    messages.back().content += "\n\nAnswer with exactly the requested format.";
    retry.messages = std::move(messages);
    return parse(gateway.complete(retry).text);
  }
}

}  // namespace

Critique critique_claim(const Claim& claim, const std::vector<SourceDocument>& sources,
                        Gateway& gateway, const ModelSpec& critic, const PromptCatalog& prompts) {
  if (sources.empty()) {
    throw DomainError("critique_claim needs at least one cited source (claim " +
                      std::to_string(claim.id) + ")");
  }

  std::string source_blocks;
  std::string references;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    if (i) {
      source_blocks += "\n\n";
      references += i + 1 == sources.size() ? " and " : ", ";
    }
    source_blocks += render_template(kSourceBlock, {{"reference", sources[i].reference},
                                                    {"title", sources[i].title},
                                                    {"abstract", sources[i].text}});
    references += sources[i].reference;
  }

  std::string templ = splice(prompts.text("critique"), kSourceBlock, source_blocks, "critique");
  std::string prompt =
      render_template(templ, {{"paper references", references},
                              {"claim", claim.text},
                              {"\"s\" if we have multiple abstracts", sources.size() > 1 ? "s" : ""}});

  CompletionRequest request = make_request(critic, prompt);
  CritiqueFields fields;
  try {
    fields = parse_critique_response(gateway.complete(request).text);
  } catch (const ParseError&) {
    CompletionRequest retry =
        make_request(critic, prompt + "\n\nAnswer with exactly the requested format.");
    fields = parse_critique_response(gateway.complete(retry).text);
  }

  Critique critique;
  critique.claim_id = claim.id;
  critique.critique_text = std::move(fields.critique_text);
  critique.supported = fields.supported;
  critique.revised_claim = std::move(fields.revised_claim);
  critique.warnings = std::move(fields.warnings);
  return critique;
}

FactoredCritique assemble_factored_critique(const std::vector<Claim>& claims,
                                            const std::vector<Critique>& critiques) {
  FactoredCritique out;
  for (const Claim& claim : claims) {
    for (const Critique& critique : critiques) {
      if (critique.claim_id != claim.id || critique.supported) continue;
      out.entries.push_back(FactoredCritique::Entry{claim.text, critique.critique_text});
      break;
    }
  }
  return out;
}

std::string revise_summary(const std::string& original_summary, const FactoredCritique& critique,
                           const ModelSpec& reviser, Gateway& gateway,
                           const PromptCatalog& prompts, const ConversationContext& context) {
  if (critique.empty()) {
    throw DomainError("revise_summary called with an empty critique; caller should short-circuit");
  }
  std::string prompt =
      splice(prompts.text("revise"), kFeedbackLine, critique.to_text(), "revise");

  std::vector<Message> messages = context.messages;
  if (messages.empty()) {
    // No generation exchange to replay (stand-alone revision): inline the
    // summary so "your summary" has a referent.
    messages.push_back(Message{"user", "Here is a summary you wrote:\n\n" + original_summary});
    messages.push_back(Message{"assistant", original_summary});
  }
  messages.push_back(Message{"user", std::move(prompt)});

  return converse_with_reask<std::string>(
      gateway, reviser, std::move(messages),
      [](const std::string& text) { return corrected_summary_marker_parse(text, "revision"); });
}

RevisionOutcome revise_pipeline(const std::string& summary, const SourceResolver& resolve,
                                Gateway& gateway, const ModelSpec& critic,
                                const ModelSpec& reviser, const PromptCatalog& prompts,
                                const ConversationContext& context, int passes) {
  if (passes < 1) throw ConfigError("passes must be >= 1");

  RevisionOutcome outcome;
  outcome.revised_summary = summary;
  ConversationContext conversation = context;

  for (int pass = 0; pass < passes; ++pass) {
    std::vector<Claim> claims = decompose_sentences(outcome.revised_summary);

    std::vector<Critique> critiques;
    for (const Claim& claim : claims) {
      std::vector<SourceDocument> sources;
      try {
        sources = resolve(claim);
      } catch (const DanglingCitationError& e) {
        Critique dangling;
        dangling.claim_id = claim.id;
        dangling.critique_text =
            "The sentence cites a source that is not among the provided papers.";
        dangling.supported = false;
        dangling.revised_claim = std::nullopt;
        critiques.push_back(std::move(dangling));
        outcome.warnings.push_back("claim " + std::to_string(claim.id) + ": " + e.what());
        continue;
      }
      if (sources.empty()) continue;  // uncited sentence, not checkable
      critiques.push_back(critique_claim(claim, sources, gateway, critic, prompts));
      for (const std::string& w : critiques.back().warnings) {
        outcome.warnings.push_back("claim " + std::to_string(claim.id) + ": " + w);
      }
    }

    FactoredCritique factored = assemble_factored_critique(claims, critiques);
    outcome.pass_critiques.push_back(factored);
    outcome.claim_critiques = std::move(critiques);
    if (factored.empty()) break;

    outcome.critique = factored;
    std::string revised = revise_summary(outcome.revised_summary, factored, reviser, gateway,
                                         prompts, conversation);
    ++outcome.revision_calls;

    // Extend the conversation so a further pass revises within the same chat.
    std::string revision_prompt =
        splice(prompts.text("revise"), kFeedbackLine, factored.to_text(), "revise");
    if (conversation.messages.empty()) {
      conversation.messages.push_back(
          Message{"user", "Here is a summary you wrote:\n\n" + outcome.revised_summary});
      conversation.messages.push_back(Message{"assistant", outcome.revised_summary});
    }
    conversation.messages.push_back(Message{"user", std::move(revision_prompt)});
    conversation.messages.push_back(Message{"assistant", "Corrected summary: " + revised});

    outcome.revised_summary = std::move(revised);
  }

  return outcome;
}

SelfCorrectOutcome self_correct_baseline(const std::string& summary,
                                         const std::string& papers_block, Gateway& gateway,
                                         const ModelSpec& model, const PromptCatalog& prompts,
                                         const ConversationContext& context) {
  SelfCorrectOutcome outcome;

  std::string feedback_prompt = render_template(
      prompts.text("self_correct_feedback"), {{"Papers", papers_block}, {"summary", summary}});
  std::string feedback = gateway.complete(make_request(model, feedback_prompt)).text;
  if (istarts_with(trim_leading(feedback), "Feedback:")) {
    feedback = trim(trim_leading(feedback).substr(std::string("Feedback:").size()));
  } else {
    feedback = trim(feedback);
  }
  outcome.feedback = feedback;
  if (feedback.empty()) {
    outcome.warnings.push_back("model produced empty feedback; revision attempted anyway");
  }

  std::string revise_prompt = render_template(prompts.text("self_correct_revise"),
                                              {{"Model feedback from prompt above", feedback}});

  std::vector<Message> messages = context.messages;
  if (messages.empty()) {
    messages.push_back(Message{"user", "Here is a summary you wrote:\n\n" + summary});
    messages.push_back(Message{"assistant", summary});
  }
  messages.push_back(Message{"user", std::move(revise_prompt)});

  outcome.corrected_summary = converse_with_reask<std::string>(
      gateway, model, std::move(messages),
      [](const std::string& text) { return corrected_summary_marker_parse(text, "revision"); });
  return outcome;
}

}  // namespace facver
