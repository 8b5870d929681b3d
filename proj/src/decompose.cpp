#include "facver/decompose.hpp"

#include <cctype>

#include "facver/errors.hpp"
#include "facver/util.hpp"

namespace facver {

namespace {

bool is_ws(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
bool is_closer(char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; }

// True when the '.' at `dot` ends a protected abbreviation or a single-letter
// initial ("J. Smith"), i.e. must not be treated as a sentence end.
bool protected_period(const std::string& text, std::size_t dot,
                      const std::vector<std::string>& abbreviations) {
  for (const std::string& abbr : abbreviations) {
    if (abbr.empty() || abbr.back() != '.') continue;
    if (dot + 1 < abbr.size()) continue;
    std::size_t start = dot + 1 - abbr.size();
    if (text.compare(start, abbr.size(), abbr) != 0) continue;
    // Word boundary before the abbreviation ("Journal." must not match "al.").
    if (start == 0 || !is_alnum(text[start - 1])) return true;
  }
  if (dot >= 1 && is_upper(text[dot - 1])) {
    if (dot == 1) return true;
    char before = text[dot - 2];
    if (is_ws(before) || before == '(' || before == '"' || before == '\'') return true;
  }
  return false;
}

void push_sentence(std::vector<std::string>& out, const std::string& text, std::size_t begin,
                   std::size_t end) {
  std::string s = trim(std::string_view(text).substr(begin, end - begin));
  if (!s.empty()) out.push_back(std::move(s));
}

}  // namespace

std::vector<std::string> SentenceSplitOptions::default_abbreviations() {
  return {"et al.", "e.g.", "i.e.", "vs.", "cf.", "ca.", "resp.",
          "Fig.",   "Figs.", "Eq.",  "Eqs.", "Sec.", "Ref.",  "Refs."};
}

std::vector<std::string> split_sentences(const std::string& text,
                                         const SentenceSplitOptions& options) {
  std::vector<std::string> sentences;
  std::size_t start = 0;
  std::size_t i = 0;
  const std::size_t n = text.size();

  while (i < n) {
    char c = text[i];
    if (c != '.' && c != '!' && c != '?') {
      ++i;
      continue;
    }
    if (c == '.' && protected_period(text, i, options.abbreviations)) {
      ++i;
      continue;
    }

    std::size_t j = i + 1;
    while (j < n && is_closer(text[j])) ++j;

    if (j == n) {
      push_sentence(sentences, text, start, j);
      start = j;
      i = j;
      break;
    }
    if (is_ws(text[j])) {
      std::size_t k = j;
      while (k < n && is_ws(text[k])) ++k;
      if (k == n) {
        push_sentence(sentences, text, start, j);
        start = k;
        i = k;
        break;
      }
      if (is_upper(text[k])) {
        push_sentence(sentences, text, start, j);
        start = k;
        i = k;
        continue;
      }
    }
    i = j;
  }

  if (start < n) push_sentence(sentences, text, start, n);
  return sentences;
}

std::vector<std::string> parse_claim_list(const std::string& response) {
  static const std::string marker = "the claims are:";
  std::string lowered = to_lower(response);
  std::size_t begin = 0;
  if (std::size_t at = lowered.find(marker); at != std::string::npos) {
    begin = at + marker.size();
  }

  std::vector<std::string> claims;
  std::string current;
  bool open = false;
  auto flush = [&] {
    if (open) {
      std::string c = trim(current);
      if (!c.empty()) claims.push_back(std::move(c));
    }
    current.clear();
    open = false;
  };

  for (const std::string& raw_line : split_lines(response.substr(begin))) {
    std::string line = trim(raw_line);
    if (line.empty()) {
      flush();
      continue;
    }
    if (line[0] == '-') {
      flush();
      current = trim(std::string_view(line).substr(1));
      open = true;
    } else if (open) {
      current += " " + line;  // wrapped bullet continuation
    }
  }
  flush();

  if (claims.empty()) {
    throw ParseError("decomposition", "response contains no claim bullets", response);
  }
  return claims;
}

std::vector<Claim> decompose_prompted(const std::string& summary, Gateway& gateway,
                                      const ModelSpec& model, const PromptCatalog& prompts) {
  std::string prompt = render_template(prompts.text("decompose"), {{"summary", summary}});

  std::vector<std::string> texts;
  try {
    texts = parse_claim_list(gateway.complete(make_request(model, prompt)).text);
  } catch (const ParseError&) {
    // One re-ask with an explicit format reminder; the appended instruction
    // changes the cache key, so this is a genuinely fresh call.
    std::string retry = prompt + "\n\nAnswer with exactly the requested format.";
    texts = parse_claim_list(gateway.complete(make_request(model, retry)).text);
  }

  std::vector<Claim> claims;
  claims.reserve(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    Claim claim;
    claim.id = static_cast<int>(i);
    claim.text = texts[i];
    claim.origin = ClaimOrigin::prompted;
    claims.push_back(std::move(claim));
  }
  return claims;
}

std::vector<Claim> decompose_sentences(const std::string& summary,
                                       const SentenceSplitOptions& options) {
  std::vector<std::string> sentences = split_sentences(summary, options);
  std::vector<Claim> claims;
  claims.reserve(sentences.size());
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    Claim claim;
    claim.id = static_cast<int>(i);
    claim.text = sentences[i];
    claim.origin = ClaimOrigin::sentence;
    claim.source_sentence_index = static_cast<int>(i);
    claims.push_back(std::move(claim));
  }
  return claims;
}

}  // namespace facver
