#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace facver {

enum class Label { faithful, hallucinated };

std::string to_string(Label label);
Label label_from_string(const std::string& s);

// Per-claim correctness verdict. `supported` is the >= 0.5 convenience view
// of `probability` and is kept consistent by make_claim_verdict.
struct ClaimVerdict {
  int claim_id = 0;
  double probability = 0.0;
  bool supported = false;
  std::string reasoning;
  std::optional<std::string> revised_claim;
  std::optional<std::string> error_tag;
};

ClaimVerdict make_claim_verdict(int claim_id, double probability, std::string reasoning = "",
                                std::optional<std::string> revised_claim = std::nullopt);

// Decision boundary on the summary-correctness probability, together with the
// class means it was derived from. `split_tag` records which data calibrated
// it (leakage guard: reports show where theta came from).
struct Threshold {
  double value = 0.5;
  double faithful_mean = 0.5;
  double hallucinated_mean = 0.5;
  std::string split_tag;

  static Threshold fixed(double value);
};

struct SummaryVerdict {
  std::string summary_id;
  std::vector<ClaimVerdict> claim_verdicts;
  double p_summary = 1.0;
  double threshold = 0.5;
  Label label = Label::faithful;
  int reported_hallucination_count = 0;
  std::vector<std::string> warnings;
};

struct HallucinationStats {
  std::string model_label;
  std::size_t summaries_evaluated = 0;
  double reported_per_summary = 0.0;
  // 2/3 of reported; kept unrounded here, display_round(x, 2) for output.
  double adjusted_per_summary = 0.0;
  double pct_with_reported = 0.0;
};

enum class ClaimOrigin { prompted, sentence };

// One "Author (year)" match inside a sentence.
struct CitationRef {
  std::string author_token;
  int year = 0;
  std::string raw;
};

struct Claim {
  int id = 0;
  std::string text;
  ClaimOrigin origin = ClaimOrigin::prompted;
  std::vector<CitationRef> citations;
  std::optional<int> source_sentence_index;
};

// Verification/critique context. `reference` and `title` are empty for plain
// documents (HaluEval path); populated for paper abstracts.
struct SourceDocument {
  std::string reference;
  std::string title;
  std::string text;
};

struct Critique {
  int claim_id = 0;
  std::string critique_text;
  bool supported = false;
  std::optional<std::string> revised_claim;
  std::vector<std::string> warnings;
};

// Ordered concatenation of the critiques of unsupported claims.
struct FactoredCritique {
  struct Entry {
    std::string original_sentence;
    std::string critique_text;
  };

  std::vector<Entry> entries;

  bool empty() const { return entries.empty(); }
  // Stable rendering, one "- For the sentence ..." line per entry. Equal
  // inputs must produce byte-identical text (cache hits on revision).
  std::string to_text() const;
};

}  // namespace facver
