#include "facver/probability.hpp"

#include <cfenv>
#include <cmath>
#include <utility>

#include "facver/errors.hpp"

namespace facver {

std::string to_string(Label label) {
  return label == Label::faithful ? "faithful" : "hallucinated";
}

Label label_from_string(const std::string& s) {
  if (s == "faithful") return Label::faithful;
  if (s == "hallucinated") return Label::hallucinated;
  throw DomainError("unknown label: " + s);
}

ClaimVerdict make_claim_verdict(int claim_id, double probability, std::string reasoning,
                                std::optional<std::string> revised_claim) {
  if (!(probability >= 0.0 && probability <= 1.0)) {
    throw DomainError("claim probability outside [0,1]: " + std::to_string(probability));
  }
  ClaimVerdict v;
  v.claim_id = claim_id;
  v.probability = probability;
  v.supported = probability >= 0.5;
  v.reasoning = std::move(reasoning);
  v.revised_claim = std::move(revised_claim);
  return v;
}

Threshold Threshold::fixed(double value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw DomainError("threshold outside [0,1]: " + std::to_string(value));
  }
  Threshold t;
  t.value = value;
  t.faithful_mean = value;
  t.hallucinated_mean = value;
  t.split_tag = "fixed";
  return t;
}

double combine_probabilities(std::span<const double> probs) {
  double product = 1.0;
  for (double p : probs) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw DomainError("claim probability outside [0,1]: " + std::to_string(p));
    }
    product *= p;
  }
  return product;
}

Label classify(double p_summary, const Threshold& threshold) {
  return p_summary < threshold.value ? Label::hallucinated : Label::faithful;
}

double midpoint_rule(double faithful_mean, double hallucinated_mean) {
  return (faithful_mean + hallucinated_mean) / 2.0;
}

Threshold calibrate(std::span<const std::pair<double, Label>> labeled, const CalibrationRule& rule,
                    std::string split_tag) {
  double faithful_sum = 0.0, hallucinated_sum = 0.0;
  std::size_t faithful_n = 0, hallucinated_n = 0;
  for (const auto& [p, label] : labeled) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw CalibrationError("probability outside [0,1]: " + std::to_string(p));
    }
    if (label == Label::faithful) {
      faithful_sum += p;
      ++faithful_n;
    } else {
      hallucinated_sum += p;
      ++hallucinated_n;
    }
  }
  if (faithful_n == 0 || hallucinated_n == 0) {
    throw CalibrationError("calibration needs at least one example of each class (got " +
                           std::to_string(faithful_n) + " faithful, " +
                           std::to_string(hallucinated_n) + " hallucinated)");
  }
  Threshold t;
  t.faithful_mean = faithful_sum / static_cast<double>(faithful_n);
  t.hallucinated_mean = hallucinated_sum / static_cast<double>(hallucinated_n);
  t.value = rule(t.faithful_mean, t.hallucinated_mean);
  if (!(t.value >= 0.0 && t.value <= 1.0)) {
    throw CalibrationError("calibration rule produced a threshold outside [0,1]: " +
                           std::to_string(t.value));
  }
  t.split_tag = std::move(split_tag);
  return t;
}

Threshold calibrate(std::span<const std::pair<double, Label>> labeled, std::string split_tag) {
  return calibrate(labeled, midpoint_rule, std::move(split_tag));
}

double adjust_rate(double reported) {
  if (reported < 0.0) throw DomainError("rate cannot be negative: " + std::to_string(reported));
  return reported * (2.0 / 3.0);
}

double display_round(double value, int decimals) {
  double scale = std::pow(10.0, decimals);
  // nearbyint honors the default FE_TONEAREST mode: ties round to even.
  return std::nearbyint(value * scale) / scale;
}

SummaryVerdict make_summary_verdict(std::string summary_id,
                                    std::vector<ClaimVerdict> claim_verdicts,
                                    const Threshold& threshold,
                                    std::vector<std::string> warnings) {
  SummaryVerdict verdict;
  verdict.summary_id = std::move(summary_id);
  verdict.warnings = std::move(warnings);

  std::vector<double> probs;
  probs.reserve(claim_verdicts.size());
  int unsupported = 0;
  for (const ClaimVerdict& cv : claim_verdicts) {
    probs.push_back(cv.probability);
    if (!cv.supported) ++unsupported;
  }
  verdict.p_summary = combine_probabilities(probs);
  verdict.threshold = threshold.value;
  verdict.label = classify(verdict.p_summary, threshold);
  verdict.reported_hallucination_count = unsupported;
  if (claim_verdicts.empty()) {
    verdict.warnings.push_back("no claims extracted; empty product defaults to faithful");
  }
  verdict.claim_verdicts = std::move(claim_verdicts);
  return verdict;
}

std::string FactoredCritique::to_text() const {
  std::string out;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (i) out += "\n";
    out += "- For the sentence \"" + entries[i].original_sentence +
           "\" in the summary: " + entries[i].critique_text;
  }
  return out;
}

}  // namespace facver
