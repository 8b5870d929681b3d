#include "facver/serialize.hpp"

namespace facver {

using nlohmann::json;

json to_json(const ClaimVerdict& v) {
  json j;
  j["claim_id"] = v.claim_id;
  j["probability"] = v.probability;
  j["supported"] = v.supported;
  j["reasoning"] = v.reasoning;
  if (v.revised_claim) j["revised_claim"] = *v.revised_claim;
  if (v.error_tag) j["error_tag"] = *v.error_tag;
  return j;
}

json to_json(const SummaryVerdict& v) {
  json j;
  j["summary_id"] = v.summary_id;
  j["p_summary"] = v.p_summary;
  j["threshold"] = v.threshold;
  j["label"] = to_string(v.label);
  j["reported_hallucination_count"] = v.reported_hallucination_count;
  json claims = json::array();
  for (const ClaimVerdict& cv : v.claim_verdicts) claims.push_back(to_json(cv));
  j["claim_verdicts"] = std::move(claims);
  if (!v.warnings.empty()) j["warnings"] = v.warnings;
  return j;
}

json to_json(const Threshold& t) {
  json j;
  j["value"] = t.value;
  j["faithful_mean"] = t.faithful_mean;
  j["hallucinated_mean"] = t.hallucinated_mean;
  j["split_tag"] = t.split_tag;
  return j;
}

json to_json(const HallucinationStats& s) {
  json j;
  j["model_label"] = s.model_label;
  j["summaries_evaluated"] = s.summaries_evaluated;
  j["reported_per_summary"] = s.reported_per_summary;
  j["adjusted_per_summary"] = s.adjusted_per_summary;
  // Rounded views match the precision used in result tables.
  j["reported_per_summary_2dp"] = display_round(s.reported_per_summary, 2);
  j["adjusted_per_summary_2dp"] = display_round(s.adjusted_per_summary, 2);
  j["pct_with_reported"] = s.pct_with_reported;
  return j;
}

json to_json(const FactoredCritique& c) {
  json entries = json::array();
  for (const FactoredCritique::Entry& e : c.entries) {
    entries.push_back({{"original_sentence", e.original_sentence},
                       {"critique_text", e.critique_text}});
  }
  json j;
  j["entries"] = std::move(entries);
  j["text"] = c.to_text();
  return j;
}

namespace halueval {

json to_json(const Prediction& p) {
  json j;
  j["instance_id"] = p.instance_id;
  if (p.predicted) {
    j["predicted"] = facver::to_string(*p.predicted);
    j["p_summary"] = p.p_summary;
  } else {
    j["predicted"] = nullptr;
    j["p_summary"] = nullptr;
  }
  if (p.error_tag) j["error_tag"] = *p.error_tag;
  return j;
}

}  // namespace halueval

std::string dump_json_line(const json& j) { return j.dump(); }

std::string dump_json_pretty(const json& j) { return j.dump(2) + "\n"; }

}  // namespace facver
