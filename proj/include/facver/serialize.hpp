#pragma once

#include <nlohmann/json.hpp>

#include "facver/halueval.hpp"
#include "facver/papers.hpp"
#include "facver/types.hpp"

namespace facver {

// JSON projections used by report files and the CLI. All object keys come out
// sorted (nlohmann::json default) so serialized output is stable.

nlohmann::json to_json(const ClaimVerdict& v);
nlohmann::json to_json(const SummaryVerdict& v);
nlohmann::json to_json(const Threshold& t);
nlohmann::json to_json(const HallucinationStats& s);
nlohmann::json to_json(const FactoredCritique& c);

namespace halueval {
nlohmann::json to_json(const Prediction& p);
}

std::string dump_json_line(const nlohmann::json& j);   // compact, one line
std::string dump_json_pretty(const nlohmann::json& j); // 2-space indent + trailing newline

}  // namespace facver
