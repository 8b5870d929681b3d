#pragma once

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "facver/types.hpp"

namespace facver {

// Product of per-claim correctness probabilities (independence assumption).
// Empty input is the empty product, 1.0; callers flag that case upstream.
// Throws DomainError if any element is outside [0, 1].
double combine_probabilities(std::span<const double> probs);

// hallucinated iff p_summary < threshold.value; a tie classifies as faithful.
Label classify(double p_summary, const Threshold& threshold);

// Maps the two class means to a threshold value. Default is the midpoint.
using CalibrationRule = std::function<double(double faithful_mean, double hallucinated_mean)>;

double midpoint_rule(double faithful_mean, double hallucinated_mean);

Threshold calibrate(std::span<const std::pair<double, Label>> labeled,
                    const CalibrationRule& rule, std::string split_tag = "");
Threshold calibrate(std::span<const std::pair<double, Label>> labeled,
                    std::string split_tag = "");

// Population-level correction: true prevalence is estimated at 2/3 of the
// automated reports. Returns the unrounded value; use display_round for output.
double adjust_rate(double reported);

// Round-half-to-even at `decimals` places (report formatting).
double display_round(double value, int decimals = 2);

// Assembles a SummaryVerdict from per-claim verdicts: p_summary is the
// product of claim probabilities, label comes from classify, and the
// reported count is the number of unsupported claims.
SummaryVerdict make_summary_verdict(std::string summary_id, std::vector<ClaimVerdict> claim_verdicts,
                                    const Threshold& threshold,
                                    std::vector<std::string> warnings = {});

}  // namespace facver
