#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "facver/errors.hpp"
#include "facver/probability.hpp"

using namespace facver;

TEST_CASE("summary probability is the product of claim probabilities") {
  std::vector<double> probs{0.9, 0.8, 0.5};
  CHECK(combine_probabilities(probs) == doctest::Approx(0.36).epsilon(1e-12));

  CHECK(combine_probabilities(std::vector<double>{}) == 1.0);
  CHECK(combine_probabilities(std::vector<double>{0.0, 0.9}) == 0.0);
  CHECK(combine_probabilities(std::vector<double>{1.0, 1.0, 1.0}) == 1.0);

  CHECK_THROWS_AS(combine_probabilities(std::vector<double>{1.1}), DomainError);
  CHECK_THROWS_AS(combine_probabilities(std::vector<double>{-0.01}), DomainError);
  CHECK_THROWS_AS(combine_probabilities(std::vector<double>{std::nan("")}), DomainError);
}

TEST_CASE("product properties hold on random vectors") {
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    std::size_t n = 1 + rng() % 8;
    std::vector<double> probs(n);
    double manual = 1.0;
    for (double& p : probs) {
      p = unit(rng);
      manual *= p;
    }
    double combined = combine_probabilities(probs);
    CHECK(combined == doctest::Approx(manual).epsilon(1e-12));
    CHECK(combined >= 0.0);
    CHECK(combined <= 1.0);

    // Order invariance.
    std::vector<double> reversed(probs.rbegin(), probs.rend());
    CHECK(combine_probabilities(reversed) == doctest::Approx(combined).epsilon(1e-12));

    // Monotonicity: one more factor can only keep or lower the product.
    probs.push_back(unit(rng));
    CHECK(combine_probabilities(probs) <= combined + 1e-15);
  }
}

TEST_CASE("classification thresholds the product, ties stay faithful") {
  Threshold t = Threshold::fixed(0.5);
  CHECK(classify(0.49, t) == Label::hallucinated);
  CHECK(classify(0.5, t) == Label::faithful);  // tie -> faithful
  CHECK(classify(0.51, t) == Label::faithful);
  CHECK(classify(0.0, Threshold::fixed(0.0)) == Label::faithful);
  CHECK(classify(1.0, Threshold::fixed(1.0)) == Label::faithful);

  CHECK_THROWS_AS(Threshold::fixed(1.5), DomainError);
  CHECK_THROWS_AS(Threshold::fixed(-0.1), DomainError);
}

TEST_CASE("claim verdicts validate and mark support at 0.5") {
  ClaimVerdict v = make_claim_verdict(3, 0.7, "quoted evidence");
  CHECK(v.claim_id == 3);
  CHECK(v.probability == 0.7);
  CHECK(v.supported);
  CHECK_FALSE(make_claim_verdict(0, 0.49).supported);
  CHECK(make_claim_verdict(0, 0.5).supported);
  CHECK_THROWS_AS(make_claim_verdict(0, 1.01), DomainError);
  CHECK_THROWS_AS(make_claim_verdict(0, -0.2), DomainError);
}

TEST_CASE("calibration places the threshold midway between class means") {
  std::vector<std::pair<double, Label>> labeled{
      {0.8, Label::faithful}, {0.9, Label::faithful}, {0.3, Label::hallucinated}};
  Threshold t = calibrate(labeled, "train");
  CHECK(t.faithful_mean == doctest::Approx(0.85).epsilon(1e-12));
  CHECK(t.hallucinated_mean == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(t.value == doctest::Approx(0.575).epsilon(1e-12));
  CHECK(t.split_tag == "train");

  SUBCASE("the combination rule is injectable") {
    Threshold custom = calibrate(labeled, [](double f, double h) { return 0.25 * f + 0.75 * h; });
    CHECK(custom.value == doctest::Approx(0.25 * 0.85 + 0.75 * 0.3).epsilon(1e-12));
  }

  SUBCASE("a rule escaping [0,1] is rejected") {
    CHECK_THROWS_AS(calibrate(labeled, [](double, double) { return 2.0; }), CalibrationError);
  }
}

TEST_CASE("calibration requires at least one example of each class") {
  std::vector<std::pair<double, Label>> only_faithful{{0.8, Label::faithful}};
  CHECK_THROWS_AS(calibrate(only_faithful), CalibrationError);
  std::vector<std::pair<double, Label>> only_hallucinated{{0.2, Label::hallucinated}};
  CHECK_THROWS_AS(calibrate(only_hallucinated), CalibrationError);
  std::vector<std::pair<double, Label>> empty;
  CHECK_THROWS_AS(calibrate(empty), CalibrationError);
  std::vector<std::pair<double, Label>> bad{{1.2, Label::faithful}, {0.1, Label::hallucinated}};
  CHECK_THROWS_AS(calibrate(bad), CalibrationError);
}

TEST_CASE("rate adjustment scales by two thirds without rounding") {
  CHECK(adjust_rate(1.26) == doctest::Approx(0.84).epsilon(1e-12));
  CHECK(adjust_rate(2.32) == doctest::Approx(2.32 * 2.0 / 3.0).epsilon(1e-15));
  CHECK(adjust_rate(0.0) == 0.0);
  CHECK_THROWS_AS(adjust_rate(-0.5), DomainError);
}

TEST_CASE("display rounding is half-to-even") {
  // 0.125 and 0.375 are exactly representable, so the tie is genuine.
  CHECK(display_round(0.125, 2) == doctest::Approx(0.12).epsilon(1e-12));
  CHECK(display_round(0.375, 2) == doctest::Approx(0.38).epsilon(1e-12));
  CHECK(display_round(2.5, 0) == 2.0);
  CHECK(display_round(3.5, 0) == 4.0);
  CHECK(display_round(1.5466666, 2) == doctest::Approx(1.55).epsilon(1e-12));
}

TEST_CASE("summary verdicts combine, classify and count unsupported claims") {
  Threshold t = Threshold::fixed(0.5);
  std::vector<ClaimVerdict> claims{make_claim_verdict(0, 0.9), make_claim_verdict(1, 0.4),
                                   make_claim_verdict(2, 0.8)};
  SummaryVerdict v = make_summary_verdict("s1", claims, t);
  CHECK(v.p_summary == doctest::Approx(0.9 * 0.4 * 0.8).epsilon(1e-12));
  CHECK(v.label == Label::hallucinated);
  CHECK(v.reported_hallucination_count == 1);
  CHECK(v.warnings.empty());

  SUBCASE("no claims defaults to faithful with a warning") {
    SummaryVerdict empty = make_summary_verdict("s2", {}, t);
    CHECK(empty.p_summary == 1.0);
    CHECK(empty.label == Label::faithful);
    REQUIRE(empty.warnings.size() == 1);
    CHECK(empty.warnings[0].find("no claims extracted") != std::string::npos);
  }

  SUBCASE("a certain-false claim zeroes the product") {
    SummaryVerdict zero = make_summary_verdict(
        "s3", {make_claim_verdict(0, 1.0), make_claim_verdict(1, 0.0)}, t);
    CHECK(zero.p_summary == 0.0);
    CHECK(zero.label == Label::hallucinated);
  }
}
