#include <doctest.h>

#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "facver/errors.hpp"
#include "facver/scripted.hpp"
#include "facver/verify.hpp"
#include "support.hpp"

using namespace facver;

namespace {

Claim make_claim(int id, std::string text) {
  Claim c;
  c.id = id;
  c.text = std::move(text);
  return c;
}

std::vector<SourceDocument> one_doc(const std::string& text) {
  return {SourceDocument{"", "", text}};
}

using testsupport::RecordingBackend;

}  // namespace

TEST_CASE("reasoned verification maps Yes/No to probability 1/0") {
  auto prompts = testsupport::prompts();
  auto backend = std::make_shared<ScriptedBackend>();
  auto gateway = testsupport::make_gateway(backend);
  ModelSpec judge = testsupport::cot_model();

  backend->add_substring_rule("Claim: The flow rose.",
                              "Reasoning: \"rose by 10%\" supports it.\nSupported: Yes");
  backend->add_substring_rule("Claim: The flow fell.",
                              "Reasoning: the document says \"rose\".\nSupported: No.");

  ClaimVerdict yes = verify_cot(make_claim(0, "The flow rose."), one_doc("It rose by 10%."),
                                *gateway, judge, prompts);
  CHECK(yes.probability == 1.0);
  CHECK(yes.supported);
  CHECK(yes.reasoning == "\"rose by 10%\" supports it.");

  // Trailing period after the verdict is tolerated.
  ClaimVerdict no = verify_cot(make_claim(1, "The flow fell."), one_doc("It rose by 10%."),
                               *gateway, judge, prompts);
  CHECK(no.probability == 0.0);
  CHECK_FALSE(no.supported);
}

TEST_CASE("verdict parsing is lenient about case but never guesses") {
  auto prompts = testsupport::prompts();
  auto backend = std::make_shared<ScriptedBackend>();
  auto gateway = testsupport::make_gateway(backend);
  ModelSpec judge = testsupport::cot_model();

  SUBCASE("lowercase field and answer still parse") {
    backend->add_substring_rule("Claim: lower.", "reasoning: none\nsupported: yes");
    CHECK(verify_cot(make_claim(0, "lower."), one_doc("d"), *gateway, judge, prompts)
              .probability == 1.0);
  }

  SUBCASE("multi-line reasoning is captured up to the verdict") {
    backend->add_substring_rule("Claim: multi.",
                                "Reasoning: first line\nsecond line\nSupported: No");
    ClaimVerdict v = verify_cot(make_claim(0, "multi."), one_doc("d"), *gateway, judge, prompts);
    CHECK(v.reasoning == "first line\nsecond line");
  }

  SUBCASE("an equivocal verdict is a parse error, never a silent No") {
    backend->add_substring_rule("Claim: shaky.", "Reasoning: unsure\nSupported: Maybe");
    CHECK_THROWS_AS(verify_cot(make_claim(0, "shaky."), one_doc("d"), *gateway, judge, prompts),
                    ParseError);
    // Original ask plus one format-reminder retry.
    CHECK(gateway->counters().requests_total == 2);
  }

  SUBCASE("a missing verdict line is a parse error after one retry") {
    backend->add_substring_rule("Claim: absent.", "I think this is fine.");
    CHECK_THROWS_AS(verify_cot(make_claim(0, "absent."), one_doc("d"), *gateway, judge, prompts),
                    ParseError);
    CHECK(gateway->counters().requests_total == 2);
  }
}

TEST_CASE("token-probability verification truncates the prompt at the answer slot") {
  auto prompts = testsupport::prompts();
  auto scripted = std::make_shared<ScriptedBackend>();
  scripted->add_substring_rule("Claim: The dam held.", "", testsupport::yes_no(0.93, 0.04));
  auto recorder = std::make_shared<RecordingBackend>(scripted);
  auto gateway = testsupport::make_gateway(recorder);

  ClaimVerdict v = verify_logprob(make_claim(0, "The dam held."), one_doc("The dam held firm."),
                                  *gateway, testsupport::scripted_model(), prompts);
  CHECK(v.probability == doctest::Approx(0.93));

  std::string prompt = recorder->last_prompt();
  // Ends exactly at the final answer slot: the model's next token is the verdict.
  REQUIRE(prompt.size() >= 10);
  CHECK(prompt.substr(prompt.size() - 10) == "Supported:");
  CHECK(prompt.find("The dam held firm.") != std::string::npos);
  CHECK(prompt.find("Claim: The dam held.") != std::string::npos);
  // The worked examples precede the real query.
  CHECK(prompt.find("Example 1") != std::string::npos);

  SUBCASE("normalized mode rescales against the No mass") {
    ClaimVerdict n = verify_logprob(make_claim(0, "The dam held."), one_doc("The dam held firm."),
                                    *gateway, testsupport::scripted_model(), prompts,
                                    YesProbMode::normalized);
    CHECK(n.probability == doctest::Approx(0.93 / 0.97));
  }
}

TEST_CASE("document blocks: single source verbatim, multiple sources numbered") {
  CHECK(render_document_block({SourceDocument{"", "", "just the text"}}) == "just the text");
  std::string block = render_document_block(
      {SourceDocument{"A (2000)", "T1", "first body"}, SourceDocument{"B (2001)", "T2", "second"}});
  CHECK(block == "Document 1:\nfirst body\n\nDocument 2:\nsecond");
}

TEST_CASE("summary verification: decompose once, verify each claim") {
  auto prompts = testsupport::prompts();
  auto backend = std::make_shared<ScriptedBackend>();
  auto gateway = testsupport::make_gateway(backend);

  const std::string summary = "unique summary about reservoirs";
  backend->add_substring_rule(
      summary, "The claims are:\n- Reservoir A filled.\n- Reservoir B emptied.\n- Gates opened.");
  backend->add_substring_rule("Claim: Reservoir A filled.", "Reasoning: \"A\".\nSupported: Yes");
  backend->add_substring_rule("Claim: Reservoir B emptied.", "Reasoning: \"B\".\nSupported: No");
  backend->add_substring_rule("Claim: Gates opened.", "Reasoning: \"gates\".\nSupported: Yes");

  VerificationMode mode;
  mode.strategy = VerifyStrategy::cot;
  mode.judge = testsupport::cot_model();

  SummaryVerdict v = verify_summary("s1", summary, one_doc("doc"), *gateway, mode, prompts,
                                    Threshold::fixed(0.5));
  CHECK(v.p_summary == 0.0);
  CHECK(v.label == Label::hallucinated);
  CHECK(v.reported_hallucination_count == 1);
  REQUIRE(v.claim_verdicts.size() == 3);

  // Exactly one extraction call plus one verification call per claim.
  CHECK(gateway->counters().requests_total == 4);

  SUBCASE("claim failures carry summary and claim context") {
    auto sparse = std::make_shared<ScriptedBackend>();
    sparse->add_substring_rule(summary,
                               "The claims are:\n- Reservoir A filled.\n- Unmatched claim.");
    sparse->add_substring_rule("Claim: Reservoir A filled.", "Reasoning: ok.\nSupported: Yes");
    auto sparse_gateway = testsupport::make_gateway(sparse);
    try {
      verify_summary("s9", summary, one_doc("doc"), *sparse_gateway, mode, prompts,
                     Threshold::fixed(0.5));
      FAIL("expected script miss");
    } catch (const Error& e) {
      CHECK(e.category() == "script-miss");
      CHECK(std::string(e.what()).find("summary s9") != std::string::npos);
      CHECK(std::string(e.what()).find("claim 1") != std::string::npos);
    }
  }
}

TEST_CASE("claim order does not change the summary probability") {
  auto prompts = testsupport::prompts();
  auto backend = std::make_shared<ScriptedBackend>();
  auto gateway = testsupport::make_gateway(backend);

  backend->add_substring_rule("ordering summary one",
                              "The claims are:\n- Valve V1 opened.\n- Valve V2 closed.");
  backend->add_substring_rule("ordering summary two",
                              "The claims are:\n- Valve V2 closed.\n- Valve V1 opened.");
  backend->add_substring_rule("Claim: Valve V1 opened.", "", testsupport::yes_no(0.9, 0.05));
  backend->add_substring_rule("Claim: Valve V2 closed.", "", testsupport::yes_no(0.5, 0.4));

  VerificationMode mode;
  mode.strategy = VerifyStrategy::logprob;
  mode.judge = testsupport::scripted_model();

  SummaryVerdict a = verify_summary("a", "ordering summary one", one_doc("d"), *gateway, mode,
                                    prompts, Threshold::fixed(0.5));
  SummaryVerdict b = verify_summary("b", "ordering summary two", one_doc("d"), *gateway, mode,
                                    prompts, Threshold::fixed(0.5));
  CHECK(a.p_summary == doctest::Approx(0.45).epsilon(1e-12));
  CHECK(b.p_summary == doctest::Approx(a.p_summary).epsilon(1e-12));
  CHECK(a.label == b.label);
}

TEST_CASE("single-prompt verification enumerates claims in one response") {
  auto prompts = testsupport::prompts();
  auto backend = std::make_shared<ScriptedBackend>();
  auto gateway = testsupport::make_gateway(backend);
  ModelSpec judge = testsupport::cot_model();

  backend->add_substring_rule("single-prompt summary",
                              "Claim 1: Reservoir A filled.\nSupported: Yes\n"
                              "Claim 2: Reservoir B emptied.\nSupported: No\n"
                              "Claim 3: Gates opened.\nSupported: Yes");

  SummaryVerdict v = verify_single_prompt("sp", "single-prompt summary", one_doc("doc"), *gateway,
                                          judge, prompts, Threshold::fixed(0.5));
  REQUIRE(v.claim_verdicts.size() == 3);
  CHECK(v.p_summary == 0.0);
  CHECK(v.label == Label::hallucinated);
  CHECK(v.claim_verdicts[1].reasoning == "Reservoir B emptied.");
  CHECK(gateway->counters().requests_total == 1);  // everything in one call

  SUBCASE("zero enumerated claims is a parse error") {
    backend->add_substring_rule("empty-single summary", "I see no claims to check.");
    CHECK_THROWS_AS(verify_single_prompt("e", "empty-single summary", one_doc("doc"), *gateway,
                                         judge, prompts, Threshold::fixed(0.5)),
                    ParseError);
  }
}

TEST_CASE("multi-prompt and single-prompt agree when verdicts match") {
  auto prompts = testsupport::prompts();
  auto backend = std::make_shared<ScriptedBackend>();
  auto gateway = testsupport::make_gateway(backend);

  // The extraction and single-prompt requests both embed the summary text, so
  // the rules key on template-specific framing around it to stay distinct.
  const std::string summary = "equivalence check summary";
  backend->add_substring_rule("Summary: " + summary,
                              "Claim 1: Pump P1 ran.\nSupported: Yes\n"
                              "Claim 2: Pump P2 idled.\nSupported: No");
  backend->add_substring_rule(summary,
                              "The claims are:\n- Pump P1 ran.\n- Pump P2 idled.");
  backend->add_substring_rule("Claim: Pump P1 ran.", "Reasoning: q.\nSupported: Yes");
  backend->add_substring_rule("Claim: Pump P2 idled.", "Reasoning: q.\nSupported: No");

  VerificationMode mode;
  mode.strategy = VerifyStrategy::cot;
  mode.judge = testsupport::cot_model();

  SummaryVerdict multi = verify_summary("m", summary, one_doc("d"), *gateway, mode, prompts,
                                        Threshold::fixed(0.5));
  SummaryVerdict single = verify_single_prompt("s", summary, one_doc("d"), *gateway,
                                               testsupport::cot_model(), prompts,
                                               Threshold::fixed(0.5));
  CHECK(multi.p_summary == single.p_summary);
  CHECK(multi.label == single.label);
  CHECK(multi.claim_verdicts.size() == single.claim_verdicts.size());
  CHECK(multi.reported_hallucination_count == single.reported_hallucination_count);
}

TEST_CASE("strategy names parse") {
  CHECK(verify_strategy_from_string("logprob") == VerifyStrategy::logprob);
  CHECK(verify_strategy_from_string("fewshot") == VerifyStrategy::logprob);
  CHECK(verify_strategy_from_string("token-prob") == VerifyStrategy::logprob);
  CHECK(verify_strategy_from_string("cot") == VerifyStrategy::cot);
  CHECK_THROWS_AS(verify_strategy_from_string("vibes"), ConfigError);
}
