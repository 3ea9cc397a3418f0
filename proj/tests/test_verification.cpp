#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "citegate/verifier.hpp"

using namespace citegate;

namespace {

ParsedCitation parsed_full() {
    ParsedCitation p;
    p.authors = "Virey";
    p.year = 2009;
    p.title = "Determination of the dark energy equation of state";
    p.arxiv_id = "0804.0389";
    p.url = "https://arxiv.org/abs/0804.0389";
    p.parse_method = ParseMethod::rule_based;
    return p;
}

CandidatePublication candidate_full() {
    CandidatePublication c;
    c.title = "Determination of the dark energy equation of state";
    c.authors = "Virey";
    c.year = 2009;
    c.url = "https://arxiv.org/abs/0804.0389";
    c.arxiv_id = "0804.0389";
    c.source = Source::arxiv;
    c.confidence = 95.0;
    return c;
}

MatchResult match_with(CandidatePublication cand, double similarity, MatchMethod method) {
    MatchResult m;
    m.candidate = std::move(cand);
    m.title_similarity = similarity;
    m.match_method = method;
    return m;
}

RawCitation raw_of(const std::string& text) { return RawCitation{"id1", "col", text}; }

nlohmann::json valid_verdict(double score) {
    return nlohmann::json{{"score", score},
                          {"classification", "exact_match"},
                          {"confidence", "high"},
                          {"reasoning", "scripted"},
                          {"key_differences", nlohmann::json::array()}};
}

}  // namespace

TEST_CASE("verifier prompt substitutes all fields") {
    const auto match = match_with(candidate_full(), 100.0, MatchMethod::arxiv_id_lookup);
    const std::string prompt = render_verifier_prompt(
        parsed_full(), raw_of("[Virey, 2009, ...](https://arxiv.org/abs/0804.0389)"), match);
    CHECK(prompt.find("ArXiv ID: 0804.0389") != std::string::npos);
    CHECK(prompt.find("similarity score 100") != std::string::npos);
    CHECK(prompt.find("matched by arxiv_id_lookup") != std::string::npos);
    CHECK(prompt.find("- Authors: Virey") != std::string::npos);
    CHECK(prompt.find("Context: [Virey, 2009, ...]") != std::string::npos);
    CHECK(prompt.find('{') == std::string::npos);  // no unfilled placeholders
}

TEST_CASE("absent fields render as N/A") {
    ParsedCitation p;
    p.title = "Only Title";
    p.parse_method = ParseMethod::rule_based;
    auto cand = candidate_full();
    cand.year.reset();
    cand.venue.reset();
    const auto match = match_with(cand, 50.0, MatchMethod::title_search);
    const std::string prompt = render_verifier_prompt(p, raw_of("raw"), match);
    CHECK(prompt.find("- Year: N/A") != std::string::npos);
    CHECK(prompt.find("- Authors: N/A") != std::string::npos);
    CHECK(prompt.find("Year: N/A") != std::string::npos);
    CHECK(prompt.find("Venue: N/A") != std::string::npos);
}

TEST_CASE("prompt rendering is deterministic") {
    const auto match = match_with(candidate_full(), 87.5, MatchMethod::title_search);
    const auto raw = raw_of("[Virey, 2009, T](https://arxiv.org/abs/0804.0389)");
    CHECK(render_verifier_prompt(parsed_full(), raw, match) ==
          render_verifier_prompt(parsed_full(), raw, match));
}

TEST_CASE("rendering requires a candidate") {
    MatchResult not_found;
    CHECK_THROWS_AS(render_verifier_prompt(parsed_full(), raw_of("x"), not_found),
                    std::invalid_argument);
}

TEST_CASE("verify echoes a scripted structured verdict") {
    ScriptedVerifier backend;
    backend.enqueue(valid_verdict(9.5));
    const auto match = match_with(candidate_full(), 100.0, MatchMethod::title_search);
    const auto outcome = verify(parsed_full(), raw_of("r"), match, backend);
    REQUIRE(outcome.index() == 0);
    CHECK(std::get<0>(outcome).verdict.score == 9.5);
    CHECK(std::get<0>(outcome).warnings.empty());
}

TEST_CASE("out-of-range scores are clamped with a warning") {
    ScriptedVerifier backend;
    backend.enqueue(valid_verdict(12.0));
    const auto match = match_with(candidate_full(), 100.0, MatchMethod::title_search);
    const auto outcome = verify(parsed_full(), raw_of("r"), match, backend);
    REQUIRE(outcome.index() == 0);
    CHECK(std::get<0>(outcome).verdict.score == 10.0);
    REQUIRE(std::get<0>(outcome).warnings.size() == 1);
    CHECK(std::get<0>(outcome).warnings[0].find("clamped") != std::string::npos);
}

TEST_CASE("schema-invalid output is retried once, then surfaces an error") {
    ScriptedVerifier retry_ok;
    retry_ok.enqueue(nlohmann::json{{"score", 5.0}});  // missing fields
    retry_ok.enqueue(valid_verdict(6.0));
    const auto match = match_with(candidate_full(), 100.0, MatchMethod::title_search);
    auto outcome = verify(parsed_full(), raw_of("r"), match, retry_ok);
    REQUIRE(outcome.index() == 0);
    CHECK(std::get<0>(outcome).verdict.score == 6.0);
    CHECK(retry_ok.calls() == 2);

    ScriptedVerifier always_bad;
    always_bad.enqueue(nlohmann::json{{"bogus", 1}});
    always_bad.enqueue(nlohmann::json{{"classification", "exact_match"}});
    outcome = verify(parsed_full(), raw_of("r"), match, always_bad);
    REQUIRE(outcome.index() == 1);
    CHECK(always_bad.calls() == 2);
}

TEST_CASE("verdict schema is strict about enum values") {
    ScriptedVerifier backend;
    auto bad = valid_verdict(5.0);
    bad["classification"] = "sort_of_ok";
    backend.enqueue(bad);
    backend.enqueue_error("down");
    const auto match = match_with(candidate_full(), 100.0, MatchMethod::title_search);
    const auto outcome = verify(parsed_full(), raw_of("r"), match, backend);
    CHECK(outcome.index() == 1);
}

TEST_CASE("is_suspicious: identifier-based source and low similarity") {
    SuspicionConfig cfg;  // gate 70
    auto arxiv_low = match_with(candidate_full(), 30.0, MatchMethod::arxiv_id_lookup);
    CHECK(is_suspicious(arxiv_low, cfg));

    auto crossref_low = match_with(candidate_full(), 30.0, MatchMethod::title_search);
    CHECK_FALSE(is_suspicious(crossref_low, cfg));

    auto web_high = match_with(candidate_full(), 95.0, MatchMethod::web_search);
    CHECK_FALSE(is_suspicious(web_high, cfg));

    auto web_low = match_with(candidate_full(), 69.9, MatchMethod::web_search);
    CHECK(is_suspicious(web_low, cfg));

    MatchResult none;
    CHECK_FALSE(is_suspicious(none, cfg));
}

TEST_CASE("representative scores sit inside the label's threshold interval") {
    const Thresholds t{1.25, 7.25};
    CHECK(representative_score(Label::exact, t) == doctest::Approx(8.625));
    CHECK(representative_score(Label::minor, t) == doctest::Approx(4.25));
    CHECK(representative_score(Label::major, t) == doctest::Approx(0.625));
}

TEST_CASE("review agreement keeps the first-pass verdict") {
    ScriptedVerifier backend;
    backend.enqueue(nlohmann::json{{"classification", "exact_match"}, {"reasoning", "agree"}});
    VerifierVerdict first;
    first.score = 9.0;
    first.classification = VerdictClass::exact_match;
    const auto match = match_with(candidate_full(), 30.0, MatchMethod::arxiv_id_lookup);
    const auto outcome = review("raw text", parsed_full(), match, first, Label::exact,
                                Thresholds{1.25, 7.25}, backend);
    CHECK_FALSE(outcome.overrode);
    CHECK(outcome.final_label == Label::exact);
    CHECK(outcome.final_score == 9.0);
    CHECK_FALSE(outcome.backend_failed);
}

TEST_CASE("review override remaps to the representative score") {
    ScriptedVerifier backend;
    backend.enqueue(
        nlohmann::json{{"classification", "major_hallucination"}, {"reasoning", "wrong paper"}});
    VerifierVerdict first;
    first.score = 9.0;
    const auto match = match_with(candidate_full(), 30.0, MatchMethod::arxiv_id_lookup);
    const auto outcome = review("raw text", parsed_full(), match, first, Label::exact,
                                Thresholds{1.25, 7.25}, backend);
    CHECK(outcome.overrode);
    CHECK(outcome.final_label == Label::major);
    CHECK(outcome.final_score == doctest::Approx(0.625));
    CHECK(outcome.reviewer_reasoning == "wrong paper");
}

TEST_CASE("reviewer failure leaves the first pass standing") {
    ScriptedVerifier broken;
    broken.enqueue_error("api down");
    VerifierVerdict first;
    first.score = 9.0;
    const auto match = match_with(candidate_full(), 30.0, MatchMethod::arxiv_id_lookup);
    const auto outcome = review("raw", parsed_full(), match, first, Label::exact,
                                Thresholds{1.25, 7.25}, broken);
    CHECK_FALSE(outcome.overrode);
    CHECK(outcome.final_label == Label::exact);
    CHECK(outcome.final_score == 9.0);
    CHECK(outcome.backend_failed);
}

TEST_CASE("reviewer malformed output leaves the first pass standing") {
    for (auto bad : {nlohmann::json{{"classification", "maybe"}},
                     nlohmann::json{{"reasoning", "no class"}}, nlohmann::json{}}) {
        ScriptedVerifier backend;
        backend.enqueue(bad);
        VerifierVerdict first;
        first.score = 9.0;
        const auto match = match_with(candidate_full(), 30.0, MatchMethod::arxiv_id_lookup);
        const auto outcome = review("raw", parsed_full(), match, first, Label::exact,
                                    Thresholds{1.25, 7.25}, backend);
        CHECK_FALSE(outcome.overrode);
        CHECK(outcome.final_label == Label::exact);
        CHECK(outcome.backend_failed);
    }
}

// ---------------------------------------------------------------------------
// Rule-based verifier: scores frozen from the penalty table (base
// similarity/10; year off <=2 years -3, farther -5.5; author mismatch -3;
// identifier mismatch -3; equal identifiers lift a low-similarity score to
// at least 8.5).
// ---------------------------------------------------------------------------

TEST_CASE("rule-based verifier: identical citation and candidate score 10") {
    RuleBasedVerifier backend;
    const auto match = match_with(candidate_full(), 100.0, MatchMethod::arxiv_id_lookup);
    const auto outcome = verify(parsed_full(), raw_of("raw"), match, backend);
    REQUIRE(outcome.index() == 0);
    CHECK(std::get<0>(outcome).verdict.score == doctest::Approx(10.0));
    CHECK(std::get<0>(outcome).verdict.classification == VerdictClass::exact_match);
}

TEST_CASE("rule-based verifier: single-field corruptions land in the minor band") {
    RuleBasedVerifier backend;

    // year off by one: 10 - 3 = 7
    auto parsed = parsed_full();
    parsed.year = 2008;
    auto match = match_with(candidate_full(), 100.0, MatchMethod::title_search);
    auto outcome = verify(parsed, raw_of("r"), match, backend);
    REQUIRE(outcome.index() == 0);
    CHECK(std::get<0>(outcome).verdict.score == doctest::Approx(7.0));
    CHECK(std::get<0>(outcome).verdict.classification == VerdictClass::minor_hallucination);
    REQUIRE(std::get<0>(outcome).verdict.key_differences.size() == 1);
    CHECK(std::get<0>(outcome).verdict.key_differences[0].find("year") != std::string::npos);

    // author swap: 10 - 3 = 7
    parsed = parsed_full();
    parsed.authors = "Johnson";
    outcome = verify(parsed, raw_of("r"), match, backend);
    REQUIRE(outcome.index() == 0);
    CHECK(std::get<0>(outcome).verdict.score == doctest::Approx(7.0));

    // identifier digit flip: 10 - 3 = 7 (url carries the same flip so only
    // one identifier penalty applies)
    parsed = parsed_full();
    parsed.arxiv_id = "0804.0390";
    parsed.url = "https://arxiv.org/abs/0804.0390";
    outcome = verify(parsed, raw_of("r"), match, backend);
    REQUIRE(outcome.index() == 0);
    CHECK(std::get<0>(outcome).verdict.score == doctest::Approx(7.0));
}

TEST_CASE("rule-based verifier: two corrupted fields, still recognizably the same paper") {
    RuleBasedVerifier backend;
    auto parsed = parsed_full();
    parsed.year = 2008;
    parsed.authors = "Completely Different";
    const auto match = match_with(candidate_full(), 100.0, MatchMethod::title_search);
    const auto outcome = verify(parsed, raw_of("r"), match, backend);
    REQUIRE(outcome.index() == 0);
    CHECK(std::get<0>(outcome).verdict.score == doctest::Approx(4.0));
    CHECK(std::get<0>(outcome).verdict.classification == VerdictClass::minor_hallucination);
}

TEST_CASE("rule-based verifier: a distant year costs more") {
    RuleBasedVerifier backend;
    auto parsed = parsed_full();
    parsed.year = 2004;  // five years off
    const auto match = match_with(candidate_full(), 100.0, MatchMethod::title_search);
    const auto outcome = verify(parsed, raw_of("r"), match, backend);
    REQUIRE(outcome.index() == 0);
    CHECK(std::get<0>(outcome).verdict.score == doctest::Approx(4.5));
}

TEST_CASE("rule-based verifier: et al. is not an author mismatch") {
    RuleBasedVerifier backend;
    auto parsed = parsed_full();
    parsed.authors = "Virey et al.";
    auto cand = candidate_full();
    cand.authors = "Virey, Ealet, Tilquin";
    const auto match = match_with(cand, 100.0, MatchMethod::title_search);
    const auto outcome = verify(parsed, raw_of("r"), match, backend);
    REQUIRE(outcome.index() == 0);
    CHECK(std::get<0>(outcome).verdict.score == doctest::Approx(10.0));
}

TEST_CASE("rule-based verifier: matching identifier lifts a low-similarity case") {
    RuleBasedVerifier backend;
    ParsedCitation parsed;
    parsed.authors = "Fabricated Person";
    parsed.year = 2018;
    parsed.title = "A Fabricated Title About Unrelated Physics";
    parsed.arxiv_id = "1301.3781";
    parsed.url = "https://arxiv.org/abs/1301.3781";
    parsed.parse_method = ParseMethod::rule_based;

    CandidatePublication cand;
    cand.title = "The Real Paper Behind That Identifier";
    cand.authors = "Actual Author";
    cand.year = 2013;
    cand.arxiv_id = "1301.3781";
    cand.url = "https://arxiv.org/abs/1301.3781";
    cand.source = Source::arxiv;
    cand.confidence = 95.0;

    const auto match = match_with(cand, 20.0, MatchMethod::arxiv_id_lookup);
    const auto outcome = verify(parsed, raw_of("r"), match, backend);
    REQUIRE(outcome.index() == 0);
    // over-trusts the identifier: the reviewer pass exists to catch this
    CHECK(std::get<0>(outcome).verdict.score == doctest::Approx(8.5));
    CHECK(std::get<0>(outcome).verdict.classification == VerdictClass::exact_match);

    // the rule-based reviewer re-judges from the raw text and overrides
    const std::string raw_text =
        "[Fabricated Person, 2018, A Fabricated Title About Unrelated "
        "Physics](https://arxiv.org/abs/1301.3781)";
    const auto first = std::get<0>(outcome).verdict;
    const auto review_outcome = review(raw_text, parsed, match, first, Label::exact,
                                       Thresholds{1.25, 7.25}, backend);
    CHECK(review_outcome.overrode);
    CHECK(review_outcome.final_label == Label::major);
    CHECK(review_outcome.final_score == doctest::Approx(0.625));
}

TEST_CASE("rule-based reviewer agrees when similarity clears the gate") {
    RuleBasedVerifier backend;
    VerifierVerdict first;
    first.score = 7.0;
    first.classification = VerdictClass::minor_hallucination;
    first.reasoning = "minor drift";
    const auto match = match_with(candidate_full(), 95.0, MatchMethod::web_search);
    const auto outcome =
        review("[Virey, 2009, Determination of the dark energy equation of "
               "state](https://arxiv.org/abs/0804.0389)",
               parsed_full(), match, first, Label::minor, Thresholds{1.25, 7.25}, backend);
    CHECK_FALSE(outcome.overrode);
    CHECK(outcome.final_label == Label::minor);
}
