#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "citegate/textnorm.hpp"
#include "support/oracles.hpp"

using namespace citegate;

namespace {

std::string random_title(std::mt19937& rng, std::size_t max_len) {
    static const std::string alphabet = "abcdefghij XYZ0123-:.{}\\&~";
    std::uniform_int_distribution<std::size_t> len(0, max_len);
    std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
    std::string out;
    const std::size_t n = len(rng);
    for (std::size_t i = 0; i < n; ++i) out.push_back(alphabet[pick(rng)]);
    return out;
}

}  // namespace

TEST_CASE("clean_text strips LaTeX and BibTeX artifacts") {
    CHECK(clean_text("{The} \\textit{Higgs} boson \\& friends~today") ==
          "The Higgs boson & friends today");
    CHECK(clean_text("") == "");
    CHECK(clean_text("plain title") == "plain title");
    CHECK(clean_text("\\emph{Dark} {Energy}") == "Dark Energy");
    CHECK(clean_text("a  \t b") == "a b");
    CHECK(clean_text("\\alpha decay") == "decay");
}

TEST_CASE("clean_text is idempotent") {
    std::mt19937 rng(424242);
    for (int i = 0; i < 500; ++i) {
        const std::string s = random_title(rng, 60);
        const std::string once = clean_text(s);
        CHECK(clean_text(once) == once);
    }
}

TEST_CASE("normalize_for_compare strips punctuation without replacement") {
    CHECK(normalize_for_compare("Dark-Energy: A Review!") == "darkenergy a review");
    CHECK(normalize_for_compare("ALready lower") == "already lower");
    CHECK(normalize_for_compare("  a   b ") == "a b");
    CHECK(normalize_for_compare("") == "");
}

TEST_CASE("normalize_for_compare is idempotent") {
    std::mt19937 rng(9);
    for (int i = 0; i < 500; ++i) {
        const std::string s = random_title(rng, 60);
        const std::string once = normalize_for_compare(s);
        CHECK(normalize_for_compare(once) == once);
    }
}

TEST_CASE("title_similarity basics") {
    CHECK(title_similarity("Quantum Error Correction", "quantum error correction!") == 100.0);
    CHECK(title_similarity("abc", "xyz") == 0.0);
    CHECK(title_similarity("", "") == 100.0);
    CHECK(title_similarity("", "nonempty") == 0.0);
    // frozen from the DP oracle: lev = 6 over max length 29
    const double sim =
        title_similarity("dark energy equation of state", "dark matter equation of state");
    CHECK(sim == doctest::Approx((1.0 - 6.0 / 29.0) * 100.0).epsilon(1e-12));
    CHECK(sim == oracle::title_similarity("dark energy equation of state",
                                          "dark matter equation of state"));
}

TEST_CASE("title_similarity equals the DP oracle on 1000 random pairs") {
    std::mt19937 rng(1000003);
    for (int i = 0; i < 1000; ++i) {
        const std::string a = random_title(rng, 40);
        const std::string b = random_title(rng, 40);
        CHECK(title_similarity(a, b) == oracle::title_similarity(a, b));
    }
}

TEST_CASE("similarity symmetry and range") {
    std::mt19937 rng(55);
    for (int i = 0; i < 300; ++i) {
        const std::string a = random_title(rng, 30);
        const std::string b = random_title(rng, 30);
        const double st = title_similarity(a, b);
        const double so = word_overlap(a, b);
        CHECK(st == title_similarity(b, a));
        CHECK(so == word_overlap(b, a));
        CHECK(st >= 0.0);
        CHECK(st <= 100.0);
        CHECK(so >= 0.0);
        CHECK(so <= 100.0);
    }
}

TEST_CASE("word_overlap basics") {
    CHECK(word_overlap("a b c", "a b c") == 100.0);
    CHECK(word_overlap("a b c", "x y z") == 0.0);
    CHECK(word_overlap("a b c", "a b d e") == doctest::Approx(50.0));
    CHECK(word_overlap("", "") == 100.0);
    CHECK(word_overlap("", "a") == 0.0);
    // duplicates collapse: sets, not multisets
    CHECK(word_overlap("a a a b", "a b") == 100.0);
}

TEST_CASE("word_overlap matches a set-arithmetic oracle on 200 random pairs") {
    std::mt19937 rng(20202);
    for (int i = 0; i < 200; ++i) {
        const std::string a = random_title(rng, 40);
        const std::string b = random_title(rng, 40);
        CHECK(word_overlap(a, b) == oracle::word_overlap(a, b));
    }
}

TEST_CASE("ranking_score adds year bonuses on top of the base similarity") {
    SimilarityConfig cfg;  // exact 10, near 5, window 2
    CandidatePublication cand;
    cand.title = "Same Title";
    cand.year = 2020;

    CHECK(ranking_score("Same Title", 2020, cand, RankingMode::levenshtein, cfg) ==
          doctest::Approx(110.0));
    CHECK(ranking_score("Same Title", std::nullopt, cand, RankingMode::levenshtein, cfg) ==
          doctest::Approx(100.0));
    CHECK(ranking_score("Same Title", 2022, cand, RankingMode::levenshtein, cfg) ==
          doctest::Approx(105.0));
    CHECK(ranking_score("Same Title", 2023, cand, RankingMode::levenshtein, cfg) ==
          doctest::Approx(100.0));
    cand.year.reset();
    CHECK(ranking_score("Same Title", 2020, cand, RankingMode::levenshtein, cfg) ==
          doctest::Approx(100.0));
}

TEST_CASE("ranking with year bonus orders same-base candidates by year distance") {
    SimilarityConfig cfg;
    CandidatePublication near, far;
    near.title = "a b c x";  // same overlap base vs query "a b c"
    far.title = "a b c y";
    near.year = 2020;
    far.year = 2023;
    const double s_near = ranking_score("a b c", 2020, near, RankingMode::overlap, cfg);
    const double s_far = ranking_score("a b c", 2020, far, RankingMode::overlap, cfg);
    CHECK(s_near > s_far);
    CHECK(s_near == doctest::Approx(75.0 + 10.0));
    CHECK(s_far == doctest::Approx(75.0));
}
