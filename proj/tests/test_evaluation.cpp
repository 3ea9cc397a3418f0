#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "citegate/evaluation.hpp"
#include "support/oracles.hpp"

using namespace citegate;
using L = Label;

namespace {

RunLatency run_with(std::initializer_list<std::tuple<Source, bool, int>> stages,
                    std::optional<Label> gold = std::nullopt) {
    RunLatency run;
    for (const auto& [source, attempted, ms] : stages) {
        StageRecord rec;
        rec.stage = source;
        rec.attempted = attempted;
        rec.elapsed = Millis{ms};
        run.stages.push_back(rec);
    }
    run.gold = gold;
    return run;
}

}  // namespace

TEST_CASE("perfect predictions score 1.0 everywhere") {
    const std::vector<L> labels{L::exact, L::minor, L::major, L::exact};
    const auto report = compute_metrics(labels, labels);
    CHECK(report.accuracy == 1.0);
    CHECK(report.macro_f1 == doctest::Approx(1.0));
    for (L l : {L::exact, L::minor, L::major}) {
        CHECK(report.per_class_f1.at(l) == doctest::Approx(1.0));
    }
}

TEST_CASE("nine-example confusion fixture reproduces hand-computed values") {
    const std::vector<L> gold{L::exact, L::exact, L::exact, L::minor, L::minor,
                              L::minor, L::major, L::major, L::major};
    const std::vector<L> preds{L::exact, L::exact, L::minor, L::minor, L::major,
                               L::exact, L::major, L::major, L::minor};
    const auto report = compute_metrics(preds, gold);
    CHECK(report.n == 9);
    CHECK(report.accuracy == doctest::Approx(5.0 / 9.0).epsilon(1e-12));
    CHECK(report.per_class_f1.at(L::exact) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(report.per_class_f1.at(L::minor) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(report.per_class_f1.at(L::major) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(report.macro_f1 == doctest::Approx(5.0 / 9.0).epsilon(1e-12));
    // rows gold, cols pred, order major/minor/exact
    CHECK(report.confusion[0][0] == 2);
    CHECK(report.confusion[0][1] == 1);
    CHECK(report.confusion[0][2] == 0);
    CHECK(report.confusion[1][0] == 1);
    CHECK(report.confusion[1][1] == 1);
    CHECK(report.confusion[1][2] == 1);
    CHECK(report.confusion[2][0] == 0);
    CHECK(report.confusion[2][1] == 1);
    CHECK(report.confusion[2][2] == 2);
}

TEST_CASE("macro-F1 is the unweighted mean of per-class F1 to 1e-12") {
    std::mt19937 rng(808);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<L> gold, preds;
        const std::size_t n = 1 + rng() % 60;
        for (std::size_t i = 0; i < n; ++i) {
            gold.push_back(static_cast<L>(rng() % 3));
            preds.push_back(static_cast<L>(rng() % 3));
        }
        const auto report = compute_metrics(preds, gold);
        const double mean = (report.per_class_f1.at(L::major) +
                             report.per_class_f1.at(L::minor) +
                             report.per_class_f1.at(L::exact)) /
                            3.0;
        CHECK(std::abs(report.macro_f1 - mean) <= 1e-12);
        // accuracy = trace / n
        const double trace = static_cast<double>(
            report.confusion[0][0] + report.confusion[1][1] + report.confusion[2][2]);
        CHECK(report.accuracy == doctest::Approx(trace / static_cast<double>(n)));
    }
}

TEST_CASE("permutation invariance over example order") {
    std::mt19937 rng(31);
    std::vector<L> gold, preds;
    for (int i = 0; i < 40; ++i) {
        gold.push_back(static_cast<L>(rng() % 3));
        preds.push_back(static_cast<L>(rng() % 3));
    }
    const auto base = compute_metrics(preds, gold);
    std::vector<std::size_t> order(gold.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<L> gold2, preds2;
    for (std::size_t i : order) {
        gold2.push_back(gold[i]);
        preds2.push_back(preds[i]);
    }
    const auto shuffled = compute_metrics(preds2, gold2);
    CHECK(base.accuracy == shuffled.accuracy);
    CHECK(base.macro_f1 == shuffled.macro_f1);
    CHECK(base.confusion == shuffled.confusion);
}

TEST_CASE("empty classes contribute zero F1 to the macro mean") {
    const std::vector<L> gold{L::major, L::major, L::minor};
    const std::vector<L> preds{L::major, L::major, L::minor};
    const auto report = compute_metrics(preds, gold);
    CHECK(report.per_class_f1.at(L::exact) == 0.0);
    CHECK(report.macro_f1 == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("input validation") {
    CHECK_THROWS_AS(compute_metrics({L::exact}, {}), std::invalid_argument);
    CHECK_THROWS_AS(compute_metrics({}, {}), std::invalid_argument);
}

TEST_CASE("latency: reach, conditional mean, expected contribution") {
    std::vector<RunLatency> runs{
        run_with({{Source::crossref, true, 1000}}),
        run_with({{Source::crossref, true, 3000}}),
        run_with({{Source::crossref, false, 0}}),
        run_with({{Source::crossref, false, 0}}),
    };
    const auto stats = aggregate_latency(runs);
    const auto& stage = stats.per_stage.at(Source::crossref);
    CHECK(stage.reach_rate == doctest::Approx(0.5));
    REQUIRE(stage.conditional.has_value());
    CHECK(stage.conditional->mean == doctest::Approx(2000.0));
    CHECK(stage.expected_contribution == doctest::Approx(1000.0));
}

TEST_CASE("latency: no attempts means zero reach and absent conditionals") {
    std::vector<RunLatency> runs{run_with({{Source::web_search, false, 0}})};
    const auto stats = aggregate_latency(runs);
    const auto& stage = stats.per_stage.at(Source::web_search);
    CHECK(stage.reach_rate == 0.0);
    CHECK_FALSE(stage.conditional.has_value());
    CHECK(stage.expected_contribution == 0.0);
}

TEST_CASE("error-flagged runs are excluded from aggregation") {
    auto errored = run_with({{Source::crossref, true, 99999}});
    errored.stages[0].error = "timeout";
    std::vector<RunLatency> runs{errored, run_with({{Source::crossref, true, 100}})};
    const auto stats = aggregate_latency(runs);
    CHECK(stats.runs_aggregated == 1);
    CHECK(stats.runs_excluded == 1);
    CHECK(stats.per_stage.at(Source::crossref).conditional->mean == doctest::Approx(100.0));
}

TEST_CASE("nearest-rank percentiles and median") {
    std::vector<RunLatency> runs;
    for (int i = 1; i <= 100; ++i) {
        runs.push_back(run_with({{Source::arxiv, true, i}}));
    }
    const auto stats = aggregate_latency(runs);
    const auto& cond = stats.per_stage.at(Source::arxiv).conditional;
    REQUIRE(cond.has_value());
    CHECK(cond->p95 == doctest::Approx(95.0));
    CHECK(cond->p99 == doctest::Approx(99.0));
    CHECK(cond->max == doctest::Approx(100.0));
    CHECK(cond->median == doctest::Approx(50.5));  // even count: midpoint

    std::vector<RunLatency> four;
    for (int ms : {10, 20, 30, 40}) four.push_back(run_with({{Source::arxiv, true, ms}}));
    const auto s4 = aggregate_latency(four);
    CHECK(s4.per_stage.at(Source::arxiv).conditional->p95 == doctest::Approx(40.0));
    CHECK(s4.per_stage.at(Source::arxiv).conditional->median == doctest::Approx(25.0));
}

TEST_CASE("100 synthetic runs match the naive reference aggregator") {
    std::mt19937 rng(606);
    std::vector<RunLatency> runs;
    for (int i = 0; i < 100; ++i) {
        RunLatency run;
        for (Source s : {Source::arxiv, Source::crossref, Source::semantic_scholar,
                         Source::openalex, Source::web_search}) {
            StageRecord rec;
            rec.stage = s;
            rec.attempted = rng() % 3 != 0;
            if (rec.attempted) rec.elapsed = Millis{static_cast<int>(rng() % 5000)};
            if (rec.attempted && rng() % 20 == 0) rec.error = "transport";
            run.stages.push_back(rec);
        }
        runs.push_back(run);
    }
    const auto stats = aggregate_latency(runs);
    const auto ref = oracle::latency_reference(runs);
    for (const auto& [source, stage] : stats.per_stage) {
        const auto it = ref.find(source);
        const double ref_reach = it == ref.end() ? 0.0 : it->second.reach;
        const double ref_mean = it == ref.end() ? 0.0 : it->second.cond_mean;
        const double ref_contribution = it == ref.end() ? 0.0 : it->second.contribution;
        CHECK(stage.reach_rate == doctest::Approx(ref_reach).epsilon(1e-12));
        if (stage.conditional.has_value()) {
            CHECK(stage.conditional->mean == doctest::Approx(ref_mean).epsilon(1e-12));
        }
        CHECK(stage.expected_contribution ==
              doctest::Approx(ref_contribution).epsilon(1e-12));
        // identity: contribution == reach * cond_mean
        const double cond_mean = stage.conditional.has_value() ? stage.conditional->mean : 0.0;
        CHECK(stage.expected_contribution == doctest::Approx(stage.reach_rate * cond_mean));
    }
}

TEST_CASE("per-class latency breakdown when gold labels are supplied") {
    std::vector<RunLatency> runs{
        run_with({{Source::crossref, true, 100}}, L::exact),
        run_with({{Source::crossref, true, 300}}, L::exact),
        run_with({{Source::crossref, true, 5000}}, L::major),
    };
    const auto stats = aggregate_latency(runs);
    REQUIRE(stats.per_class.count(L::exact) == 1);
    REQUIRE(stats.per_class.count(L::major) == 1);
    CHECK(stats.per_class.at(L::exact).mean == doctest::Approx(200.0));
    CHECK(stats.per_class.at(L::major).mean == doctest::Approx(5000.0));
    CHECK(stats.per_class.count(L::minor) == 0);
}

TEST_CASE("empty input yields empty stats") {
    const auto stats = aggregate_latency({});
    CHECK(stats.runs_aggregated == 0);
    CHECK(stats.overall.n == 0);
    CHECK(stats.per_stage.at(Source::crossref).reach_rate == 0.0);
}
