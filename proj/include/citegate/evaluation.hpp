#pragma once

#include <array>
#include <map>
#include <optional>
#include <vector>

#include "citegate/model.hpp"

namespace citegate {

// Classification report. Confusion rows are gold, columns are predictions,
// both in label order major/minor/exact.
struct EvalReport {
    std::map<Label, double> per_class_f1;
    std::map<Label, double> per_class_precision;
    std::map<Label, double> per_class_recall;
    double macro_f1 = 0.0;
    double accuracy = 0.0;
    std::array<std::array<std::size_t, 3>, 3> confusion{};
    std::size_t n = 0;
};

// Per-class precision/recall/F1 (empty classes score 0), macro-F1 as the
// unweighted mean over the three classes, accuracy, and the gold-by-pred
// confusion matrix. Throws on length mismatch or empty input.
EvalReport compute_metrics(const std::vector<Label>& preds, const std::vector<Label>& gold);

struct LatencySummary {
    double mean = 0.0;
    double median = 0.0;
    double p95 = 0.0;
    double p99 = 0.0;
    double max = 0.0;
    double stddev = 0.0;
    std::size_t n = 0;
};

struct StageLatency {
    double reach_rate = 0.0;  // fraction of runs that attempted the stage
    // Conditional stats over attempted runs only; absent when never reached.
    std::optional<LatencySummary> conditional;
    double expected_contribution = 0.0;  // reach_rate * cond_mean
};

struct LatencyStats {
    std::map<Source, StageLatency> per_stage;
    LatencySummary overall;  // per-run totals across all stages
    std::map<Label, LatencySummary> per_class;  // present when gold labels supplied
    std::size_t runs_aggregated = 0;
    std::size_t runs_excluded = 0;  // runs with source errors
};

struct RunLatency {
    std::vector<StageRecord> stages;
    std::optional<Label> gold;
};

// Aggregates stage traces across runs: reach rate per stage, conditional
// mean/median/P95/P99 over attempted runs, expected contribution, and an
// overall per-run summary. Runs containing any source error are excluded.
// Percentiles use the nearest-rank rule; the median is the conventional
// midpoint. Standard deviation is the population form.
LatencyStats aggregate_latency(const std::vector<RunLatency>& runs);

}  // namespace citegate
