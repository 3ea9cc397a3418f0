#include "citegate/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace citegate {

EvalReport compute_metrics(const std::vector<Label>& preds, const std::vector<Label>& gold) {
    if (preds.size() != gold.size()) {
        throw std::invalid_argument("prediction/gold length mismatch");
    }
    if (preds.empty()) throw std::invalid_argument("empty inputs");

    EvalReport report;
    report.n = preds.size();
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const auto g = static_cast<std::size_t>(gold[i]);
        const auto p = static_cast<std::size_t>(preds[i]);
        ++report.confusion[g][p];
    }

    std::size_t correct = 0;
    double f1_sum = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
        const Label label = static_cast<Label>(k);
        std::size_t tp = report.confusion[k][k];
        std::size_t fp = 0, fn = 0;
        for (std::size_t other = 0; other < 3; ++other) {
            if (other == k) continue;
            fp += report.confusion[other][k];
            fn += report.confusion[k][other];
        }
        correct += tp;
        const double precision =
            tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
        const double recall =
            tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
        const double f1 =
            precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
        report.per_class_precision[label] = precision;
        report.per_class_recall[label] = recall;
        report.per_class_f1[label] = f1;
        f1_sum += f1;
    }
    report.macro_f1 = f1_sum / 3.0;
    report.accuracy = static_cast<double>(correct) / static_cast<double>(report.n);
    return report;
}

namespace {

double nearest_rank_percentile(const std::vector<double>& sorted, double pct) {
    if (sorted.empty()) return 0.0;
    const auto n = sorted.size();
    std::size_t rank = static_cast<std::size_t>(
        std::ceil(pct / 100.0 * static_cast<double>(n)));
    if (rank < 1) rank = 1;
    if (rank > n) rank = n;
    return sorted[rank - 1];
}

LatencySummary summarize(std::vector<double> values) {
    LatencySummary s;
    s.n = values.size();
    if (values.empty()) return s;
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    const std::size_t mid = values.size() / 2;
    s.median = values.size() % 2 == 1 ? values[mid] : (values[mid - 1] + values[mid]) / 2.0;
    s.p95 = nearest_rank_percentile(values, 95.0);
    s.p99 = nearest_rank_percentile(values, 99.0);
    s.max = values.back();
    double var = 0.0;
    for (double v : values) var += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(var / static_cast<double>(values.size()));
    return s;
}

}  // namespace

LatencyStats aggregate_latency(const std::vector<RunLatency>& runs) {
    LatencyStats stats;
    std::map<Source, std::vector<double>> stage_durations;
    std::map<Source, std::size_t> stage_attempts;
    std::vector<double> totals;
    std::map<Label, std::vector<double>> class_totals;

    for (const auto& run : runs) {
        const bool errored = std::any_of(run.stages.begin(), run.stages.end(),
                                         [](const StageRecord& r) { return r.error.has_value(); });
        if (errored) {
            ++stats.runs_excluded;
            continue;
        }
        ++stats.runs_aggregated;
        double total = 0.0;
        for (const auto& rec : run.stages) {
            if (!rec.attempted) continue;
            const double ms = static_cast<double>(rec.elapsed.count());
            ++stage_attempts[rec.stage];
            stage_durations[rec.stage].push_back(ms);
            total += ms;
        }
        totals.push_back(total);
        if (run.gold.has_value()) class_totals[*run.gold].push_back(total);
    }

    const auto n_runs = stats.runs_aggregated;
    for (Source s : {Source::arxiv, Source::crossref, Source::semantic_scholar,
                     Source::openalex, Source::web_search}) {
        StageLatency stage;
        const std::size_t attempts = stage_attempts.count(s) ? stage_attempts[s] : 0;
        if (n_runs > 0) {
            stage.reach_rate = static_cast<double>(attempts) / static_cast<double>(n_runs);
        }
        if (attempts > 0) {
            stage.conditional = summarize(stage_durations[s]);
            stage.expected_contribution = stage.reach_rate * stage.conditional->mean;
        }
        stats.per_stage[s] = stage;
    }
    stats.overall = summarize(std::move(totals));
    for (auto& [label, values] : class_totals) {
        stats.per_class[label] = summarize(std::move(values));
    }
    return stats;
}

}  // namespace citegate
