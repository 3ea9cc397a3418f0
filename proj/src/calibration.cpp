#include "citegate/calibration.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace citegate {

Label assign_label(double score, const Thresholds& t) {
    if (!(score >= 0.0 && score <= 10.0)) {
        throw std::invalid_argument("score outside [0,10]");
    }
    if (score >= t.tau_e) return Label::exact;
    if (score >= t.tau_m) return Label::minor;
    return Label::major;
}

namespace {

struct ClassCounts {
    std::array<std::size_t, 3> tp{}, fp{}, fn{}, support{};
};

double weighted_f1_from_counts(const ClassCounts& c, std::size_t n) {
    double total = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
        const double tp = static_cast<double>(c.tp[k]);
        const double denom_p = tp + static_cast<double>(c.fp[k]);
        const double denom_r = tp + static_cast<double>(c.fn[k]);
        const double precision = denom_p > 0.0 ? tp / denom_p : 0.0;
        const double recall = denom_r > 0.0 ? tp / denom_r : 0.0;
        const double f1 =
            precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
        total += static_cast<double>(c.support[k]) / static_cast<double>(n) * f1;
    }
    return total;
}

}  // namespace

double support_weighted_f1(const std::vector<Label>& preds, const std::vector<Label>& gold) {
    if (preds.size() != gold.size()) {
        throw std::invalid_argument("prediction/gold length mismatch");
    }
    if (preds.empty()) throw std::invalid_argument("empty inputs");
    ClassCounts counts;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const auto p = static_cast<std::size_t>(preds[i]);
        const auto g = static_cast<std::size_t>(gold[i]);
        ++counts.support[g];
        if (p == g) {
            ++counts.tp[g];
        } else {
            ++counts.fp[p];
            ++counts.fn[g];
        }
    }
    return weighted_f1_from_counts(counts, preds.size());
}

CalibrationResult calibrate(const std::vector<ScoredExample>& dev, double step) {
    if (dev.empty()) throw std::invalid_argument("empty dev set");
    const double cells = 10.0 / step;
    const auto grid_n = static_cast<std::size_t>(std::llround(cells));
    if (grid_n == 0 || std::abs(cells - static_cast<double>(grid_n)) > 1e-9) {
        throw std::invalid_argument("step must divide 10 evenly");
    }

    CalibrationResult result;
    result.grid_step = step;
    bool have_best = false;
    for (std::size_t i = 0; i <= grid_n; ++i) {
        const double tau_m = static_cast<double>(i) * step;
        for (std::size_t j = i; j <= grid_n; ++j) {
            const double tau_e = static_cast<double>(j) * step;
            const Thresholds t{tau_m, tau_e};
            ClassCounts counts;
            for (const auto& ex : dev) {
                const auto p = static_cast<std::size_t>(assign_label(ex.score, t));
                const auto g = static_cast<std::size_t>(ex.gold);
                ++counts.support[g];
                if (p == g) {
                    ++counts.tp[g];
                } else {
                    ++counts.fp[p];
                    ++counts.fn[g];
                }
            }
            const double f1 = weighted_f1_from_counts(counts, dev.size());
            ++result.pairs_evaluated;
            // Strict improvement keeps the first maximizer: ascending tau_m,
            // then tau_e, realizes the smallest-pair tie-break.
            if (!have_best || f1 > result.weighted_f1) {
                have_best = true;
                result.weighted_f1 = f1;
                result.thresholds = t;
            }
        }
    }
    return result;
}

}  // namespace citegate
