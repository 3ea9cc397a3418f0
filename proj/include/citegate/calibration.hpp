#pragma once

#include <vector>

#include "citegate/model.hpp"

namespace citegate {

struct ScoredExample {
    double score = 0.0;  // 0..10
    Label gold = Label::exact;
};

// Deterministic piecewise mapping:
//   exact  when score >= tau_e
//   minor  when tau_m <= score < tau_e
//   major  when score < tau_m
// Throws std::invalid_argument for scores outside [0,10].
Label assign_label(double score, const Thresholds& t);

// Support-weighted F1 over the three classes: sum_c (support_c / N) * F1_c,
// with F1 = 0 for classes with zero precision+recall. Throws on length
// mismatch or empty input.
double support_weighted_f1(const std::vector<Label>& preds, const std::vector<Label>& gold);

struct CalibrationResult {
    Thresholds thresholds;
    double weighted_f1 = 0.0;
    double grid_step = 0.25;
    std::size_t pairs_evaluated = 0;
};

// Exhaustive sweep of both thresholds over [0,10] in `step` increments,
// restricted to tau_e >= tau_m (861 pairs at step 0.25), maximizing
// support-weighted F1 of assign_label against gold. Ties break toward the
// smallest tau_m, then the smallest tau_e. Throws on an empty dev set or a
// step that does not divide 10 evenly.
CalibrationResult calibrate(const std::vector<ScoredExample>& dev, double step = 0.25);

}  // namespace citegate
