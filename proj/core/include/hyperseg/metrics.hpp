#pragma once

#include <cstdint>
#include <vector>

#include "hyperseg/core_image.hpp"

namespace hyperseg {

struct ClassScore {
    std::int32_t truth_label = 0;
    std::int32_t matched_label = 0;    ///< 0 when unmatched
    std::size_t truth_size = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Per-pixel agreement between a predicted partition and a reference one.
/// Predicted labels are matched one-to-one to truth labels greedily by
/// overlap; micro_f1 is the matched-pixel fraction, macro_f1 the mean of the
/// per-class F1 scores.
struct SegmentationMetrics {
    double micro_f1 = 0.0;
    double macro_f1 = 0.0;
    std::vector<ClassScore> classes;
    std::vector<std::size_t> predicted_sizes;    ///< indexed by predicted label
};

SegmentationMetrics compare_labels(const LabelImage& predicted, const LabelImage& truth);

} // namespace hyperseg
