#include "hyperseg/metrics.hpp"

#include <algorithm>
#include <map>
#include <tuple>

#include "hyperseg/errors.hpp"

namespace hyperseg {

SegmentationMetrics compare_labels(const LabelImage& predicted, const LabelImage& truth) {
    if (predicted.width() != truth.width() || predicted.height() != truth.height()) {
        throw DataError("compare_labels: label grids differ");
    }
    const std::size_t total = predicted.size();

    std::map<std::pair<std::int32_t, std::int32_t>, std::size_t> overlap;
    std::map<std::int32_t, std::size_t> pred_sizes;
    std::map<std::int32_t, std::size_t> truth_sizes;
    for (std::size_t i = 0; i < total; ++i) {
        const std::int32_t p = predicted.data()[i];
        const std::int32_t t = truth.data()[i];
        ++overlap[{p, t}];
        ++pred_sizes[p];
        ++truth_sizes[t];
    }

    // Greedy one-to-one matching by overlap, largest first; ties resolve by
    // (predicted, truth) label order.
    std::vector<std::tuple<std::size_t, std::int32_t, std::int32_t>> pairs;
    for (const auto& [key, count] : overlap) {
        pairs.push_back({count, key.first, key.second});
    }
    std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
        if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
        if (std::get<1>(a) != std::get<1>(b)) return std::get<1>(a) < std::get<1>(b);
        return std::get<2>(a) < std::get<2>(b);
    });

    std::map<std::int32_t, std::int32_t> truth_to_pred;
    std::map<std::int32_t, bool> pred_used;
    for (const auto& [count, p, t] : pairs) {
        if (truth_to_pred.count(t) || pred_used[p]) continue;
        truth_to_pred[t] = p;
        pred_used[p] = true;
    }

    SegmentationMetrics metrics;
    std::size_t matched = 0;
    double f1_sum = 0.0;
    for (const auto& [t, t_size] : truth_sizes) {
        ClassScore score;
        score.truth_label = t;
        score.truth_size = t_size;
        const auto it = truth_to_pred.find(t);
        if (it != truth_to_pred.end()) {
            const std::int32_t p = it->second;
            score.matched_label = p;
            const std::size_t inter = overlap[{p, t}];
            matched += inter;
            score.precision = static_cast<double>(inter) / pred_sizes[p];
            score.recall = static_cast<double>(inter) / t_size;
            if (score.precision + score.recall > 0.0) {
                score.f1 = 2.0 * score.precision * score.recall /
                           (score.precision + score.recall);
            }
        }
        f1_sum += score.f1;
        metrics.classes.push_back(score);
    }
    metrics.micro_f1 = static_cast<double>(matched) / total;
    metrics.macro_f1 = truth_sizes.empty() ? 0.0 : f1_sum / truth_sizes.size();

    const std::int32_t max_pred = predicted.max_label();
    metrics.predicted_sizes.assign(static_cast<std::size_t>(max_pred) + 1, 0);
    for (const auto& [p, size] : pred_sizes) {
        if (p >= 0) metrics.predicted_sizes[static_cast<std::size_t>(p)] = size;
    }
    return metrics;
}

} // namespace hyperseg
