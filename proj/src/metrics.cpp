#include "ordirs/eval/metrics.hpp"

#include <cmath>
#include <cstdio>

#include "ordirs/errors.hpp"
#include "ordirs/spatial/mask_ops.hpp"

namespace ordirs::eval {

namespace {

void check_lengths(const std::vector<dt::RleMask>& predicted,
                   const std::vector<dt::RleMask>& truth) {
    if (predicted.size() != truth.size())
        throw InputError("metric inputs differ in length: " +
                         std::to_string(predicted.size()) + " vs " +
                         std::to_string(truth.size()));
    if (predicted.empty())
        throw InputError("metrics need at least one frame");
}

}  // namespace

double g_iou(const std::vector<dt::RleMask>& predicted,
             const std::vector<dt::RleMask>& truth) {
    check_lengths(predicted, truth);
    double total = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i)
        total += spatial::mask_iou(predicted[i], truth[i]);
    return total / static_cast<double>(predicted.size());
}

double c_iou(const std::vector<dt::RleMask>& predicted,
             const std::vector<dt::RleMask>& truth) {
    check_lengths(predicted, truth);
    std::int64_t intersection = 0;
    std::int64_t union_ = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        auto [inter, uni] = spatial::mask_intersection_union(predicted[i],
                                                             truth[i]);
        intersection += inter;
        union_ += uni;
    }
    if (union_ == 0) return 1.0;
    return static_cast<double>(intersection) / static_cast<double>(union_);
}

Aggregate aggregate(const std::vector<double>& values) {
    Aggregate agg;
    agg.count = values.size();
    if (values.empty()) return agg;
    double sum = 0.0;
    for (double v : values) sum += v;
    agg.mean = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
        double sq = 0.0;
        for (double v : values) sq += (v - agg.mean) * (v - agg.mean);
        agg.std = std::sqrt(sq / static_cast<double>(values.size() - 1));
    }
    return agg;
}

std::string format_mean_std(const Aggregate& agg) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f±%.2f", agg.mean, agg.std);
    return buf;
}

}  // namespace ordirs::eval
