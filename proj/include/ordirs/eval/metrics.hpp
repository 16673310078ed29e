#pragma once

#include <string>
#include <vector>

#include "ordirs/dt/types.hpp"

namespace ordirs::eval {

/// Mean of the per-frame IoUs. A frame where both masks are empty scores 1.0.
/// Throws InputError when the sequences differ in length or are empty.
double g_iou(const std::vector<dt::RleMask>& predicted,
             const std::vector<dt::RleMask>& truth);

/// Cumulative IoU: total intersection pixels over total union pixels across
/// all frames, 1.0 when the total union is zero. Same preconditions.
double c_iou(const std::vector<dt::RleMask>& predicted,
             const std::vector<dt::RleMask>& truth);

/// Mean and sample standard deviation (n - 1 denominator; zero when n < 2).
struct Aggregate {
    double mean = 0.0;
    double std = 0.0;
    std::size_t count = 0;
};

Aggregate aggregate(const std::vector<double>& values);

/// Renders an aggregate already scaled to percentage points, two decimals on
/// both sides: "75.80±3.58".
std::string format_mean_std(const Aggregate& agg);

}  // namespace ordirs::eval
