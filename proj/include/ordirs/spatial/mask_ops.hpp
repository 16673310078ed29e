#pragma once

#include <utility>
#include <vector>

#include "ordirs/dt/types.hpp"
#include "ordirs/image.hpp"

namespace ordirs::spatial {

/// Intersection over union of two same-sized masks. Defined as 1.0 when both
/// are empty. Throws InputError on dimension mismatch.
double mask_iou(const dt::RleMask& a, const dt::RleMask& b);

/// Foreground intersection and union pixel counts, the raw numbers behind
/// IoU and the cumulative metrics.
std::pair<std::int64_t, std::int64_t> mask_intersection_union(
    const dt::RleMask& a, const dt::RleMask& b);

/// Pixel-wise OR of the masks. An empty sequence yields the all-zero mask of
/// the given dimensions.
dt::RleMask mask_union(const std::vector<dt::RleMask>& masks, int width,
                       int height);

/// Arithmetic mean of member pixel centers; pixel (row, col) has center
/// (col + 0.5, row + 0.5). Throws InputError on an empty mask.
std::pair<double, double> centroid(const dt::RleMask& mask);

/// Mean and population standard deviation of the depth map restricted to the
/// mask's foreground pixels. Throws InputError on an empty mask or a
/// dimension mismatch.
dt::DepthStats depth_stats_for_mask(const img::DepthMap& depth_map,
                                    const dt::RleMask& mask);

}  // namespace ordirs::spatial
