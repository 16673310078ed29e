#include "ordirs/spatial/mask_ops.hpp"

#include <algorithm>
#include <cmath>

#include "ordirs/errors.hpp"

namespace ordirs::spatial {

namespace {

/// Cursor over an RLE mask's runs, exposing (value, remaining) segments.
struct RunCursor {
    const std::vector<std::int64_t>& runs;
    std::size_t index = 0;
    std::int64_t remaining = 0;
    bool value = false;

    explicit RunCursor(const dt::RleMask& m) : runs(m.runs) {
        remaining = runs.empty() ? 0 : runs[0];
        value = false;
        skip_empty();
    }

    void skip_empty() {
        while (remaining == 0 && index + 1 < runs.size()) {
            ++index;
            remaining = runs[index];
            value = !value;
        }
    }

    void advance(std::int64_t n) {
        remaining -= n;
        skip_empty();
    }
};

void require_same_dims(const dt::RleMask& a, const dt::RleMask& b,
                       const char* op) {
    if (a.width != b.width || a.height != b.height) {
        throw InputError(std::string(op) + ": mask dimension mismatch (" +
                         std::to_string(a.width) + "x" + std::to_string(a.height) +
                         " vs " + std::to_string(b.width) + "x" +
                         std::to_string(b.height) + ")");
    }
}

/// Appends `len` pixels of `value` to a run list under construction.
struct RunBuilder {
    std::vector<std::int64_t> runs;
    bool current = false;
    bool started = false;

    void append(bool value, std::int64_t len) {
        if (len <= 0) return;
        if (!started) {
            if (value) runs.push_back(0);  // leading zero background run
            runs.push_back(len);
            current = value;
            started = true;
            return;
        }
        if (value == current) {
            runs.back() += len;
        } else {
            runs.push_back(len);
            current = value;
        }
    }
};

}  // namespace

std::pair<std::int64_t, std::int64_t> mask_intersection_union(
    const dt::RleMask& a, const dt::RleMask& b) {
    require_same_dims(a, b, "mask_intersection_union");
    const std::int64_t total = static_cast<std::int64_t>(a.width) * a.height;
    RunCursor ca(a), cb(b);
    std::int64_t covered = 0, inter = 0, uni = 0;
    while (covered < total) {
        std::int64_t step = std::min(ca.remaining, cb.remaining);
        if (step <= 0) {
            throw CorruptMaskError("mask run sum shorter than grid");
        }
        if (ca.value && cb.value) inter += step;
        if (ca.value || cb.value) uni += step;
        ca.advance(step);
        cb.advance(step);
        covered += step;
    }
    return {inter, uni};
}

double mask_iou(const dt::RleMask& a, const dt::RleMask& b) {
    auto [inter, uni] = mask_intersection_union(a, b);
    if (uni == 0) return 1.0;  // both empty
    return static_cast<double>(inter) / static_cast<double>(uni);
}

namespace {

dt::RleMask union_pair(const dt::RleMask& a, const dt::RleMask& b) {
    require_same_dims(a, b, "mask_union");
    const std::int64_t total = static_cast<std::int64_t>(a.width) * a.height;
    RunCursor ca(a), cb(b);
    RunBuilder builder;
    std::int64_t covered = 0;
    while (covered < total) {
        std::int64_t step = std::min(ca.remaining, cb.remaining);
        if (step <= 0) {
            throw CorruptMaskError("mask run sum shorter than grid");
        }
        builder.append(ca.value || cb.value, step);
        ca.advance(step);
        cb.advance(step);
        covered += step;
    }
    dt::RleMask out;
    out.width = a.width;
    out.height = a.height;
    out.runs = std::move(builder.runs);
    if (out.runs.empty()) out.runs.push_back(total);
    return out;
}

}  // namespace

dt::RleMask mask_union(const std::vector<dt::RleMask>& masks, int width,
                       int height) {
    if (width <= 0 || height <= 0) {
        throw InputError("mask_union: dimensions must be positive");
    }
    dt::RleMask acc;
    acc.width = width;
    acc.height = height;
    acc.runs = {static_cast<std::int64_t>(width) * height};
    for (const auto& m : masks) acc = union_pair(acc, m);
    return acc;
}

std::pair<double, double> centroid(const dt::RleMask& mask) {
    if (mask.width <= 0 || mask.height <= 0) {
        throw InputError("centroid: invalid mask dimensions");
    }
    std::int64_t count = 0;
    double sum_x = 0.0, sum_y = 0.0;
    std::int64_t pos = 0;
    bool value = false;
    for (std::int64_t run : mask.runs) {
        if (value && run > 0) {
            // Split the run at row boundaries; each row segment is an
            // arithmetic series of column centers.
            std::int64_t p = pos;
            std::int64_t remaining = run;
            while (remaining > 0) {
                std::int64_t row = p / mask.width;
                std::int64_t col = p % mask.width;
                std::int64_t seg = std::min<std::int64_t>(remaining,
                                                          mask.width - col);
                double first_center = static_cast<double>(col) + 0.5;
                double last_center = static_cast<double>(col + seg - 1) + 0.5;
                sum_x += 0.5 * (first_center + last_center) *
                         static_cast<double>(seg);
                sum_y += (static_cast<double>(row) + 0.5) *
                         static_cast<double>(seg);
                p += seg;
                remaining -= seg;
            }
            count += run;
        }
        pos += run;
        value = !value;
    }
    if (count == 0) throw InputError("centroid: empty mask");
    return {sum_x / static_cast<double>(count),
            sum_y / static_cast<double>(count)};
}

dt::DepthStats depth_stats_for_mask(const img::DepthMap& depth_map,
                                    const dt::RleMask& mask) {
    if (depth_map.width != mask.width || depth_map.height != mask.height) {
        throw InputError("depth_stats_for_mask: dimension mismatch");
    }
    std::int64_t count = 0;
    double sum = 0.0, sum_sq = 0.0;
    std::int64_t pos = 0;
    bool value = false;
    for (std::int64_t run : mask.runs) {
        if (value) {
            for (std::int64_t p = pos; p < pos + run; ++p) {
                double v = static_cast<double>(depth_map.values[
                    static_cast<std::size_t>(p)]);
                sum += v;
                sum_sq += v * v;
            }
            count += run;
        }
        pos += run;
        value = !value;
    }
    if (count == 0) throw InputError("depth_stats_for_mask: empty mask");

    double n = static_cast<double>(count);
    double mean = sum / n;
    double variance = sum_sq / n - mean * mean;
    if (variance < 0.0) variance = 0.0;  // numeric guard
    dt::DepthStats stats;
    stats.mean = mean;
    stats.std = count == 1 ? 0.0 : std::sqrt(variance);
    stats.pixel_count = count;
    return stats;
}

}  // namespace ordirs::spatial
