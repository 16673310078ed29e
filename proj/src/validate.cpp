#include "ordirs/dt/validate.hpp"

#include <cmath>
#include <set>

#include "ordirs/dt/rle.hpp"

namespace ordirs::dt {

namespace {

using namespace violation_code;

bool finite(double v) { return std::isfinite(v); }

std::string inst_path(std::size_t i, const char* field = nullptr) {
    std::string p = "instances[" + std::to_string(i) + "]";
    if (field) {
        p += '.';
        p += field;
    }
    return p;
}

/// True when any foreground pixel of the mask intersects the bbox region.
/// Pixel (row, col) covers [col, col+1) x [row, row+1).
bool mask_touches_bbox(const RleMask& mask, const BBox& box) {
    std::int64_t pos = 0;
    bool value = false;
    for (std::int64_t run : mask.runs) {
        if (value) {
            for (std::int64_t p = pos; p < pos + run; ++p) {
                double col = static_cast<double>(p % mask.width);
                double row = static_cast<double>(p / mask.width);
                if (col + 1.0 > box.x_min && col < box.x_max &&
                    row + 1.0 > box.y_min && row < box.y_max) {
                    return true;
                }
            }
        }
        pos += run;
        value = !value;
    }
    return false;
}

void validate_instance(const Instance& inst, std::size_t i, int frame_w,
                       int frame_h, ValidationReport& report) {
    const BBox& b = inst.bbox;
    bool bbox_ok = finite(b.x_min) && finite(b.y_min) && finite(b.x_max) &&
                   finite(b.y_max) && b.x_min < b.x_max && b.y_min < b.y_max;
    if (!bbox_ok) {
        report.push_back({BBOX_INVALID, inst_path(i, "bbox"),
                          "bbox must satisfy x_min < x_max and y_min < y_max"});
    } else if (b.x_min < 0.0 || b.y_min < 0.0 ||
               b.x_max > static_cast<double>(frame_w) ||
               b.y_max > static_cast<double>(frame_h)) {
        report.push_back({BBOX_OUT_OF_BOUNDS, inst_path(i, "bbox"),
                          "bbox exceeds frame bounds"});
    }

    if (!finite(inst.det_confidence) || inst.det_confidence < 0.0 ||
        inst.det_confidence > 1.0) {
        report.push_back({DET_CONFIDENCE_RANGE, inst_path(i, "det_confidence"),
                          "det_confidence must be in [0, 1]"});
    }
    if (!finite(inst.mask_confidence) || inst.mask_confidence < 0.0 ||
        inst.mask_confidence > 1.0) {
        report.push_back({MASK_CONFIDENCE_RANGE, inst_path(i, "mask_confidence"),
                          "mask_confidence must be in [0, 1]"});
    }

    const RleMask& m = inst.mask;
    bool dims_match = m.width == frame_w && m.height == frame_h;
    if (!dims_match) {
        report.push_back({MASK_DIM_MISMATCH, inst_path(i, "mask"),
                          "mask dimensions must equal frame dimensions"});
    }

    bool structure_ok = true;
    std::int64_t sum = 0;
    for (std::size_t r = 0; r < m.runs.size(); ++r) {
        if (m.runs[r] < 0 || (m.runs[r] == 0 && r != 0)) structure_ok = false;
        sum += m.runs[r] > 0 ? m.runs[r] : 0;
    }
    if (m.runs.empty()) structure_ok = false;
    if (!structure_ok) {
        report.push_back({RLE_STRUCTURE, inst_path(i, "mask"),
                          "runs must be non-negative with zero length only in "
                          "the first position"});
    }
    if (m.width > 0 && m.height > 0 &&
        sum != static_cast<std::int64_t>(m.width) * m.height) {
        report.push_back({RLE_SUM_MISMATCH, inst_path(i, "mask"),
                          "run sum must equal width * height"});
    }

    bool usable_mask = structure_ok && dims_match &&
                       sum == static_cast<std::int64_t>(m.width) * m.height;
    if (usable_mask) {
        if (m.area() == 0) {
            report.push_back(
                {MASK_EMPTY, inst_path(i, "mask"), "mask area must be > 0"});
        } else if (bbox_ok && !mask_touches_bbox(m, b)) {
            report.push_back({MASK_BBOX_DISJOINT, inst_path(i),
                              "mask does not overlap the bbox pixel region"});
        }
    }

    if (inst.depth) {
        const DepthStats& d = *inst.depth;
        if (!finite(d.mean) || d.mean < 0.0 || d.mean > 1.0) {
            report.push_back({DEPTH_MEAN_RANGE, inst_path(i, "depth.mean"),
                              "depth mean must be in [0, 1]"});
        }
        if (!finite(d.std) || d.std < 0.0) {
            report.push_back({DEPTH_STD_NEGATIVE, inst_path(i, "depth.std"),
                              "depth std must be >= 0"});
        }
        if (d.pixel_count <= 0) {
            report.push_back({DEPTH_PIXEL_COUNT, inst_path(i, "depth.pixel_count"),
                              "depth pixel_count must be positive"});
        } else if (d.pixel_count == 1 && d.std != 0.0) {
            report.push_back({DEPTH_STD_SINGLE_PIXEL, inst_path(i, "depth.std"),
                              "std must be 0 for a single-pixel mask"});
        }
    }
}

}  // namespace

ValidationReport validate_frame(const DtFrame& frame) {
    ValidationReport report;

    if (frame.width <= 0 || frame.height <= 0) {
        report.push_back({FRAME_DIM_INVALID, "frame",
                          "width and height must be positive"});
    }
    if (frame.frame_index < 0) {
        report.push_back({FRAME_INDEX_NEGATIVE, "frame_index",
                          "frame_index must be non-negative"});
    }
    if (!finite(frame.timestamp_ms) || frame.timestamp_ms < 0.0) {
        report.push_back({TIMESTAMP_NEGATIVE, "timestamp_ms",
                          "timestamp_ms must be non-negative"});
    }

    std::set<std::int64_t> seen_ids;
    for (std::size_t i = 0; i < frame.instances.size(); ++i) {
        const Instance& inst = frame.instances[i];
        if (!seen_ids.insert(inst.instance_id).second) {
            report.push_back({DUPLICATE_INSTANCE_ID, inst_path(i, "instance_id"),
                              "instance_id " + std::to_string(inst.instance_id) +
                                  " appears more than once"});
        }
        validate_instance(inst, i, frame.width, frame.height, report);
    }

    for (std::size_t i = 1; i < frame.instances.size(); ++i) {
        if (instance_order_less(frame.instances[i], frame.instances[i - 1])) {
            report.push_back(
                {INSTANCE_ORDER, inst_path(i),
                 "instances must be ordered by det_confidence descending, "
                 "ties by (x_min, y_min, instance_id)"});
        }
    }

    return report;
}

}  // namespace ordirs::dt
