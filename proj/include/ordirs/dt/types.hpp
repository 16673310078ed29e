#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ordirs::dt {

/// Axis-aligned box in continuous pixel coordinates, origin top-left.
struct BBox {
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 0.0;
    double y_max = 0.0;

    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }
    double area() const { return width() * height(); }
    double center_x() const { return 0.5 * (x_min + x_max); }
    double center_y() const { return 0.5 * (y_min + y_max); }

    bool operator==(const BBox&) const = default;
};

/// Row-major boolean raster, the uncompressed counterpart of RleMask.
struct BitGrid {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> cells;  // size = width * height, values 0 or 1

    BitGrid() = default;
    BitGrid(int w, int h)
        : width(w), height(h), cells(static_cast<std::size_t>(w) * h, 0) {}

    std::uint8_t at(int row, int col) const {
        return cells[static_cast<std::size_t>(row) * width + col];
    }
    void set(int row, int col, bool v) {
        cells[static_cast<std::size_t>(row) * width + col] = v ? 1 : 0;
    }

    bool operator==(const BitGrid&) const = default;
};

/// Run-length mask over row-major pixel order. Runs alternate between
/// background and foreground starting with background, so only runs[0] may
/// be zero (for masks that begin with a foreground pixel).
struct RleMask {
    int width = 0;
    int height = 0;
    std::vector<std::int64_t> runs;

    /// Foreground pixel count (sum of odd-indexed runs).
    std::int64_t area() const {
        std::int64_t a = 0;
        for (std::size_t i = 1; i < runs.size(); i += 2) a += runs[i];
        return a;
    }

    bool operator==(const RleMask&) const = default;
};

/// Normalized depth summary over one instance's mask pixels.
/// std is the population standard deviation.
struct DepthStats {
    double mean = 0.0;
    double std = 0.0;
    std::int64_t pixel_count = 0;

    bool operator==(const DepthStats&) const = default;
};

struct Instance {
    std::int64_t instance_id = 0;
    std::string label;
    BBox bbox;
    double det_confidence = 0.0;   // detector score, [0, 1]
    RleMask mask;
    double mask_confidence = 0.0;  // segmenter IoU estimate, [0, 1]
    std::string description;      // may be empty before captioning
    std::optional<DepthStats> depth;

    bool operator==(const Instance&) const = default;
};

/// One video frame's structured twin record.
struct DtFrame {
    std::string video_id;
    std::int64_t frame_index = 0;
    double timestamp_ms = 0.0;
    int width = 0;
    int height = 0;
    std::vector<Instance> instances;
    std::optional<std::string> depth_map_ref;  // path relative to the stream file
    std::map<std::string, std::string> producer;

    const Instance* find_instance(std::int64_t id) const {
        for (const auto& inst : instances) {
            if (inst.instance_id == id) return &inst;
        }
        return nullptr;
    }

    bool operator==(const DtFrame&) const = default;
};

/// Normative ordering for instances within a frame: detector confidence
/// descending, ties broken by (x_min, y_min, instance_id) ascending.
inline bool instance_order_less(const Instance& a, const Instance& b) {
    if (a.det_confidence != b.det_confidence)
        return a.det_confidence > b.det_confidence;
    if (a.bbox.x_min != b.bbox.x_min) return a.bbox.x_min < b.bbox.x_min;
    if (a.bbox.y_min != b.bbox.y_min) return a.bbox.y_min < b.bbox.y_min;
    return a.instance_id < b.instance_id;
}

}  // namespace ordirs::dt
