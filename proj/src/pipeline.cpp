#include <algorithm>
#include <optional>

#include "ordirs/errors.hpp"
#include "ordirs/perception/backend.hpp"
#include "ordirs/spatial/mask_ops.hpp"
#include "ordirs/util/numeric.hpp"

namespace ordirs::perception {

void validate_config(const PipelineConfig& config) {
    if (config.lexicon.empty())
        throw ConfigError("pipeline lexicon must not be empty");
    if (config.det_threshold < 0.0 || config.det_threshold > 1.0)
        throw ConfigError("det_threshold must be in [0, 1]");
    if (config.max_instances < 1)
        throw ConfigError("max_instances must be >= 1");
    if (config.dedup_iou <= 0.0 || config.dedup_iou > 1.0)
        throw ConfigError("dedup_iou must be in (0, 1]");
}

double bbox_iou(const dt::BBox& a, const dt::BBox& b) {
    double ix = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
    double iy = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
    if (ix <= 0.0 || iy <= 0.0) return 0.0;
    double inter = ix * iy;
    double uni = a.area() + b.area() - inter;
    return uni <= 0.0 ? 0.0 : inter / uni;
}

namespace {

dt::BBox canon_bbox(const dt::BBox& b) {
    return {util::canon6(b.x_min), util::canon6(b.y_min),
            util::canon6(b.x_max), util::canon6(b.y_max)};
}

}  // namespace

dt::DtFrame build_dt_frame(const img::ImageRgb8& image,
                           const std::string& video_id,
                           std::int64_t frame_index, double timestamp_ms,
                           const PipelineConfig& config,
                           PerceptionBackend& backend) {
    validate_config(config);
    if (image.width <= 0 || image.height <= 0)
        throw InputError("build_dt_frame: empty image");

    std::vector<Detection> detections = backend.detect(image, config.lexicon);
    std::stable_sort(detections.begin(), detections.end(),
                     [](const Detection& a, const Detection& b) {
                         return a.score > b.score;
                     });

    std::vector<Detection> kept;
    for (const auto& det : detections) {
        if (det.score < config.det_threshold) continue;
        bool duplicate = false;
        for (const auto& winner : kept) {
            if (bbox_iou(det.bbox, winner.bbox) > config.dedup_iou) {
                duplicate = true;
                break;
            }
        }
        if (!duplicate) kept.push_back(det);
        if (static_cast<int>(kept.size()) == config.max_instances) break;
    }

    std::optional<img::DepthMap> depth_map;
    if (config.enable_depth) depth_map = backend.estimate_depth(image);

    std::vector<dt::Instance> instances;
    instances.reserve(kept.size());
    for (const auto& det : kept) {
        dt::Instance inst;
        inst.label = det.label;
        inst.bbox = canon_bbox(det.bbox);
        inst.det_confidence = util::canon6(det.score);
        auto [mask, beta] = backend.segment_box(image, det.bbox);
        inst.mask = std::move(mask);
        inst.mask_confidence = util::canon6(beta);
        inst.description = config.enable_captions
                               ? backend.describe_region(image, det.bbox)
                               : "";
        if (depth_map) {
            dt::DepthStats stats =
                spatial::depth_stats_for_mask(*depth_map, inst.mask);
            stats.mean = util::canon6(stats.mean);
            stats.std = util::canon6(stats.std);
            inst.depth = stats;
        }
        instances.push_back(std::move(inst));
    }

    std::stable_sort(instances.begin(), instances.end(),
                     dt::instance_order_less);
    for (std::size_t i = 0; i < instances.size(); ++i)
        instances[i].instance_id = static_cast<std::int64_t>(i);

    dt::DtFrame frame;
    frame.video_id = video_id;
    frame.frame_index = frame_index;
    frame.timestamp_ms = util::canon6(timestamp_ms);
    frame.width = image.width;
    frame.height = image.height;
    frame.instances = std::move(instances);
    frame.producer["detect"] = backend.identity();
    frame.producer["segment"] = backend.identity();
    if (config.enable_captions) frame.producer["caption"] = backend.identity();
    if (config.enable_depth) frame.producer["depth"] = backend.identity();
    return frame;
}

}  // namespace ordirs::perception
