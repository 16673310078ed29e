#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ordirs/dt/types.hpp"
#include "ordirs/image.hpp"

namespace ordirs::perception {

/// One detector proposal.
struct Detection {
    std::string label;
    dt::BBox bbox;
    double score = 0.0;  // alpha in [0, 1]
};

/// The four perception capabilities an implementation must serve: an
/// open-vocabulary detector, a box-promptable segmenter, a region
/// captioner, and a dense depth estimator. Implementations must tolerate
/// concurrent requests.
class PerceptionBackend {
public:
    virtual ~PerceptionBackend() = default;

    /// Proposals for the lexicon's labels, ordered by score descending.
    virtual std::vector<Detection> detect(
        const img::ImageRgb8& image,
        const std::vector<std::string>& lexicon) = 0;

    /// Mask for the box prompt plus the segmenter's quality estimate beta.
    /// A prompt covering no segmentable content raises InputError.
    virtual std::pair<dt::RleMask, double> segment_box(
        const img::ImageRgb8& image, const dt::BBox& box) = 0;

    /// Natural-language description of the region. Never empty.
    virtual std::string describe_region(const img::ImageRgb8& image,
                                        const dt::BBox& box) = 0;

    /// Per-frame normalized inverse depth in [0, 1], 0 = nearest.
    virtual img::DepthMap estimate_depth(const img::ImageRgb8& image) = 0;

    virtual std::string identity() const = 0;
};

struct PipelineConfig {
    std::vector<std::string> lexicon = {
        "patient",       "anesthesiologist", "surgeon",
        "nurse",         "anesthesia machine", "operating table",
        "door",          "instrument tray"};
    double det_threshold = 0.30;
    int max_instances = 32;
    bool enable_depth = true;
    bool enable_captions = true;
    /// Detections whose boxes overlap above this IoU are duplicates; the
    /// higher-scored one survives.
    double dedup_iou = 0.9;
};

/// Checks the config invariants; throws ConfigError.
void validate_config(const PipelineConfig& config);

/// Runs the full perception pass over one image: detect, threshold,
/// de-duplicate, cap at max_instances, then segment, caption, and compute
/// depth statistics per surviving detection. Instances are ordered by
/// detector confidence descending with (x_min, y_min) tie-breaks and ids
/// assigned 0..n-1 in that order. All stored floats are quantized to their
/// canonical 6-significant-digit form. The result always passes
/// validate_frame.
dt::DtFrame build_dt_frame(const img::ImageRgb8& image,
                           const std::string& video_id,
                           std::int64_t frame_index, double timestamp_ms,
                           const PipelineConfig& config,
                           PerceptionBackend& backend);

/// Box intersection-over-union, used for duplicate suppression.
double bbox_iou(const dt::BBox& a, const dt::BBox& b);

}  // namespace ordirs::perception
