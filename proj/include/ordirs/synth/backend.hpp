#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ordirs/perception/backend.hpp"
#include "ordirs/synth/world.hpp"

namespace ordirs::synth {

/// Measurement noise for the synthetic backend. With both sigmas at zero the
/// backend is exact: tight boxes, perfect masks, scores of 1.0, and no random
/// draws at all.
struct NoiseConfig {
    double bbox_sigma = 0.0;
    double score_sigma = 0.0;
    std::uint64_t seed = 0;
};

/// Perception backend that answers from a rendered world instead of learned
/// models. Images are matched to world frames by exact pixel equality, so the
/// backend only accepts images it rendered itself.
///
/// Noise discipline: each frame uses a fresh generator seeded by
/// mix(seed, frame_index); for every visible object in declaration order the
/// draws are dx0, dy0, dx1, dy1 ~ N(0, bbox_sigma) when bbox_sigma > 0,
/// then s ~ N(0, score_sigma) when score_sigma > 0, with
/// score = clamp(1 - |s|, 0, 1). Lexicon filtering happens after the draws,
/// so the noise stream does not depend on the lexicon.
class SyntheticBackend final : public perception::PerceptionBackend {
public:
    explicit SyntheticBackend(const World& world, NoiseConfig noise = {});

    std::vector<perception::Detection> detect(
        const img::ImageRgb8& image,
        const std::vector<std::string>& lexicon) override;
    std::pair<dt::RleMask, double> segment_box(const img::ImageRgb8& image,
                                               const dt::BBox& box) override;
    std::string describe_region(const img::ImageRgb8& image,
                                const dt::BBox& box) override;
    img::DepthMap estimate_depth(const img::ImageRgb8& image) override;
    std::string identity() const override;

private:
    const WorldFrame& frame_for(const img::ImageRgb8& image) const;
    std::size_t object_under_box(const WorldFrame& frame,
                                 const dt::BBox& box) const;

    const World& world_;
    NoiseConfig noise_;
};

}  // namespace ordirs::synth
