#include "ordirs/synth/backend.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ordirs/dt/rle.hpp"
#include "ordirs/errors.hpp"
#include "ordirs/util/numeric.hpp"
#include "ordirs/util/rng.hpp"

namespace ordirs::synth {
namespace {

/// Pixels whose centers fall inside the box, clipped to the frame.
std::int64_t mask_pixels_in_box(const dt::RleMask& mask, const dt::BBox& box) {
    dt::BitGrid grid = dt::decode_rle(mask);
    int col_lo = std::max(0, static_cast<int>(std::ceil(box.x_min - 0.5)));
    int col_hi = std::min(grid.width - 1,
                          static_cast<int>(std::floor(box.x_max - 0.5)));
    int row_lo = std::max(0, static_cast<int>(std::ceil(box.y_min - 0.5)));
    int row_hi = std::min(grid.height - 1,
                          static_cast<int>(std::floor(box.y_max - 0.5)));
    std::int64_t count = 0;
    for (int row = row_lo; row <= row_hi; ++row)
        for (int col = col_lo; col <= col_hi; ++col)
            if (grid.at(row, col)) ++count;
    return count;
}

}  // namespace

SyntheticBackend::SyntheticBackend(const World& world, NoiseConfig noise)
    : world_(world), noise_(noise) {}

const WorldFrame& SyntheticBackend::frame_for(
    const img::ImageRgb8& image) const {
    for (const auto& frame : world_.frames)
        if (frame.image == image) return frame;
    throw InputError("image does not match any frame of the synthetic world");
}

std::size_t SyntheticBackend::object_under_box(const WorldFrame& frame,
                                               const dt::BBox& box) const {
    std::int64_t best_overlap = 0;
    std::size_t best = frame.objects.size();
    for (std::size_t i = 0; i < frame.objects.size(); ++i) {
        if (!frame.objects[i].visible) continue;
        std::int64_t overlap = mask_pixels_in_box(frame.objects[i].visible_mask, box);
        if (overlap > best_overlap) {
            best_overlap = overlap;
            best = i;
        }
    }
    if (best == frame.objects.size())
        throw InputError("box prompt covers no visible object");
    return best;
}

std::vector<perception::Detection> SyntheticBackend::detect(
    const img::ImageRgb8& image, const std::vector<std::string>& lexicon) {
    const WorldFrame& frame = frame_for(image);
    util::Rng rng(util::Rng::mix(noise_.seed,
                                 static_cast<std::uint64_t>(frame.frame_index)));
    const double w = world_.scenario.width;
    const double h = world_.scenario.height;

    std::vector<perception::Detection> all;
    for (std::size_t i = 0; i < frame.objects.size(); ++i) {
        const ObjectState& state = frame.objects[i];
        if (!state.visible) continue;
        perception::Detection det;
        det.label = world_.scenario.objects[i].label;
        det.bbox = state.visible_box;
        det.score = 1.0;
        if (noise_.bbox_sigma > 0.0) {
            det.bbox.x_min += rng.gauss() * noise_.bbox_sigma;
            det.bbox.y_min += rng.gauss() * noise_.bbox_sigma;
            det.bbox.x_max += rng.gauss() * noise_.bbox_sigma;
            det.bbox.y_max += rng.gauss() * noise_.bbox_sigma;
            det.bbox.x_min = std::clamp(det.bbox.x_min, 0.0, w - 1.0);
            det.bbox.y_min = std::clamp(det.bbox.y_min, 0.0, h - 1.0);
            det.bbox.x_max = std::clamp(det.bbox.x_max, det.bbox.x_min + 1.0, w);
            det.bbox.y_max = std::clamp(det.bbox.y_max, det.bbox.y_min + 1.0, h);
        }
        if (noise_.score_sigma > 0.0)
            det.score = std::clamp(
                1.0 - std::abs(rng.gauss() * noise_.score_sigma), 0.0, 1.0);
        all.push_back(std::move(det));
    }

    std::vector<perception::Detection> out;
    for (auto& det : all) {
        bool known = std::find(lexicon.begin(), lexicon.end(), det.label) !=
                     lexicon.end();
        if (known) out.push_back(std::move(det));
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const perception::Detection& a,
                        const perception::Detection& b) {
                         return a.score > b.score;
                     });
    return out;
}

std::pair<dt::RleMask, double> SyntheticBackend::segment_box(
    const img::ImageRgb8& image, const dt::BBox& box) {
    const WorldFrame& frame = frame_for(image);
    std::size_t who = object_under_box(frame, box);
    return {frame.objects[who].visible_mask, 1.0};
}

std::string SyntheticBackend::describe_region(const img::ImageRgb8& image,
                                              const dt::BBox& box) {
    const WorldFrame& frame = frame_for(image);
    std::size_t who = object_under_box(frame, box);
    const ObjectSpec& obj = world_.scenario.objects[who];
    return obj.description.empty() ? obj.label : obj.description;
}

img::DepthMap SyntheticBackend::estimate_depth(const img::ImageRgb8& image) {
    return frame_for(image).depth;
}

std::string SyntheticBackend::identity() const {
    if (noise_.bbox_sigma == 0.0 && noise_.score_sigma == 0.0)
        return "synthetic-exact";
    std::ostringstream out;
    out << "synthetic-noisy(bbox_sigma=" << util::format_sig6(noise_.bbox_sigma)
        << ",score_sigma=" << util::format_sig6(noise_.score_sigma)
        << ",seed=" << noise_.seed << ")";
    return out.str();
}

}  // namespace ordirs::synth
