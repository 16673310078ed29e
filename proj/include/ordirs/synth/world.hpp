#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "ordirs/dt/types.hpp"
#include "ordirs/image.hpp"
#include "ordirs/synth/scenario.hpp"

namespace ordirs::synth {

/// One object's rendered state at one frame. The mask and box describe the
/// visible (un-occluded) pixels only.
struct ObjectState {
    bool active = false;
    bool visible = false;
    int x = 0;
    int y = 0;
    dt::RleMask visible_mask;
    dt::BBox visible_box;
};

struct WorldFrame {
    std::int64_t frame_index = 0;
    img::ImageRgb8 image;
    img::DepthMap depth;
    std::vector<ObjectState> objects;  // aligned with the scenario's objects
};

/// Fully rendered scenario: every frame's image, depth map, and per-object
/// visibility. Rendering is deterministic in the scenario alone.
struct World {
    ScenarioSpec scenario;
    std::vector<WorldFrame> frames;

    double timestamp_ms(std::int64_t frame_index) const;

    /// Union of the named objects' visible masks at one frame, the shape a
    /// query targeting those objects is expected to produce.
    dt::RleMask target_mask(const std::vector<std::string>& object_names,
                            std::int64_t frame_index) const;
};

/// Top-left position of an object at a frame: linear interpolation between
/// keyframes rounded to the nearest pixel, clamped to the first/last key
/// outside the keyed range.
std::pair<int, int> object_position(const ObjectSpec& obj, std::int64_t frame);

World generate_world(const ScenarioSpec& spec);

}  // namespace ordirs::synth
