#include "ordirs/synth/world.hpp"

#include <algorithm>
#include <cmath>

#include "ordirs/dt/rle.hpp"
#include "ordirs/errors.hpp"
#include "ordirs/spatial/mask_ops.hpp"
#include "ordirs/util/numeric.hpp"

namespace ordirs::synth {
namespace {

bool covers_pixel(const ObjectSpec& obj, int x0, int y0, int row, int col) {
    if (col < x0 || col >= x0 + obj.width || row < y0 || row >= y0 + obj.height)
        return false;
    if (obj.shape == ObjectShape::kRect) return true;
    double rx = obj.width / 2.0;
    double ry = obj.height / 2.0;
    double dx = (col + 0.5) - (x0 + rx);
    double dy = (row + 0.5) - (y0 + ry);
    return (dx * dx) / (rx * rx) + (dy * dy) / (ry * ry) <= 1.0;
}

}  // namespace

std::pair<int, int> object_position(const ObjectSpec& obj, std::int64_t frame) {
    const auto& keys = obj.trajectory;
    double x = keys.front().x;
    double y = keys.front().y;
    if (frame >= keys.back().frame) {
        x = keys.back().x;
        y = keys.back().y;
    } else if (frame > keys.front().frame) {
        for (std::size_t i = 1; i < keys.size(); ++i) {
            if (frame <= keys[i].frame) {
                const auto& a = keys[i - 1];
                const auto& b = keys[i];
                double t = static_cast<double>(frame - a.frame) /
                           static_cast<double>(b.frame - a.frame);
                x = a.x + t * (b.x - a.x);
                y = a.y + t * (b.y - a.y);
                break;
            }
        }
    }
    return {static_cast<int>(std::llround(x)), static_cast<int>(std::llround(y))};
}

double World::timestamp_ms(std::int64_t frame_index) const {
    return util::canon6(static_cast<double>(frame_index) * 1000.0 /
                        scenario.fps);
}

dt::RleMask World::target_mask(const std::vector<std::string>& object_names,
                               std::int64_t frame_index) const {
    if (frame_index < 0 ||
        frame_index >= static_cast<std::int64_t>(frames.size()))
        throw InputError("target_mask: frame index out of range");
    const WorldFrame& frame = frames[static_cast<std::size_t>(frame_index)];
    std::vector<dt::RleMask> members;
    for (const auto& name : object_names) {
        for (std::size_t i = 0; i < scenario.objects.size(); ++i) {
            if (scenario.objects[i].name == name && frame.objects[i].visible)
                members.push_back(frame.objects[i].visible_mask);
        }
    }
    return spatial::mask_union(members, scenario.width, scenario.height);
}

World generate_world(const ScenarioSpec& spec) {
    World world;
    world.scenario = spec;
    world.frames.reserve(static_cast<std::size_t>(spec.duration_frames));

    const int w = spec.width;
    const int h = spec.height;
    const std::size_t n = spec.objects.size();

    for (std::int64_t f = 0; f < spec.duration_frames; ++f) {
        WorldFrame frame;
        frame.frame_index = f;
        frame.image = img::ImageRgb8(w, h, spec.background_color[0],
                                     spec.background_color[1],
                                     spec.background_color[2]);
        frame.depth = img::DepthMap(w, h, static_cast<float>(spec.background_depth));
        frame.objects.resize(n);

        for (std::size_t i = 0; i < n; ++i) {
            const ObjectSpec& obj = spec.objects[i];
            ObjectState& state = frame.objects[i];
            state.active = obj.active_event.empty();
            if (!state.active) {
                const EventSpec* event = spec.find_event(obj.active_event);
                state.active = event != nullptr && event->active_at(f);
            }
            if (state.active)
                std::tie(state.x, state.y) = object_position(obj, f);
        }

        // Nearest active object wins each pixel; depth ties keep the object
        // declared first.
        std::vector<int> owner(static_cast<std::size_t>(w) * h, -1);
        for (std::size_t i = 0; i < n; ++i) {
            const ObjectSpec& obj = spec.objects[i];
            const ObjectState& state = frame.objects[i];
            if (!state.active) continue;
            int row_end = std::min(h, state.y + obj.height);
            int col_end = std::min(w, state.x + obj.width);
            for (int row = std::max(0, state.y); row < row_end; ++row) {
                for (int col = std::max(0, state.x); col < col_end; ++col) {
                    if (!covers_pixel(obj, state.x, state.y, row, col)) continue;
                    std::size_t px = static_cast<std::size_t>(row) * w + col;
                    if (owner[px] < 0 ||
                        obj.depth < spec.objects[static_cast<std::size_t>(
                                        owner[px])].depth)
                        owner[px] = static_cast<int>(i);
                }
            }
        }

        std::vector<dt::BitGrid> bits(n);
        for (auto& grid : bits) grid = dt::BitGrid(w, h);
        for (int row = 0; row < h; ++row) {
            for (int col = 0; col < w; ++col) {
                int who = owner[static_cast<std::size_t>(row) * w + col];
                if (who < 0) continue;
                const ObjectSpec& obj = spec.objects[static_cast<std::size_t>(who)];
                std::uint8_t* px = frame.image.at(row, col);
                px[0] = obj.color[0];
                px[1] = obj.color[1];
                px[2] = obj.color[2];
                frame.depth.at(row, col) = static_cast<float>(obj.depth);
                bits[static_cast<std::size_t>(who)].set(row, col, true);
            }
        }

        for (std::size_t i = 0; i < n; ++i) {
            ObjectState& state = frame.objects[i];
            state.visible_mask = dt::encode_rle(bits[i]);
            state.visible = state.visible_mask.area() > 0;
            if (!state.visible) continue;
            int col_min = w, col_max = -1, row_min = h, row_max = -1;
            for (int row = 0; row < h; ++row) {
                for (int col = 0; col < w; ++col) {
                    if (!bits[i].at(row, col)) continue;
                    col_min = std::min(col_min, col);
                    col_max = std::max(col_max, col);
                    row_min = std::min(row_min, row);
                    row_max = std::max(row_max, row);
                }
            }
            state.visible_box = dt::BBox{static_cast<double>(col_min),
                                         static_cast<double>(row_min),
                                         static_cast<double>(col_max + 1),
                                         static_cast<double>(row_max + 1)};
        }

        world.frames.push_back(std::move(frame));
    }
    return world;
}

}  // namespace ordirs::synth
