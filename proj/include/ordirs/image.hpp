#pragma once

#include <cstdint>
#include <vector>

#include "ordirs/errors.hpp"

namespace ordirs::img {

/// Interleaved 8-bit RGB raster, row-major.
struct ImageRgb8 {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // size = width * height * 3

    ImageRgb8() = default;
    ImageRgb8(int w, int h, std::uint8_t r = 0, std::uint8_t g = 0,
              std::uint8_t b = 0)
        : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3) {
        for (std::size_t i = 0; i < pixels.size(); i += 3) {
            pixels[i] = r;
            pixels[i + 1] = g;
            pixels[i + 2] = b;
        }
    }

    bool empty() const { return width <= 0 || height <= 0; }

    std::uint8_t* at(int row, int col) {
        return pixels.data() + (static_cast<std::size_t>(row) * width + col) * 3;
    }
    const std::uint8_t* at(int row, int col) const {
        return pixels.data() + (static_cast<std::size_t>(row) * width + col) * 3;
    }

    bool operator==(const ImageRgb8&) const = default;
};

/// Dense normalized depth grid, row-major, values in [0, 1]
/// (0 = nearest, 1 = farthest).
struct DepthMap {
    int width = 0;
    int height = 0;
    std::vector<float> values;  // size = width * height

    DepthMap() = default;
    DepthMap(int w, int h, float fill = 1.0f)
        : width(w), height(h),
          values(static_cast<std::size_t>(w) * h, fill) {}

    bool empty() const { return width <= 0 || height <= 0; }

    float& at(int row, int col) {
        return values[static_cast<std::size_t>(row) * width + col];
    }
    float at(int row, int col) const {
        return values[static_cast<std::size_t>(row) * width + col];
    }

    bool operator==(const DepthMap&) const = default;
};

}  // namespace ordirs::img
