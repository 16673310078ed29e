#include "ordirs/overlay.hpp"

#include <cmath>

#include "ordirs/dt/rle.hpp"
#include "ordirs/errors.hpp"

namespace ordirs::img {

ImageRgb8 overlay_mask(const ImageRgb8& base, const dt::RleMask& mask,
                       std::array<std::uint8_t, 3> tint, double alpha) {
    if (base.width != mask.width || base.height != mask.height)
        throw InputError("overlay dimensions do not match the image");
    if (alpha < 0.0 || alpha > 1.0)
        throw InputError("overlay alpha must be in [0, 1]");
    ImageRgb8 out = base;
    dt::BitGrid grid = dt::decode_rle(mask);
    for (int row = 0; row < base.height; ++row) {
        for (int col = 0; col < base.width; ++col) {
            if (!grid.at(row, col)) continue;
            std::uint8_t* px = out.at(row, col);
            for (int c = 0; c < 3; ++c) {
                double blended = (1.0 - alpha) * px[c] + alpha * tint[c];
                px[c] = static_cast<std::uint8_t>(std::lround(blended));
            }
        }
    }
    return out;
}

}  // namespace ordirs::img
