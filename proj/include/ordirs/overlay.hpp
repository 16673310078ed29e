#pragma once

#include <array>

#include "ordirs/dt/types.hpp"
#include "ordirs/image.hpp"

namespace ordirs::img {

/// Blends a translucent tint over the mask's foreground pixels, the evidence
/// rendering used in analysis reports. Throws InputError on a dimension
/// mismatch.
ImageRgb8 overlay_mask(const ImageRgb8& base, const dt::RleMask& mask,
                       std::array<std::uint8_t, 3> tint = {220, 40, 40},
                       double alpha = 0.5);

}  // namespace ordirs::img
