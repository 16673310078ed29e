#pragma once

#include "ordirs/dt/types.hpp"

namespace ordirs::dt {

/// Encodes a row-major binary grid into its canonical run-length form.
/// Throws InputError on an empty grid.
RleMask encode_rle(const BitGrid& bitmap);

/// Exact inverse of encode_rle. Throws CorruptMaskError when the runs do not
/// sum to width * height or violate the run-structure invariants.
BitGrid decode_rle(const RleMask& mask);

/// Structural check without decoding: run sum matches, no interior
/// zero-length runs, no negative runs.
bool rle_is_well_formed(const RleMask& mask);

}  // namespace ordirs::dt
