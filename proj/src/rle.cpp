#include "ordirs/dt/rle.hpp"

#include "ordirs/errors.hpp"

namespace ordirs::dt {

RleMask encode_rle(const BitGrid& bitmap) {
    if (bitmap.width <= 0 || bitmap.height <= 0 || bitmap.cells.empty()) {
        throw InputError("encode_rle: empty bitmap");
    }
    const std::size_t total =
        static_cast<std::size_t>(bitmap.width) * bitmap.height;
    if (bitmap.cells.size() != total) {
        throw InputError("encode_rle: ragged bitmap, cell count " +
                         std::to_string(bitmap.cells.size()) + " != " +
                         std::to_string(total));
    }

    RleMask mask;
    mask.width = bitmap.width;
    mask.height = bitmap.height;

    std::uint8_t current = 0;  // runs start with background
    std::int64_t run = 0;
    for (std::size_t i = 0; i < total; ++i) {
        std::uint8_t v = bitmap.cells[i] ? 1 : 0;
        if (v == current) {
            ++run;
        } else {
            mask.runs.push_back(run);
            current = v;
            run = 1;
        }
    }
    mask.runs.push_back(run);
    return mask;
}

bool rle_is_well_formed(const RleMask& mask) {
    if (mask.width <= 0 || mask.height <= 0) return false;
    if (mask.runs.empty()) return false;
    std::int64_t sum = 0;
    for (std::size_t i = 0; i < mask.runs.size(); ++i) {
        std::int64_t r = mask.runs[i];
        if (r < 0) return false;
        if (r == 0 && i != 0) return false;
        sum += r;
    }
    return sum == static_cast<std::int64_t>(mask.width) * mask.height;
}

BitGrid decode_rle(const RleMask& mask) {
    if (mask.width <= 0 || mask.height <= 0) {
        throw CorruptMaskError("decode_rle: non-positive dimensions");
    }
    const std::int64_t total =
        static_cast<std::int64_t>(mask.width) * mask.height;
    std::int64_t sum = 0;
    for (std::size_t i = 0; i < mask.runs.size(); ++i) {
        std::int64_t r = mask.runs[i];
        if (r < 0) throw CorruptMaskError("decode_rle: negative run length");
        if (r == 0 && i != 0) {
            throw CorruptMaskError("decode_rle: zero-length run at index " +
                                   std::to_string(i));
        }
        sum += r;
    }
    if (sum != total) {
        throw CorruptMaskError("decode_rle: run sum " + std::to_string(sum) +
                               " != " + std::to_string(total));
    }

    BitGrid grid(mask.width, mask.height);
    std::size_t pos = 0;
    std::uint8_t value = 0;
    for (std::int64_t r : mask.runs) {
        for (std::int64_t i = 0; i < r; ++i) grid.cells[pos++] = value;
        value ^= 1;
    }
    return grid;
}

}  // namespace ordirs::dt
