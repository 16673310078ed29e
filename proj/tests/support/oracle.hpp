#pragma once

// Brute-force reference implementations, kept independent of the run-based
// production code so the two can check each other.

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "ordirs/dt/types.hpp"

namespace testsupport {

struct Bits {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> px;  // row-major, 0/1

    Bits() = default;
    Bits(int w, int h)
        : width(w), height(h), px(static_cast<std::size_t>(w) * h, 0) {}

    std::uint8_t get(int row, int col) const {
        return px[static_cast<std::size_t>(row) * width + col];
    }
    void set(int row, int col, bool v) {
        px[static_cast<std::size_t>(row) * width + col] = v ? 1 : 0;
    }
};

inline Bits random_bits(std::mt19937_64& rng, int max_side = 64) {
    std::uniform_int_distribution<int> side(1, max_side);
    Bits b(side(rng), side(rng));
    std::uniform_real_distribution<double> density(0.0, 1.0);
    double p = density(rng);
    std::bernoulli_distribution bit(p);
    for (auto& v : b.px) v = bit(rng) ? 1 : 0;
    return b;
}

// Scan-based encoder, independent of ordirs::dt::encode_rle.
inline ordirs::dt::RleMask rle_of(const Bits& b) {
    ordirs::dt::RleMask m;
    m.width = b.width;
    m.height = b.height;
    std::uint8_t current = 0;
    std::int64_t run = 0;
    for (std::uint8_t v : b.px) {
        if (v == current) {
            ++run;
        } else {
            m.runs.push_back(run);
            current = v;
            run = 1;
        }
    }
    m.runs.push_back(run);
    if (b.px.empty()) m.runs = {0};
    return m;
}

// Expansion-based decoder, independent of ordirs::dt::decode_rle.
inline Bits bits_of(const ordirs::dt::RleMask& m) {
    Bits b(m.width, m.height);
    std::size_t pos = 0;
    std::uint8_t value = 0;
    for (std::int64_t run : m.runs) {
        for (std::int64_t i = 0; i < run; ++i) b.px[pos++] = value;
        value = 1 - value;
    }
    return b;
}

inline std::int64_t popcount(const Bits& b) {
    std::int64_t n = 0;
    for (auto v : b.px) n += v;
    return n;
}

inline std::pair<std::int64_t, std::int64_t> intersection_union(
    const Bits& a, const Bits& b) {
    std::int64_t inter = 0;
    std::int64_t uni = 0;
    for (std::size_t i = 0; i < a.px.size(); ++i) {
        inter += a.px[i] & b.px[i];
        uni += a.px[i] | b.px[i];
    }
    return {inter, uni};
}

inline double iou(const Bits& a, const Bits& b) {
    auto [i, u] = intersection_union(a, b);
    return u == 0 ? 1.0 : static_cast<double>(i) / static_cast<double>(u);
}

inline Bits bit_or(const Bits& a, const Bits& b) {
    Bits out(a.width, a.height);
    for (std::size_t i = 0; i < out.px.size(); ++i)
        out.px[i] = a.px[i] | b.px[i];
    return out;
}

inline std::pair<double, double> centroid(const Bits& b) {
    double sx = 0.0;
    double sy = 0.0;
    std::int64_t n = 0;
    for (int r = 0; r < b.height; ++r) {
        for (int c = 0; c < b.width; ++c) {
            if (b.get(r, c)) {
                sx += c + 0.5;
                sy += r + 0.5;
                ++n;
            }
        }
    }
    return {sx / n, sy / n};
}

}  // namespace testsupport
