#pragma once

#include <cstdio>
#include <cstdlib>
#include <string>

namespace ordirs::util {

/// Renders a value with up to 6 significant decimal digits, trailing zeros
/// stripped. This is the canonical form used for confidences and depth
/// statistics in serialized frames.
inline std::string format_sig6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

/// Quantizes a value to the double nearest its canonical 6-significant-digit
/// rendering. Producers apply this before storing confidences so that
/// serialization round-trips are byte-exact.
inline double canon6(double v) {
    return std::strtod(format_sig6(v).c_str(), nullptr);
}

}  // namespace ordirs::util
