#pragma once

#include <string>
#include <vector>

#include "ordirs/dt/types.hpp"

namespace ordirs::dt {

/// One violated invariant. `code` is machine-readable and stable; `path`
/// locates the offending element (e.g. "instances[2].mask").
struct Violation {
    std::string code;
    std::string path;
    std::string message;
};

using ValidationReport = std::vector<Violation>;

/// Violation codes emitted by validate_frame.
namespace violation_code {
inline constexpr const char* FRAME_DIM_INVALID = "FRAME_DIM_INVALID";
inline constexpr const char* FRAME_INDEX_NEGATIVE = "FRAME_INDEX_NEGATIVE";
inline constexpr const char* TIMESTAMP_NEGATIVE = "TIMESTAMP_NEGATIVE";
inline constexpr const char* DUPLICATE_INSTANCE_ID = "DUPLICATE_INSTANCE_ID";
inline constexpr const char* INSTANCE_ORDER = "INSTANCE_ORDER";
inline constexpr const char* BBOX_INVALID = "BBOX_INVALID";
inline constexpr const char* BBOX_OUT_OF_BOUNDS = "BBOX_OUT_OF_BOUNDS";
inline constexpr const char* DET_CONFIDENCE_RANGE = "DET_CONFIDENCE_RANGE";
inline constexpr const char* MASK_CONFIDENCE_RANGE = "MASK_CONFIDENCE_RANGE";
inline constexpr const char* MASK_DIM_MISMATCH = "MASK_DIM_MISMATCH";
inline constexpr const char* RLE_SUM_MISMATCH = "RLE_SUM_MISMATCH";
inline constexpr const char* RLE_STRUCTURE = "RLE_STRUCTURE";
inline constexpr const char* MASK_EMPTY = "MASK_EMPTY";
inline constexpr const char* MASK_BBOX_DISJOINT = "MASK_BBOX_DISJOINT";
inline constexpr const char* DEPTH_MEAN_RANGE = "DEPTH_MEAN_RANGE";
inline constexpr const char* DEPTH_STD_NEGATIVE = "DEPTH_STD_NEGATIVE";
inline constexpr const char* DEPTH_STD_SINGLE_PIXEL = "DEPTH_STD_SINGLE_PIXEL";
inline constexpr const char* DEPTH_PIXEL_COUNT = "DEPTH_PIXEL_COUNT";
}  // namespace violation_code

/// Reports every violated invariant of the frame and its nested types.
/// Pure and total: never throws on any structurally representable frame,
/// never mutates its input. An empty report means the frame is valid.
ValidationReport validate_frame(const DtFrame& frame);

inline bool report_contains(const ValidationReport& report,
                            const std::string& code) {
    for (const auto& v : report) {
        if (v.code == code) return true;
    }
    return false;
}

}  // namespace ordirs::dt
