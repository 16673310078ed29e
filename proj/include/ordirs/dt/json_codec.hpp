#pragma once

#include <json.hpp>

#include "ordirs/dt/types.hpp"

namespace ordirs::dt {

/// JSON shape of a frame record (snake_case keys, one object per stream line).
/// Optional fields (depth, depth_map_ref) are omitted when absent. Confidence
/// and depth values are expected to be pre-quantized to their canonical
/// 6-significant-digit form by the producer; the codec writes doubles as-is.

nlohmann::json to_json(const BBox& b);
nlohmann::json to_json(const RleMask& m);
nlohmann::json to_json(const DepthStats& d);
nlohmann::json to_json(const Instance& inst);
nlohmann::json to_json(const DtFrame& frame);

/// Decoders throw ProtocolError with the offending key path on missing or
/// mistyped fields.
BBox bbox_from_json(const nlohmann::json& j);
RleMask rle_mask_from_json(const nlohmann::json& j);
DepthStats depth_stats_from_json(const nlohmann::json& j);
Instance instance_from_json(const nlohmann::json& j);
DtFrame frame_from_json(const nlohmann::json& j);

}  // namespace ordirs::dt
