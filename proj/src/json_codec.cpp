#include "ordirs/dt/json_codec.hpp"

#include "ordirs/errors.hpp"

namespace ordirs::dt {

using nlohmann::json;

namespace {

const json& require(const json& j, const char* key, const char* ctx) {
    auto it = j.find(key);
    if (it == j.end()) {
        throw ProtocolError(std::string(ctx) + ": missing field '" + key + "'");
    }
    return *it;
}

double require_number(const json& j, const char* key, const char* ctx) {
    const json& v = require(j, key, ctx);
    if (!v.is_number()) {
        throw ProtocolError(std::string(ctx) + ": field '" + key +
                            "' is not a number");
    }
    return v.get<double>();
}

std::int64_t require_int(const json& j, const char* key, const char* ctx) {
    const json& v = require(j, key, ctx);
    if (!v.is_number_integer()) {
        throw ProtocolError(std::string(ctx) + ": field '" + key +
                            "' is not an integer");
    }
    return v.get<std::int64_t>();
}

std::string require_string(const json& j, const char* key, const char* ctx) {
    const json& v = require(j, key, ctx);
    if (!v.is_string()) {
        throw ProtocolError(std::string(ctx) + ": field '" + key +
                            "' is not a string");
    }
    return v.get<std::string>();
}

}  // namespace

json to_json(const BBox& b) {
    return json{{"x_min", b.x_min},
                {"y_min", b.y_min},
                {"x_max", b.x_max},
                {"y_max", b.y_max}};
}

json to_json(const RleMask& m) {
    return json{{"width", m.width}, {"height", m.height}, {"runs", m.runs}};
}

json to_json(const DepthStats& d) {
    return json{{"mean", d.mean}, {"std", d.std}, {"pixel_count", d.pixel_count}};
}

json to_json(const Instance& inst) {
    json j{{"instance_id", inst.instance_id},
           {"label", inst.label},
           {"bbox", to_json(inst.bbox)},
           {"det_confidence", inst.det_confidence},
           {"mask", to_json(inst.mask)},
           {"mask_confidence", inst.mask_confidence},
           {"description", inst.description}};
    if (inst.depth) j["depth"] = to_json(*inst.depth);
    return j;
}

json to_json(const DtFrame& frame) {
    json instances = json::array();
    for (const auto& inst : frame.instances) instances.push_back(to_json(inst));
    json j{{"video_id", frame.video_id},
           {"frame_index", frame.frame_index},
           {"timestamp_ms", frame.timestamp_ms},
           {"width", frame.width},
           {"height", frame.height},
           {"instances", std::move(instances)},
           {"producer", frame.producer}};
    if (frame.depth_map_ref) j["depth_map_ref"] = *frame.depth_map_ref;
    return j;
}

BBox bbox_from_json(const json& j) {
    if (!j.is_object()) throw ProtocolError("bbox: not an object");
    BBox b;
    b.x_min = require_number(j, "x_min", "bbox");
    b.y_min = require_number(j, "y_min", "bbox");
    b.x_max = require_number(j, "x_max", "bbox");
    b.y_max = require_number(j, "y_max", "bbox");
    return b;
}

RleMask rle_mask_from_json(const json& j) {
    if (!j.is_object()) throw ProtocolError("mask: not an object");
    RleMask m;
    m.width = static_cast<int>(require_int(j, "width", "mask"));
    m.height = static_cast<int>(require_int(j, "height", "mask"));
    const json& runs = require(j, "runs", "mask");
    if (!runs.is_array()) throw ProtocolError("mask: field 'runs' is not an array");
    m.runs.reserve(runs.size());
    for (const auto& r : runs) {
        if (!r.is_number_integer()) {
            throw ProtocolError("mask: run length is not an integer");
        }
        m.runs.push_back(r.get<std::int64_t>());
    }
    return m;
}

DepthStats depth_stats_from_json(const json& j) {
    if (!j.is_object()) throw ProtocolError("depth: not an object");
    DepthStats d;
    d.mean = require_number(j, "mean", "depth");
    d.std = require_number(j, "std", "depth");
    d.pixel_count = require_int(j, "pixel_count", "depth");
    return d;
}

Instance instance_from_json(const json& j) {
    if (!j.is_object()) throw ProtocolError("instance: not an object");
    Instance inst;
    inst.instance_id = require_int(j, "instance_id", "instance");
    inst.label = require_string(j, "label", "instance");
    inst.bbox = bbox_from_json(require(j, "bbox", "instance"));
    inst.det_confidence = require_number(j, "det_confidence", "instance");
    inst.mask = rle_mask_from_json(require(j, "mask", "instance"));
    inst.mask_confidence = require_number(j, "mask_confidence", "instance");
    inst.description = require_string(j, "description", "instance");
    if (auto it = j.find("depth"); it != j.end() && !it->is_null()) {
        inst.depth = depth_stats_from_json(*it);
    }
    return inst;
}

DtFrame frame_from_json(const json& j) {
    if (!j.is_object()) throw ProtocolError("frame: not an object");
    DtFrame frame;
    frame.video_id = require_string(j, "video_id", "frame");
    frame.frame_index = require_int(j, "frame_index", "frame");
    frame.timestamp_ms = require_number(j, "timestamp_ms", "frame");
    frame.width = static_cast<int>(require_int(j, "width", "frame"));
    frame.height = static_cast<int>(require_int(j, "height", "frame"));
    const json& instances = require(j, "instances", "frame");
    if (!instances.is_array()) {
        throw ProtocolError("frame: field 'instances' is not an array");
    }
    for (const auto& inst : instances) {
        frame.instances.push_back(instance_from_json(inst));
    }
    if (auto it = j.find("depth_map_ref"); it != j.end() && !it->is_null()) {
        if (!it->is_string()) {
            throw ProtocolError("frame: field 'depth_map_ref' is not a string");
        }
        frame.depth_map_ref = it->get<std::string>();
    }
    if (auto it = j.find("producer"); it != j.end() && !it->is_null()) {
        if (!it->is_object()) {
            throw ProtocolError("frame: field 'producer' is not an object");
        }
        for (auto& [k, v] : it->items()) {
            if (!v.is_string()) {
                throw ProtocolError("frame: producer entry '" + k +
                                    "' is not a string");
            }
            frame.producer[k] = v.get<std::string>();
        }
    }
    return frame;
}

}  // namespace ordirs::dt
