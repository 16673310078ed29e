#include "ordirs/perception/http.hpp"

#include <chrono>
#include <thread>

#include <httplib.h>

#include "ordirs/dt/rle.hpp"
#include "ordirs/errors.hpp"
#include "ordirs/png_io.hpp"
#include "ordirs/util/base64.hpp"
#include "ordirs/util/digest.hpp"

namespace ordirs::perception {
namespace {

using nlohmann::json;

std::string image_b64(const img::ImageRgb8& image) {
    return util::base64_encode(img::encode_png_rgb8(image));
}

json bbox_to_json(const dt::BBox& box) {
    return json::array({box.x_min, box.y_min, box.x_max, box.y_max});
}

dt::BBox bbox_from_json(const json& v, const std::string& route) {
    if (!v.is_array() || v.size() != 4)
        throw ProtocolError(route + ": bbox must be an array of four numbers");
    for (const auto& c : v)
        if (!c.is_number())
            throw ProtocolError(route + ": bbox components must be numbers");
    return dt::BBox{v[0].get<double>(), v[1].get<double>(), v[2].get<double>(),
                    v[3].get<double>()};
}

json detect_request(const img::ImageRgb8& image,
                    const std::vector<std::string>& lexicon) {
    return json{{"image_png_b64", image_b64(image)}, {"lexicon", lexicon}};
}

json segment_request(const img::ImageRgb8& image, const dt::BBox& box) {
    return json{{"image_png_b64", image_b64(image)}, {"bbox", bbox_to_json(box)}};
}

json depth_request(const img::ImageRgb8& image) {
    return json{{"image_png_b64", image_b64(image)}};
}

std::vector<Detection> parse_detect_response(const json& doc) {
    if (!doc.is_object() || !doc.contains("detections") ||
        !doc.at("detections").is_array())
        throw ProtocolError("/detect: response lacks a 'detections' array");
    std::vector<Detection> out;
    for (const json& d : doc.at("detections")) {
        if (!d.is_object() || !d.contains("label") ||
            !d.at("label").is_string() || !d.contains("score") ||
            !d.at("score").is_number() || !d.contains("bbox"))
            throw ProtocolError(
                "/detect: each detection needs label, bbox, and score");
        Detection det;
        det.label = d.at("label").get<std::string>();
        det.bbox = bbox_from_json(d.at("bbox"), "/detect");
        det.score = d.at("score").get<double>();
        if (det.score < 0.0 || det.score > 1.0)
            throw ProtocolError("/detect: score must be in [0, 1]");
        out.push_back(std::move(det));
    }
    return out;
}

json detection_list_to_json(const std::vector<Detection>& detections) {
    json arr = json::array();
    for (const auto& det : detections)
        arr.push_back({{"label", det.label},
                       {"bbox", bbox_to_json(det.bbox)},
                       {"score", det.score}});
    return json{{"detections", std::move(arr)}};
}

std::pair<dt::RleMask, double> parse_segment_response(const json& doc) {
    if (!doc.is_object() || !doc.contains("mask") || !doc.contains("score") ||
        !doc.at("score").is_number())
        throw ProtocolError("/segment: response needs 'mask' and 'score'");
    const json& m = doc.at("mask");
    if (!m.is_object() || !m.contains("width") || !m.contains("height") ||
        !m.contains("runs") || !m.at("runs").is_array())
        throw ProtocolError("/segment: mask needs width, height, and runs");
    dt::RleMask mask;
    mask.width = m.at("width").get<int>();
    mask.height = m.at("height").get<int>();
    for (const json& r : m.at("runs")) {
        if (!r.is_number_integer())
            throw ProtocolError("/segment: runs must be integers");
        mask.runs.push_back(r.get<std::int64_t>());
    }
    if (!dt::rle_is_well_formed(mask))
        throw ProtocolError("/segment: returned mask runs are corrupt");
    double score = doc.at("score").get<double>();
    if (score < 0.0 || score > 1.0)
        throw ProtocolError("/segment: score must be in [0, 1]");
    return {std::move(mask), score};
}

json segment_result_to_json(const std::pair<dt::RleMask, double>& result) {
    return json{{"mask",
                 {{"width", result.first.width},
                  {"height", result.first.height},
                  {"runs", result.first.runs}}},
                {"score", result.second}};
}

std::string parse_caption_response(const json& doc) {
    if (!doc.is_object() || !doc.contains("description") ||
        !doc.at("description").is_string())
        throw ProtocolError("/caption: response needs a 'description' string");
    std::string description = doc.at("description").get<std::string>();
    if (description.empty())
        throw ProtocolError("/caption: description must be non-empty");
    return description;
}

img::DepthMap parse_depth_response(const json& doc, int width, int height) {
    if (!doc.is_object() || !doc.contains("depth_png_b64") ||
        !doc.at("depth_png_b64").is_string())
        throw ProtocolError("/depth: response needs a 'depth_png_b64' string");
    img::DepthMap depth;
    try {
        std::vector<std::uint8_t> bytes =
            util::base64_decode(doc.at("depth_png_b64").get<std::string>());
        depth = img::decode_png_gray16(bytes.data(), bytes.size());
    } catch (const Error& e) {
        throw ProtocolError(std::string("/depth: depth image is unusable: ") +
                            e.what());
    }
    if (depth.width != width || depth.height != height)
        throw ProtocolError("/depth: depth dimensions do not match the image");
    return depth;
}

json depth_result_to_json(const img::DepthMap& depth) {
    return json{
        {"depth_png_b64", util::base64_encode(img::encode_png_gray16(depth))}};
}

std::string request_digest(const std::string& route, const json& request) {
    return util::digest_hex(route + ":" + request.dump());
}

}  // namespace

HttpBackend::HttpBackend(HttpBackendConfig config)
    : config_(std::move(config)) {
    if (config_.base_url.empty())
        throw ConfigError("perception backend URL must be non-empty");
    if (config_.max_retries < 0)
        throw ConfigError("max_retries must be non-negative");
}

json HttpBackend::post(const std::string& route, const json& request) {
    const std::string body = request.dump();
    const int attempts_allowed = 1 + config_.max_retries;
    std::string last_failure;

    for (int attempt = 0; attempt < attempts_allowed; ++attempt) {
        if (attempt > 0 && config_.backoff_seconds > 0.0) {
            double delay = config_.backoff_seconds * (1 << (attempt - 1));
            std::this_thread::sleep_for(std::chrono::duration<double>(delay));
        }
        httplib::Client client(config_.base_url);
        client.set_connection_timeout(config_.timeout_seconds, 0);
        client.set_read_timeout(config_.timeout_seconds, 0);
        client.set_write_timeout(config_.timeout_seconds, 0);
        auto result = client.Post(route, body, "application/json");
        if (!result) {
            last_failure = httplib::to_string(result.error());
            continue;
        }
        if (result->status != 200) {
            last_failure = "HTTP " + std::to_string(result->status);
            continue;
        }
        try {
            return json::parse(result->body);
        } catch (const json::exception& e) {
            throw ProtocolError(route + ": response is not valid JSON: " +
                                e.what());
        }
    }
    throw TransportError("POST " + config_.base_url + route + " failed after " +
                             std::to_string(attempts_allowed) + " attempts: " +
                             last_failure,
                         attempts_allowed);
}

std::vector<Detection> HttpBackend::detect(
    const img::ImageRgb8& image, const std::vector<std::string>& lexicon) {
    return parse_detect_response(post("/detect", detect_request(image, lexicon)));
}

std::pair<dt::RleMask, double> HttpBackend::segment_box(
    const img::ImageRgb8& image, const dt::BBox& box) {
    return parse_segment_response(post("/segment", segment_request(image, box)));
}

std::string HttpBackend::describe_region(const img::ImageRgb8& image,
                                         const dt::BBox& box) {
    return parse_caption_response(post("/caption", segment_request(image, box)));
}

img::DepthMap HttpBackend::estimate_depth(const img::ImageRgb8& image) {
    return parse_depth_response(post("/depth", depth_request(image)),
                                image.width, image.height);
}

std::string HttpBackend::identity() const { return "http:" + config_.base_url; }

RecordingPerception::RecordingPerception(PerceptionBackend& inner,
                                         const std::filesystem::path& path)
    : inner_(inner), out_(path, std::ios::trunc) {
    if (!out_)
        throw CassetteError("cannot open cassette for writing: " +
                            path.string());
    out_ << json{{"identity", inner_.identity()}}.dump() << "\n";
    out_.flush();
}

void RecordingPerception::record(const std::string& route,
                                 const json& request, const json& response) {
    std::lock_guard<std::mutex> lock(mutex_);
    out_ << json{{"route", route},
                 {"request_digest", request_digest(route, request)},
                 {"response", response}}
                .dump()
         << "\n";
    out_.flush();
    if (!out_) throw CassetteError("cassette write failed");
}

std::vector<Detection> RecordingPerception::detect(
    const img::ImageRgb8& image, const std::vector<std::string>& lexicon) {
    json request = detect_request(image, lexicon);
    auto detections = inner_.detect(image, lexicon);
    record("/detect", request, detection_list_to_json(detections));
    return detections;
}

std::pair<dt::RleMask, double> RecordingPerception::segment_box(
    const img::ImageRgb8& image, const dt::BBox& box) {
    json request = segment_request(image, box);
    auto result = inner_.segment_box(image, box);
    record("/segment", request, segment_result_to_json(result));
    return result;
}

std::string RecordingPerception::describe_region(const img::ImageRgb8& image,
                                                 const dt::BBox& box) {
    json request = segment_request(image, box);
    std::string description = inner_.describe_region(image, box);
    record("/caption", request, json{{"description", description}});
    return description;
}

img::DepthMap RecordingPerception::estimate_depth(const img::ImageRgb8& image) {
    json request = depth_request(image);
    img::DepthMap depth = inner_.estimate_depth(image);
    record("/depth", request, depth_result_to_json(depth));
    return depth;
}

ReplayPerception::ReplayPerception(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw CassetteError("cannot open cassette for reading: " +
                            path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json doc;
        try {
            doc = json::parse(line);
        } catch (const json::exception& e) {
            throw CassetteError("cassette line " + std::to_string(line_no) +
                                " is not valid JSON: " + e.what());
        }
        if (doc.contains("identity")) {
            identity_ = "replay:" + doc.at("identity").get<std::string>();
            continue;
        }
        if (!doc.contains("route") || !doc.contains("request_digest") ||
            !doc.contains("response"))
            throw CassetteError("cassette line " + std::to_string(line_no) +
                                " lacks route/request_digest/response");
        std::string key = doc.at("route").get<std::string>() + ":" +
                          doc.at("request_digest").get<std::string>();
        responses_[key].push_back(doc.at("response"));
    }
    if (identity_.empty()) identity_ = "replay:unknown";
}

json ReplayPerception::lookup(const std::string& route, const json& request) {
    std::string digest = request_digest(route, request);
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = responses_.find(route + ":" + digest);
    if (it == responses_.end() || it->second.empty())
        throw CassetteError("cassette has no recording for " + route +
                            " request " + digest);
    json response = it->second.front();
    if (it->second.size() > 1) it->second.pop_front();
    return response;
}

std::vector<Detection> ReplayPerception::detect(
    const img::ImageRgb8& image, const std::vector<std::string>& lexicon) {
    return parse_detect_response(
        lookup("/detect", detect_request(image, lexicon)));
}

std::pair<dt::RleMask, double> ReplayPerception::segment_box(
    const img::ImageRgb8& image, const dt::BBox& box) {
    return parse_segment_response(
        lookup("/segment", segment_request(image, box)));
}

std::string ReplayPerception::describe_region(const img::ImageRgb8& image,
                                              const dt::BBox& box) {
    return parse_caption_response(
        lookup("/caption", segment_request(image, box)));
}

img::DepthMap ReplayPerception::estimate_depth(const img::ImageRgb8& image) {
    return parse_depth_response(lookup("/depth", depth_request(image)),
                                image.width, image.height);
}

}  // namespace ordirs::perception
