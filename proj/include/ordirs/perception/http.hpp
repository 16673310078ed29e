#pragma once

#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <string>

#include <json.hpp>

#include "ordirs/perception/backend.hpp"

namespace ordirs::perception {

/// Remote perception service. Each capability is one POST route taking and
/// returning JSON, with images and depth maps carried as base64 PNG:
///
///   /detect  {"image_png_b64", "lexicon"}
///            -> {"detections": [{"label", "bbox": [4], "score"}]}
///   /segment {"image_png_b64", "bbox": [4]}
///            -> {"mask": {"width", "height", "runs"}, "score"}
///   /caption {"image_png_b64", "bbox": [4]} -> {"description"}
///   /depth   {"image_png_b64"} -> {"depth_png_b64"}
struct HttpBackendConfig {
    std::string base_url;
    int timeout_seconds = 30;
    /// Additional attempts after the first failure.
    int max_retries = 2;
    /// Initial delay before a retry, doubled each time. Zero in tests.
    double backoff_seconds = 0.25;
};

class HttpBackend final : public PerceptionBackend {
public:
    explicit HttpBackend(HttpBackendConfig config);

    std::vector<Detection> detect(
        const img::ImageRgb8& image,
        const std::vector<std::string>& lexicon) override;
    std::pair<dt::RleMask, double> segment_box(const img::ImageRgb8& image,
                                               const dt::BBox& box) override;
    std::string describe_region(const img::ImageRgb8& image,
                                const dt::BBox& box) override;
    img::DepthMap estimate_depth(const img::ImageRgb8& image) override;
    std::string identity() const override;

private:
    nlohmann::json post(const std::string& route,
                        const nlohmann::json& request);

    HttpBackendConfig config_;
};

/// Wraps any backend and appends each call to a cassette file in wire-shape
/// JSON lines {"route", "request_digest", "response"}, so a remote session
/// can be replayed offline.
class RecordingPerception final : public PerceptionBackend {
public:
    RecordingPerception(PerceptionBackend& inner,
                        const std::filesystem::path& path);

    std::vector<Detection> detect(
        const img::ImageRgb8& image,
        const std::vector<std::string>& lexicon) override;
    std::pair<dt::RleMask, double> segment_box(const img::ImageRgb8& image,
                                               const dt::BBox& box) override;
    std::string describe_region(const img::ImageRgb8& image,
                                const dt::BBox& box) override;
    img::DepthMap estimate_depth(const img::ImageRgb8& image) override;
    std::string identity() const override { return inner_.identity(); }

private:
    void record(const std::string& route, const nlohmann::json& request,
                const nlohmann::json& response);

    PerceptionBackend& inner_;
    std::ofstream out_;
    std::mutex mutex_;
};

/// Replays a recorded cassette. Responses are keyed by route and request
/// digest and returned in recorded order; when a key's recordings are
/// exhausted the last one repeats. An unknown request raises CassetteError.
class ReplayPerception final : public PerceptionBackend {
public:
    explicit ReplayPerception(const std::filesystem::path& path);

    std::vector<Detection> detect(
        const img::ImageRgb8& image,
        const std::vector<std::string>& lexicon) override;
    std::pair<dt::RleMask, double> segment_box(const img::ImageRgb8& image,
                                               const dt::BBox& box) override;
    std::string describe_region(const img::ImageRgb8& image,
                                const dt::BBox& box) override;
    img::DepthMap estimate_depth(const img::ImageRgb8& image) override;
    std::string identity() const override { return identity_; }

private:
    nlohmann::json lookup(const std::string& route,
                          const nlohmann::json& request);

    std::string identity_;
    std::map<std::string, std::deque<nlohmann::json>> responses_;
    std::mutex mutex_;
};

}  // namespace ordirs::perception
