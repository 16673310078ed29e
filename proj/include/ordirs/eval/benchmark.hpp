#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "ordirs/dt/types.hpp"
#include "ordirs/eval/metrics.hpp"
#include "ordirs/rs/llm.hpp"
#include "ordirs/util/clock.hpp"

namespace ordirs::eval {

/// One annotated query: the stream it runs against, the frames it covers,
/// and the reference mask per frame.
struct AnnotationSample {
    std::string sample_id;
    std::string video_id;
    /// Stream path relative to the annotations file.
    std::string stream;
    std::string query;
    /// Aggregation category: semantic, spatial, or mixed.
    std::string query_type;
    std::vector<std::int64_t> frame_indices;
    std::vector<dt::RleMask> masks;  // aligned with frame_indices
};

std::vector<AnnotationSample> load_annotations(
    const std::filesystem::path& path);
nlohmann::json annotations_to_json(const std::vector<AnnotationSample>& samples);

struct SampleResult {
    std::string sample_id;
    std::string query_type;
    double g_iou = 0.0;
    double c_iou = 0.0;
    bool failed = false;
    std::string note;
};

struct BenchmarkReport {
    std::vector<SampleResult> samples;
    /// Category -> aggregate over that category's samples, percentage scale.
    std::map<std::string, Aggregate> g_by_category;
    std::map<std::string, Aggregate> c_by_category;
    Aggregate g_overall;
    Aggregate c_overall;
    double mean_seconds_per_frame = 0.0;
};

struct BenchmarkOptions {
    int jobs = 1;
    const util::Clock* clock = nullptr;
    /// Replaces every sample's stream path; used when evaluating one
    /// rebuilt stream against annotations authored for another location.
    std::filesystem::path stream_override;
};

/// Runs every sample's query through the reasoning engine against its
/// stream and scores the produced masks. A sample whose run fails scores
/// zero with the failure recorded in its note; sample failures never abort
/// the benchmark.
BenchmarkReport run_benchmark(const std::filesystem::path& annotations_path,
                              rs::LlmClient& llm,
                              const BenchmarkOptions& opts = {});

nlohmann::json report_to_json(const BenchmarkReport& report);
std::string report_to_text(const BenchmarkReport& report);

}  // namespace ordirs::eval
