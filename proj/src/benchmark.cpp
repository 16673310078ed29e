#include "ordirs/eval/benchmark.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "ordirs/dt/json_codec.hpp"
#include "ordirs/dt/stream.hpp"
#include "ordirs/errors.hpp"
#include "ordirs/rs/engine.hpp"
#include "ordirs/util/numeric.hpp"

namespace ordirs::eval {
namespace {

using nlohmann::json;

AnnotationSample sample_from_json(const json& s, std::size_t index) {
    const std::string where = "samples[" + std::to_string(index) + "]";
    auto need_string = [&](const char* key) {
        if (!s.contains(key) || !s.at(key).is_string())
            throw ProtocolError(where + "." + key + " must be a string");
        return s.at(key).get<std::string>();
    };
    AnnotationSample sample;
    sample.sample_id = need_string("sample_id");
    sample.video_id = need_string("video_id");
    sample.stream = need_string("stream");
    sample.query = need_string("query");
    sample.query_type = need_string("query_type");
    if (!s.contains("frames") || !s.at("frames").is_array() ||
        s.at("frames").empty())
        throw ProtocolError(where + ".frames must be a non-empty array");
    for (const json& f : s.at("frames")) {
        if (!f.is_object() || !f.contains("frame_index") ||
            !f.at("frame_index").is_number_integer() || !f.contains("mask"))
            throw ProtocolError(where +
                                ".frames entries need frame_index and mask");
        sample.frame_indices.push_back(f.at("frame_index").get<std::int64_t>());
        sample.masks.push_back(dt::rle_mask_from_json(f.at("mask")));
    }
    return sample;
}

}  // namespace

std::vector<AnnotationSample> load_annotations(
    const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open annotations: " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ProtocolError("annotations " + path.string() +
                            " are not valid JSON: " + e.what());
    }
    if (!doc.is_object() || !doc.contains("samples") ||
        !doc.at("samples").is_array())
        throw ProtocolError("annotations must be {\"samples\": [...]}");
    std::vector<AnnotationSample> samples;
    std::set<std::string> ids;
    for (std::size_t i = 0; i < doc.at("samples").size(); ++i) {
        samples.push_back(sample_from_json(doc.at("samples")[i], i));
        if (!ids.insert(samples.back().sample_id).second)
            throw ProtocolError("duplicate sample_id '" +
                                samples.back().sample_id + "'");
    }
    return samples;
}

json annotations_to_json(const std::vector<AnnotationSample>& samples) {
    json arr = json::array();
    for (const auto& sample : samples) {
        json frames = json::array();
        for (std::size_t i = 0; i < sample.frame_indices.size(); ++i)
            frames.push_back({{"frame_index", sample.frame_indices[i]},
                              {"mask", dt::to_json(sample.masks[i])}});
        arr.push_back({{"sample_id", sample.sample_id},
                       {"video_id", sample.video_id},
                       {"stream", sample.stream},
                       {"query", sample.query},
                       {"query_type", sample.query_type},
                       {"frames", std::move(frames)}});
    }
    return json{{"samples", std::move(arr)}};
}

BenchmarkReport run_benchmark(const std::filesystem::path& annotations_path,
                              rs::LlmClient& llm,
                              const BenchmarkOptions& opts) {
    std::vector<AnnotationSample> samples = load_annotations(annotations_path);
    const std::filesystem::path root = annotations_path.parent_path();

    std::map<std::string, std::vector<dt::DtFrame>> streams;
    auto frames_of = [&](const AnnotationSample& sample)
        -> const std::vector<dt::DtFrame>& {
        std::filesystem::path stream_path =
            opts.stream_override.empty() ? root / sample.stream
                                         : opts.stream_override;
        std::string key = stream_path.string();
        auto it = streams.find(key);
        if (it == streams.end())
            it = streams.emplace(key, dt::read_stream_file(stream_path)).first;
        return it->second;
    };

    BenchmarkReport report;
    std::map<std::string, std::vector<double>> g_values;
    std::map<std::string, std::vector<double>> c_values;
    std::vector<double> g_all;
    std::vector<double> c_all;
    double elapsed_total = 0.0;
    std::size_t frames_total = 0;

    rs::EngineOptions engine_opts;
    engine_opts.jobs = opts.jobs;
    engine_opts.clock = opts.clock;

    for (const auto& sample : samples) {
        SampleResult result;
        result.sample_id = sample.sample_id;
        result.query_type = sample.query_type;
        try {
            const std::vector<dt::DtFrame>& all_frames = frames_of(sample);
            std::vector<dt::DtFrame> selected;
            for (std::int64_t want : sample.frame_indices) {
                const dt::DtFrame* found = nullptr;
                for (const auto& frame : all_frames)
                    if (frame.frame_index == want) found = &frame;
                if (found == nullptr)
                    throw InputError("stream lacks frame_index " +
                                     std::to_string(want));
                selected.push_back(*found);
            }
            rs::SegmentationRun run =
                rs::segment_frames(sample.query, selected, llm, engine_opts);
            std::vector<dt::RleMask> predicted;
            for (const auto& frame_result : run.results) {
                predicted.push_back(frame_result.mask);
                elapsed_total += frame_result.elapsed_seconds;
                ++frames_total;
            }
            result.g_iou = g_iou(predicted, sample.masks);
            result.c_iou = c_iou(predicted, sample.masks);
            for (const auto& frame_result : run.results)
                if (!frame_result.error.empty() && result.note.empty())
                    result.note = "frame " +
                                  std::to_string(frame_result.frame_index) +
                                  ": " + frame_result.error;
        } catch (const Error& e) {
            result.failed = true;
            result.note = e.what();
            result.g_iou = 0.0;
            result.c_iou = 0.0;
        }
        g_values[result.query_type].push_back(result.g_iou * 100.0);
        c_values[result.query_type].push_back(result.c_iou * 100.0);
        g_all.push_back(result.g_iou * 100.0);
        c_all.push_back(result.c_iou * 100.0);
        report.samples.push_back(std::move(result));
    }

    for (const auto& [category, values] : g_values)
        report.g_by_category[category] = aggregate(values);
    for (const auto& [category, values] : c_values)
        report.c_by_category[category] = aggregate(values);
    report.g_overall = aggregate(g_all);
    report.c_overall = aggregate(c_all);
    report.mean_seconds_per_frame =
        frames_total == 0
            ? 0.0
            : util::canon6(elapsed_total / static_cast<double>(frames_total));
    return report;
}

json report_to_json(const BenchmarkReport& report) {
    json samples = json::array();
    for (const auto& s : report.samples)
        samples.push_back({{"sample_id", s.sample_id},
                           {"query_type", s.query_type},
                           {"g_iou", util::canon6(s.g_iou)},
                           {"c_iou", util::canon6(s.c_iou)},
                           {"failed", s.failed},
                           {"note", s.note}});
    auto agg_json = [](const Aggregate& a) {
        return json{{"mean", util::canon6(a.mean)},
                    {"std", util::canon6(a.std)},
                    {"count", a.count},
                    {"display", format_mean_std(a)}};
    };
    json categories = json::object();
    for (const auto& [category, agg] : report.g_by_category)
        categories[category] = {{"g_iou", agg_json(agg)},
                                {"c_iou", agg_json(report.c_by_category.at(category))}};
    return json{{"samples", std::move(samples)},
                {"categories", std::move(categories)},
                {"overall",
                 {{"g_iou", agg_json(report.g_overall)},
                  {"c_iou", agg_json(report.c_overall)}}},
                {"mean_seconds_per_frame", report.mean_seconds_per_frame}};
}

std::string report_to_text(const BenchmarkReport& report) {
    std::ostringstream out;
    out << "category    samples  gIoU           cIoU\n";
    auto row = [&](const std::string& name, const Aggregate& g,
                   const Aggregate& c) {
        std::string g_text = format_mean_std(g);
        std::string c_text = format_mean_std(c);
        char line[160];
        std::snprintf(line, sizeof(line), "%-11s %-8zu %-14s %s\n",
                      name.c_str(), g.count, g_text.c_str(), c_text.c_str());
        out << line;
    };
    for (const auto& [category, agg] : report.g_by_category)
        row(category, agg, report.c_by_category.at(category));
    row("overall", report.g_overall, report.c_overall);
    char timing[80];
    std::snprintf(timing, sizeof(timing), "mean seconds per frame: %s\n",
                  util::format_sig6(report.mean_seconds_per_frame).c_str());
    out << timing;
    std::size_t failures = 0;
    for (const auto& s : report.samples)
        if (s.failed) ++failures;
    if (failures > 0) {
        out << "failed samples:\n";
        for (const auto& s : report.samples)
            if (s.failed) out << "  " << s.sample_id << ": " << s.note << "\n";
    }
    return out.str();
}

}  // namespace ordirs::eval
