#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ordirs/agent/analyze.hpp"
#include "ordirs/cli/config.hpp"
#include "ordirs/dt/stream.hpp"
#include "ordirs/errors.hpp"
#include "ordirs/eval/benchmark.hpp"
#include "ordirs/overlay.hpp"
#include "ordirs/perception/backend.hpp"
#include "ordirs/perception/http.hpp"
#include "ordirs/png_io.hpp"
#include "ordirs/rs/engine.hpp"
#include "ordirs/rs/llm.hpp"
#include "ordirs/rs/llm_cassette.hpp"
#include "ordirs/rs/llm_live.hpp"
#include "ordirs/synth/backend.hpp"
#include "ordirs/synth/corpus.hpp"
#include "ordirs/synth/scenario.hpp"
#include "ordirs/synth/scripted_llm.hpp"
#include "ordirs/synth/world.hpp"
#include "ordirs/util/clock.hpp"
#include "ordirs/util/fsio.hpp"
#include "ordirs/util/numeric.hpp"

namespace {

namespace fs = std::filesystem;
using namespace ordirs;
using nlohmann::json;

/// User mistakes (bad input, bad config, bad data) exit 1; failures of the
/// model or perception service (transport, protocol, missing recordings)
/// exit 2.
int exit_code_for(const Error& e) {
    if (dynamic_cast<const TransportError*>(&e) != nullptr ||
        dynamic_cast<const ProtocolError*>(&e) != nullptr ||
        dynamic_cast<const CassetteError*>(&e) != nullptr ||
        dynamic_cast<const NoRuleError*>(&e) != nullptr ||
        dynamic_cast<const RequirementError*>(&e) != nullptr ||
        dynamic_cast<const PlanError*>(&e) != nullptr)
        return 2;
    return 1;
}

struct LlmFlags {
    std::string kind = "scripted";
    std::string rules_path;
    std::string cassette_path;
    std::string record_path;
};

struct LlmStack {
    std::vector<std::unique_ptr<rs::LlmClient>> owned;
    rs::LlmClient* active = nullptr;
};

LlmStack make_llm(const LlmFlags& flags, const cli::AppConfig& config) {
    LlmStack stack;
    if (flags.kind == "scripted") {
        if (flags.rules_path.empty())
            throw ConfigError("--llm scripted needs --rules <llm_rules.json>");
        stack.owned.push_back(std::make_unique<synth::ScriptedLlm>(
            synth::ScriptedLlm::from_file(flags.rules_path)));
    } else if (flags.kind == "replay") {
        if (flags.cassette_path.empty())
            throw ConfigError("--llm replay needs --cassette <file>");
        stack.owned.push_back(
            std::make_unique<rs::ReplayLlm>(flags.cassette_path));
    } else if (flags.kind == "live") {
        rs::LiveLlmConfig live;
        live.base_url = config.llm_url;
        live.api_key = config.llm_api_key;
        live.model = config.llm_model;
        stack.owned.push_back(std::make_unique<rs::LiveLlm>(live));
    } else {
        throw ConfigError("--llm must be scripted, replay, or live");
    }
    stack.active = stack.owned.back().get();
    if (!flags.record_path.empty()) {
        stack.owned.push_back(std::make_unique<rs::RecordingLlm>(
            *stack.active, flags.record_path));
        stack.active = stack.owned.back().get();
    }
    return stack;
}

/// Caches the most recent depth estimate so writing the sidecar after the
/// perception pass does not trigger a second remote call for the same image.
class DepthCacheBackend final : public perception::PerceptionBackend {
public:
    explicit DepthCacheBackend(perception::PerceptionBackend& inner)
        : inner_(inner) {}

    std::vector<perception::Detection> detect(
        const img::ImageRgb8& image,
        const std::vector<std::string>& lexicon) override {
        return inner_.detect(image, lexicon);
    }
    std::pair<dt::RleMask, double> segment_box(const img::ImageRgb8& image,
                                               const dt::BBox& box) override {
        return inner_.segment_box(image, box);
    }
    std::string describe_region(const img::ImageRgb8& image,
                                const dt::BBox& box) override {
        return inner_.describe_region(image, box);
    }
    img::DepthMap estimate_depth(const img::ImageRgb8& image) override {
        if (!cached_ || !(cached_image_ == image)) {
            cached_ = inner_.estimate_depth(image);
            cached_image_ = image;
        }
        return *cached_;
    }
    std::string identity() const override { return inner_.identity(); }

private:
    perception::PerceptionBackend& inner_;
    img::ImageRgb8 cached_image_;
    std::optional<img::DepthMap> cached_;
};

std::vector<std::pair<std::int64_t, fs::path>> list_frame_files(
    const fs::path& dir) {
    if (!fs::is_directory(dir))
        throw InputError("frames directory does not exist: " + dir.string());
    std::vector<std::pair<std::int64_t, fs::path>> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".png")
            continue;
        const std::string stem = entry.path().stem().string();
        std::size_t consumed = 0;
        std::int64_t index = 0;
        try {
            index = std::stoll(stem, &consumed);
        } catch (const std::exception&) {
            consumed = 0;
        }
        if (consumed != stem.size() || index < 0)
            throw InputError("frame file name is not a frame index: " +
                             entry.path().string());
        files.emplace_back(index, entry.path());
    }
    if (files.empty())
        throw InputError("no .png frames in " + dir.string());
    std::sort(files.begin(), files.end());
    for (std::size_t i = 1; i < files.size(); ++i)
        if (files[i].first == files[i - 1].first)
            throw InputError("duplicate frame index " +
                             std::to_string(files[i].first) + " in " +
                             dir.string());
    return files;
}

synth::ScenarioSpec scenario_for_frames_dir(const fs::path& frames_dir) {
    fs::path world_path = frames_dir.parent_path() / "world.json";
    if (!fs::exists(world_path))
        throw InputError(
            "the synthetic backend needs " + world_path.string() +
            " next to the frames directory");
    json doc;
    try {
        doc = json::parse(util::read_file(world_path));
    } catch (const json::exception& e) {
        throw InputError("world document " + world_path.string() +
                         " is not valid JSON: " + e.what());
    }
    if (!doc.is_object() || !doc.contains("scenario"))
        throw InputError("world document lacks a 'scenario' object");
    synth::ScenarioSpec spec = synth::scenario_from_json(doc.at("scenario"));
    synth::validate_scenario(spec);
    return spec;
}

const util::Clock* pick_clock(bool deterministic, bool wall_clock) {
    if (wall_clock || !deterministic) return nullptr;
    return &util::fixed_clock_instance();
}

std::string sanitize_for_filename(const std::string& text) {
    std::string out;
    for (char c : text) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                  (c >= '0' && c <= '9') || c == '-' || c == '_';
        out.push_back(ok ? c : '_');
    }
    return out;
}

double derive_fps(const std::vector<dt::DtFrame>& frames) {
    if (frames.size() >= 2) {
        double delta = frames[1].timestamp_ms - frames[0].timestamp_ms;
        if (delta > 0.0) return util::canon6(1000.0 / delta);
    }
    return 1.0;
}

// ---------------------------------------------------------------- synth --

int run_synth(const std::vector<std::string>& scenario_args,
              const fs::path& out_dir) {
    std::vector<fs::path> files;
    for (const auto& arg : scenario_args) {
        fs::path path(arg);
        if (fs::is_directory(path)) {
            std::vector<fs::path> found;
            for (const auto& entry : fs::directory_iterator(path)) {
                const auto ext = entry.path().extension();
                if (entry.is_regular_file() &&
                    (ext == ".yaml" || ext == ".yml" || ext == ".json"))
                    found.push_back(entry.path());
            }
            std::sort(found.begin(), found.end());
            if (found.empty())
                throw InputError("no scenario files in " + path.string());
            files.insert(files.end(), found.begin(), found.end());
        } else if (fs::exists(path)) {
            files.push_back(path);
        } else {
            throw InputError("scenario path does not exist: " + path.string());
        }
    }

    std::vector<synth::ScenarioSpec> specs;
    for (const auto& file : files)
        specs.push_back(synth::load_scenario_file(file));
    synth::CorpusSummary summary = synth::write_corpus(specs, out_dir);
    std::cout << "generated " << summary.scenario_names.size()
              << " scenario(s), " << summary.frame_count << " frames, "
              << summary.sample_count << " benchmark samples, "
              << summary.rule_count << " model rules -> " << out_dir.string()
              << "\n";
    return 0;
}

// -------------------------------------------------------------- build-dt --

struct BuildDtFlags {
    std::string frames_dir;
    std::string out_path;
    std::string backend_kind = "synthetic";
    std::string url;
    std::string cassette_path;
    std::string record_path;
    std::string video_id;
    double fps = 0.0;  // 0 = derive (scenario fps or 1.0)
    double det_threshold = -1.0;
    int max_instances = 0;
    std::string lexicon_csv;
    bool no_depth = false;
    bool no_captions = false;
};

int run_build_dt(const BuildDtFlags& flags, const cli::AppConfig& config) {
    auto files = list_frame_files(flags.frames_dir);

    perception::PipelineConfig pipeline;
    std::string video_id = flags.video_id;
    double fps = flags.fps;

    std::unique_ptr<synth::World> world;
    std::vector<std::unique_ptr<perception::PerceptionBackend>> owned;
    perception::PerceptionBackend* backend = nullptr;

    if (flags.backend_kind == "synthetic") {
        synth::ScenarioSpec spec = scenario_for_frames_dir(flags.frames_dir);
        world = std::make_unique<synth::World>(synth::generate_world(spec));
        pipeline = synth::corpus_pipeline_config(spec);
        if (video_id.empty()) video_id = spec.name;
        if (fps <= 0.0) fps = spec.fps;
        owned.push_back(std::make_unique<synth::SyntheticBackend>(*world));
        backend = owned.back().get();
    } else if (flags.backend_kind == "http") {
        perception::HttpBackendConfig http;
        http.base_url = flags.url.empty() ? config.perception_url : flags.url;
        if (http.base_url.empty())
            throw ConfigError(
                "--backend http needs --url or a configured perception_url");
        owned.push_back(std::make_unique<perception::HttpBackend>(http));
        backend = owned.back().get();
    } else if (flags.backend_kind == "replay") {
        if (flags.cassette_path.empty())
            throw ConfigError("--backend replay needs --cassette <file>");
        owned.push_back(std::make_unique<perception::ReplayPerception>(
            flags.cassette_path));
        backend = owned.back().get();
    } else {
        throw ConfigError("--backend must be synthetic, http, or replay");
    }

    if (!flags.record_path.empty()) {
        owned.push_back(std::make_unique<perception::RecordingPerception>(
            *backend, flags.record_path));
        backend = owned.back().get();
    }
    owned.push_back(std::make_unique<DepthCacheBackend>(*backend));
    backend = owned.back().get();

    if (video_id.empty()) video_id = "video";
    if (fps <= 0.0) fps = 1.0;
    if (flags.det_threshold >= 0.0) pipeline.det_threshold = flags.det_threshold;
    if (flags.max_instances > 0) pipeline.max_instances = flags.max_instances;
    if (!flags.lexicon_csv.empty()) {
        pipeline.lexicon.clear();
        std::size_t start = 0;
        while (start <= flags.lexicon_csv.size()) {
            std::size_t comma = flags.lexicon_csv.find(',', start);
            std::string label =
                comma == std::string::npos
                    ? flags.lexicon_csv.substr(start)
                    : flags.lexicon_csv.substr(start, comma - start);
            if (!label.empty()) pipeline.lexicon.push_back(label);
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
    }
    if (flags.no_depth) pipeline.enable_depth = false;
    if (flags.no_captions) pipeline.enable_captions = false;
    perception::validate_config(pipeline);

    const fs::path out_path(flags.out_path);
    const fs::path out_dir = out_path.has_parent_path()
                                 ? out_path.parent_path()
                                 : fs::path(".");

    std::vector<dt::DtFrame> frames;
    for (const auto& [index, path] : files) {
        img::ImageRgb8 image = img::load_png_rgb8(path);
        dt::DtFrame frame = perception::build_dt_frame(
            image, video_id, index,
            util::canon6(static_cast<double>(index) * 1000.0 / fps), pipeline,
            *backend);
        if (pipeline.enable_depth) {
            std::string name = synth::frame_file_name(index);
            img::save_png_gray16(out_dir / "depth" / name,
                                 backend->estimate_depth(image));
            frame.depth_map_ref = "depth/" + name;
        }
        frames.push_back(std::move(frame));
    }
    dt::write_stream_file(frames, out_path);
    std::cout << "wrote " << frames.size() << " frames -> "
              << out_path.string() << "\n";
    return 0;
}

// --------------------------------------------------------------- segment --

struct SegmentFlags {
    std::string dt_path;
    std::string query;
    std::string out_path;
    LlmFlags llm;
    int jobs = 0;
    bool wall_clock = false;
};

int run_segment(const SegmentFlags& flags, const cli::AppConfig& config) {
    std::vector<dt::DtFrame> frames = dt::read_stream_file(flags.dt_path);
    LlmStack llm = make_llm(flags.llm, config);

    rs::EngineOptions opts;
    opts.jobs = flags.jobs > 0 ? flags.jobs : config.jobs;
    opts.clock = pick_clock(llm.active->deterministic(), flags.wall_clock);

    rs::SegmentationRun run =
        rs::segment_frames(flags.query, frames, *llm.active, opts);
    json doc = rs::run_to_json(run);

    std::size_t failed = 0;
    for (const auto& result : run.results)
        if (!result.error.empty()) ++failed;

    if (flags.out_path.empty()) {
        std::cout << doc.dump(2) << "\n";
    } else {
        util::atomic_write(flags.out_path, doc.dump(2) + "\n");
        std::cout << "segmented " << run.results.size() << " frame(s)";
        if (failed > 0) std::cout << ", " << failed << " failed";
        std::cout << " -> " << flags.out_path << "\n";
    }
    return 0;
}

// -------------------------------------------------------------- evaluate --

struct EvaluateFlags {
    std::string annotations_path;
    std::string dt_override;
    std::string out_path;
    LlmFlags llm;
    int jobs = 0;
    bool wall_clock = false;
};

int run_evaluate(const EvaluateFlags& flags, const cli::AppConfig& config) {
    LlmStack llm = make_llm(flags.llm, config);

    eval::BenchmarkOptions opts;
    opts.jobs = flags.jobs > 0 ? flags.jobs : config.jobs;
    opts.clock = pick_clock(llm.active->deterministic(), flags.wall_clock);
    if (!flags.dt_override.empty()) opts.stream_override = flags.dt_override;

    eval::BenchmarkReport report =
        eval::run_benchmark(flags.annotations_path, *llm.active, opts);
    std::cout << eval::report_to_text(report);
    if (!flags.out_path.empty()) {
        util::atomic_write(flags.out_path,
                           eval::report_to_json(report).dump(2) + "\n");
        std::cout << "report -> " << flags.out_path << "\n";
    }
    return 0;
}

// --------------------------------------------------------------- analyze --

struct AnalyzeFlags {
    std::string dt_path;
    std::string query;
    std::string frames_dir;
    std::string out_path;
    std::string json_path;
    LlmFlags llm;
    double fps = 0.0;
    int jobs = 0;
    bool wall_clock = false;
};

int run_analyze(const AnalyzeFlags& flags, const cli::AppConfig& config) {
    std::vector<dt::DtFrame> frames = dt::read_stream_file(flags.dt_path);
    LlmStack llm = make_llm(flags.llm, config);

    agent::AnalyzeOptions opts;
    opts.jobs = flags.jobs > 0 ? flags.jobs : config.jobs;
    opts.clock = pick_clock(llm.active->deterministic(), flags.wall_clock);
    opts.fps = flags.fps > 0.0 ? flags.fps : derive_fps(frames);

    agent::AnalysisOutcome outcome =
        agent::analyze(flags.query, frames, *llm.active, opts);

    agent::EvidenceIndex evidence;
    if (!flags.out_path.empty()) {
        const fs::path out_path(flags.out_path);
        const fs::path out_dir = out_path.has_parent_path()
                                     ? out_path.parent_path()
                                     : fs::path(".");
        for (const auto& sub : outcome.subqueries) {
            for (std::int64_t key_frame : sub.key_frames) {
                const rs::FrameSegmentation* result = nullptr;
                std::size_t position = 0;
                for (std::size_t i = 0; i < sub.run.results.size(); ++i) {
                    if (sub.run.results[i].frame_index == key_frame) {
                        result = &sub.run.results[i];
                        position = i;
                        break;
                    }
                }
                if (result == nullptr) continue;
                img::ImageRgb8 base;
                fs::path frame_png;
                if (!flags.frames_dir.empty())
                    frame_png = fs::path(flags.frames_dir) /
                                synth::frame_file_name(key_frame);
                if (!frame_png.empty() && fs::exists(frame_png)) {
                    base = img::load_png_rgb8(frame_png);
                } else {
                    base = img::ImageRgb8(frames[position].width,
                                          frames[position].height, 128, 128,
                                          128);
                }
                img::ImageRgb8 rendered =
                    img::overlay_mask(base, result->mask);
                std::string name =
                    sanitize_for_filename(sub.plan.subquery_id) + "_" +
                    std::to_string(key_frame) + ".png";
                img::save_png_rgb8(out_dir / "evidence" / name, rendered);
                evidence[sub.plan.subquery_id].emplace_back(
                    key_frame, "evidence/" + name);
            }
        }
    }

    std::string markdown = agent::analysis_markdown(outcome, evidence);
    if (flags.out_path.empty()) {
        std::cout << markdown;
    } else {
        util::atomic_write(flags.out_path, markdown);
        std::cout << "analysis -> " << flags.out_path << "\n";
    }
    if (!flags.json_path.empty())
        util::atomic_write(flags.json_path,
                           agent::analysis_to_json(outcome).dump(2) + "\n");
    return 0;
}

void add_llm_flags(CLI::App* cmd, LlmFlags& flags) {
    cmd->add_option("--llm", flags.kind,
                    "language model: scripted, replay, or live")
        ->default_val("scripted");
    cmd->add_option("--rules", flags.rules_path,
                    "rule table for the scripted model");
    cmd->add_option("--cassette", flags.cassette_path,
                    "recorded exchanges to replay");
    cmd->add_option("--record", flags.record_path,
                    "record every exchange to this cassette");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"operating room twin streams: synthesis, segmentation, "
                 "evaluation, and workflow analysis"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "JSON config file");

    // synth
    auto* synth_cmd =
        app.add_subcommand("synth", "render scenario files into a corpus");
    std::vector<std::string> scenario_args;
    std::string synth_out;
    synth_cmd->add_option("--scenario", scenario_args,
                          "scenario file or directory (repeatable)")
        ->required();
    synth_cmd->add_option("--out", synth_out, "corpus output directory")
        ->required();

    // build-dt
    auto* build_cmd = app.add_subcommand(
        "build-dt", "run perception over frames into a twin stream");
    BuildDtFlags build_flags;
    build_cmd->add_option("--frames", build_flags.frames_dir,
                          "directory of NNNN.png frames")
        ->required();
    build_cmd->add_option("--out", build_flags.out_path,
                          "output stream (.dt.jsonl)")
        ->required();
    build_cmd->add_option("--backend", build_flags.backend_kind,
                          "perception backend: synthetic, http, or replay")
        ->default_val("synthetic");
    build_cmd->add_option("--url", build_flags.url, "perception service URL");
    build_cmd->add_option("--cassette", build_flags.cassette_path,
                          "recorded perception calls to replay");
    build_cmd->add_option("--record", build_flags.record_path,
                          "record perception calls to this cassette");
    build_cmd->add_option("--video-id", build_flags.video_id,
                          "video id stored in each frame");
    build_cmd->add_option("--fps", build_flags.fps, "frames per second");
    build_cmd->add_option("--det-threshold", build_flags.det_threshold,
                          "minimum detector confidence");
    build_cmd->add_option("--max-instances", build_flags.max_instances,
                          "instance cap per frame");
    build_cmd->add_option("--lexicon", build_flags.lexicon_csv,
                          "comma-separated detection lexicon");
    build_cmd->add_flag("--no-depth", build_flags.no_depth,
                        "skip depth estimation");
    build_cmd->add_flag("--no-captions", build_flags.no_captions,
                        "skip region captions");

    // segment
    auto* segment_cmd = app.add_subcommand(
        "segment", "answer a segmentation query over a twin stream");
    SegmentFlags segment_flags;
    segment_cmd->add_option("--dt", segment_flags.dt_path,
                            "twin stream (.dt.jsonl)")
        ->required();
    segment_cmd->add_option("--query", segment_flags.query,
                            "natural language query")
        ->required();
    segment_cmd->add_option("--out", segment_flags.out_path,
                            "result JSON (stdout when omitted)");
    segment_cmd->add_option("--jobs", segment_flags.jobs,
                            "frames processed in parallel");
    segment_cmd->add_flag("--wall-clock", segment_flags.wall_clock,
                          "record real timings even for deterministic runs");
    add_llm_flags(segment_cmd, segment_flags.llm);

    // evaluate
    auto* evaluate_cmd = app.add_subcommand(
        "evaluate", "score the engine against annotated queries");
    EvaluateFlags evaluate_flags;
    evaluate_cmd->add_option("--annotations", evaluate_flags.annotations_path,
                             "annotations.json")
        ->required();
    evaluate_cmd->add_option(
        "--dt", evaluate_flags.dt_override,
        "twin stream overriding every sample's recorded stream path");
    evaluate_cmd->add_option("--out", evaluate_flags.out_path,
                             "report JSON path");
    evaluate_cmd->add_option("--jobs", evaluate_flags.jobs,
                             "frames processed in parallel");
    evaluate_cmd->add_flag("--wall-clock", evaluate_flags.wall_clock,
                           "record real timings even for deterministic runs");
    add_llm_flags(evaluate_cmd, evaluate_flags.llm);

    // analyze
    auto* analyze_cmd = app.add_subcommand(
        "analyze", "answer a workflow question with a cited report");
    AnalyzeFlags analyze_flags;
    analyze_cmd->add_option("--dt", analyze_flags.dt_path,
                            "twin stream (.dt.jsonl)")
        ->required();
    analyze_cmd->add_option("--query", analyze_flags.query,
                            "workflow question")
        ->required();
    analyze_cmd->add_option("--frames", analyze_flags.frames_dir,
                            "rendered frames for evidence images");
    analyze_cmd->add_option("--out", analyze_flags.out_path,
                            "markdown report path (stdout when omitted)");
    analyze_cmd->add_option("--json", analyze_flags.json_path,
                            "machine-readable sidecar path");
    analyze_cmd->add_option("--fps", analyze_flags.fps,
                            "frames per second (derived from timestamps "
                            "when omitted)");
    analyze_cmd->add_option("--jobs", analyze_flags.jobs,
                            "frames processed in parallel");
    analyze_cmd->add_flag("--wall-clock", analyze_flags.wall_clock,
                          "record real timings even for deterministic runs");
    add_llm_flags(analyze_cmd, analyze_flags.llm);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        cli::AppConfig config;
        if (!config_path.empty()) cli::apply_config_file(config, config_path);
        cli::apply_env(config,
                       [](const char* name) { return std::getenv(name); });

        if (synth_cmd->parsed()) return run_synth(scenario_args, synth_out);
        if (build_cmd->parsed()) return run_build_dt(build_flags, config);
        if (segment_cmd->parsed()) return run_segment(segment_flags, config);
        if (evaluate_cmd->parsed())
            return run_evaluate(evaluate_flags, config);
        if (analyze_cmd->parsed()) return run_analyze(analyze_flags, config);
        std::cerr << "error: no subcommand\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
