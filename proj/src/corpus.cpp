#include "ordirs/synth/corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "ordirs/dt/stream.hpp"
#include "ordirs/errors.hpp"
#include "ordirs/eval/benchmark.hpp"
#include "ordirs/png_io.hpp"
#include "ordirs/synth/backend.hpp"
#include "ordirs/util/fsio.hpp"

namespace ordirs::synth {
namespace {

using nlohmann::json;

json rules_for_scenario(const ScenarioSpec& spec) {
    json rules = json::array();
    for (const auto& query : spec.queries) {
        json requirements = json::array();
        for (const auto& req : query.plan)
            requirements.push_back({{"id", req.id},
                                    {"kind", req.kind},
                                    {"rationale", req.rationale},
                                    {"filter", req.filter}});
        rules.push_back({{"kind", "rs_plan"},
                         {"match", query.text},
                         {"plan", {{"requirements", requirements}}}});
    }
    for (const auto& rule : spec.analysis) {
        rules.push_back({{"kind", "agent_aspects"},
                         {"match", rule.match},
                         {"aspects", rule.aspects}});
        json subqueries = json::array();
        for (const auto& sub : rule.subqueries) {
            json s = {{"subquery_id", sub.subquery_id},
                      {"text", sub.text},
                      {"aspect", sub.aspect},
                      {"mode", sub.mode}};
            if (!sub.program.empty()) s["program"] = sub.program;
            subqueries.push_back(std::move(s));
            if (sub.mode == "semantic")
                rules.push_back({{"kind", "narrative"},
                                 {"match", sub.text},
                                 {"template", sub.narrative}});
        }
        rules.push_back({{"kind", "agent_subqueries"},
                         {"match", rule.match},
                         {"subqueries", std::move(subqueries)}});
        if (!rule.report.empty())
            rules.push_back({{"kind", "report"},
                             {"match", rule.match},
                             {"template", rule.report}});
    }
    return rules;
}

std::vector<eval::AnnotationSample> samples_for_scenario(
    const ScenarioSpec& spec, const World& world) {
    std::vector<eval::AnnotationSample> samples;
    for (const auto& query : spec.queries) {
        eval::AnnotationSample sample;
        sample.sample_id = spec.name + "/" + query.id;
        sample.video_id = spec.name;
        sample.stream = spec.name + "/gt/" + spec.name + ".dt.jsonl";
        sample.query = query.text;
        sample.query_type = query.query_type;
        for (std::int64_t f = 0; f < spec.duration_frames; ++f) {
            sample.frame_indices.push_back(f);
            sample.masks.push_back(world.target_mask(query.target_objects, f));
        }
        samples.push_back(std::move(sample));
    }
    return samples;
}

}  // namespace

std::string frame_file_name(std::int64_t frame_index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04lld.png",
                  static_cast<long long>(frame_index));
    return buf;
}

perception::PipelineConfig corpus_pipeline_config(const ScenarioSpec& spec) {
    perception::PipelineConfig config;
    std::set<std::string> have(config.lexicon.begin(), config.lexicon.end());
    for (const auto& obj : spec.objects)
        if (have.insert(obj.label).second) config.lexicon.push_back(obj.label);
    return config;
}

std::vector<dt::DtFrame> reference_stream(const World& world) {
    SyntheticBackend backend(world);
    perception::PipelineConfig config =
        corpus_pipeline_config(world.scenario);
    std::vector<dt::DtFrame> frames;
    for (const auto& world_frame : world.frames) {
        dt::DtFrame frame = perception::build_dt_frame(
            world_frame.image, world.scenario.name, world_frame.frame_index,
            world.timestamp_ms(world_frame.frame_index), config, backend);
        frame.depth_map_ref =
            "depth/" + frame_file_name(world_frame.frame_index);
        frames.push_back(std::move(frame));
    }
    return frames;
}

CorpusSummary write_corpus(const std::vector<ScenarioSpec>& specs,
                           const std::filesystem::path& out_dir) {
    namespace fs = std::filesystem;
    if (specs.empty()) throw InputError("no scenarios to generate");

    std::set<std::string> names;
    for (const auto& spec : specs)
        if (!names.insert(spec.name).second)
            throw ScenarioError("scenario name '" + spec.name +
                                "' appears more than once");

    CorpusSummary summary;
    std::vector<eval::AnnotationSample> all_samples;
    json all_rules = json::array();

    for (const auto& spec : specs) {
        validate_scenario(spec);
        World world = generate_world(spec);
        const fs::path scenario_dir = out_dir / spec.name;
        fs::create_directories(scenario_dir / "frames");
        fs::create_directories(scenario_dir / "gt" / "depth");

        util::atomic_write(scenario_dir / "world.json",
                           json{{"scenario", scenario_to_json(spec)}}.dump(2) +
                               "\n");

        for (const auto& frame : world.frames) {
            img::save_png_rgb8(
                scenario_dir / "frames" / frame_file_name(frame.frame_index),
                frame.image);
            img::save_png_gray16(scenario_dir / "gt" / "depth" /
                                     frame_file_name(frame.frame_index),
                                 frame.depth);
            ++summary.frame_count;
        }

        dt::write_stream_file(reference_stream(world),
                              scenario_dir / "gt" / (spec.name + ".dt.jsonl"));

        for (auto& sample : samples_for_scenario(spec, world))
            all_samples.push_back(std::move(sample));
        for (auto& rule : rules_for_scenario(spec))
            all_rules.push_back(std::move(rule));
        summary.scenario_names.push_back(spec.name);
    }

    summary.sample_count = all_samples.size();
    summary.rule_count = all_rules.size();
    util::atomic_write(out_dir / "annotations.json",
                       eval::annotations_to_json(all_samples).dump(2) + "\n");
    util::atomic_write(out_dir / "llm_rules.json",
                       json{{"rules", all_rules}}.dump(2) + "\n");
    return summary;
}

}  // namespace ordirs::synth
