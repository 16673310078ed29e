// End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
// the process exits nonzero when any criterion fails. The live-model smoke
// check is skipped unless ORDIRS_LLM_API_KEY is set.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ordirs/agent/analyze.hpp"
#include "ordirs/agent/program.hpp"
#include "ordirs/dt/rle.hpp"
#include "ordirs/dt/stream.hpp"
#include "ordirs/errors.hpp"
#include "ordirs/eval/benchmark.hpp"
#include "ordirs/eval/metrics.hpp"
#include "ordirs/rs/engine.hpp"
#include "ordirs/rs/filter.hpp"
#include "ordirs/rs/llm_live.hpp"
#include "ordirs/rs/plan.hpp"
#include "ordirs/synth/backend.hpp"
#include "ordirs/synth/corpus.hpp"
#include "ordirs/synth/scenario.hpp"
#include "ordirs/synth/scripted_llm.hpp"
#include "ordirs/util/clock.hpp"

namespace fs = std::filesystem;
using namespace ordirs;
using nlohmann::json;

namespace {

struct CheckFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& message) {
    if (!ok) throw CheckFailure(message);
}

fs::path scenario_dir() { return fs::path(ORDIRS_SCENARIO_DIR); }

fs::path work_root() {
    return fs::temp_directory_path() / "ordirs_acceptance";
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), "cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void spill(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << content;
}

std::vector<synth::ScenarioSpec> load_benchmark_scenarios() {
    std::vector<synth::ScenarioSpec> specs;
    for (const char* name :
         {"door_events.yaml", "person_near_table.yaml",
          "phase_transitions.yaml"})
        specs.push_back(synth::load_scenario_file(scenario_dir() / name));
    return specs;
}

// ---------------------------------------------------------------------------
// Criterion 1: noiseless corpus scores essentially perfectly, fast.

void oracle_end_to_end() {
    auto start = std::chrono::steady_clock::now();
    fs::path corpus = work_root() / "corpus";
    synth::write_corpus(load_benchmark_scenarios(), corpus);
    synth::ScriptedLlm llm =
        synth::ScriptedLlm::from_file(corpus / "llm_rules.json");
    eval::BenchmarkOptions opts;
    opts.jobs = 2;
    eval::BenchmarkReport report =
        eval::run_benchmark(corpus / "annotations.json", llm, opts);
    for (const char* category : {"semantic", "spatial", "mixed"}) {
        require(report.g_by_category.count(category) == 1,
                std::string("no samples in category ") + category);
        double g = report.g_by_category.at(category).mean;
        double c = report.c_by_category.at(category).mean;
        require(g >= 99.0, std::string(category) + " gIoU " +
                               std::to_string(g) + " below 99");
        require(c >= 99.0, std::string(category) + " cIoU " +
                               std::to_string(c) + " below 99");
    }
    for (const auto& sample : report.samples)
        require(!sample.failed, "sample failed: " + sample.sample_id);
    double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    require(seconds < 30.0,
            "took " + std::to_string(seconds) + "s, budget is 30s");
}

// ---------------------------------------------------------------------------
// Criterion 2: metric implementations agree with brute-force pixel counting.

dt::BitGrid random_grid(std::mt19937_64& rng, int width, int height) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    double density = u01(rng);
    if (rng() % 8 == 0) density = 0.0;
    if (rng() % 8 == 0) density = 1.0;
    dt::BitGrid grid(width, height);
    for (auto& cell : grid.cells) cell = u01(rng) < density ? 1 : 0;
    return grid;
}

void metric_oracle() {
    std::mt19937_64 rng(20260821);
    for (int trial = 0; trial < 200; ++trial) {
        int width = 1 + static_cast<int>(rng() % 32);
        int height = 1 + static_cast<int>(rng() % 32);
        int frame_count = 1 + static_cast<int>(rng() % 3);
        std::vector<dt::RleMask> predicted, truth;
        std::int64_t total_inter = 0;
        std::int64_t total_union = 0;
        double iou_sum = 0.0;
        for (int f = 0; f < frame_count; ++f) {
            dt::BitGrid a = random_grid(rng, width, height);
            dt::BitGrid b = random_grid(rng, width, height);
            std::int64_t inter = 0;
            std::int64_t uni = 0;
            for (std::size_t i = 0; i < a.cells.size(); ++i) {
                inter += (a.cells[i] != 0 && b.cells[i] != 0) ? 1 : 0;
                uni += (a.cells[i] != 0 || b.cells[i] != 0) ? 1 : 0;
            }
            iou_sum += uni == 0 ? 1.0
                                : static_cast<double>(inter) /
                                      static_cast<double>(uni);
            total_inter += inter;
            total_union += uni;
            predicted.push_back(dt::encode_rle(a));
            truth.push_back(dt::encode_rle(b));
        }
        double oracle_g = iou_sum / frame_count;
        double oracle_c = total_union == 0
                              ? 1.0
                              : static_cast<double>(total_inter) /
                                    static_cast<double>(total_union);
        require(std::abs(eval::g_iou(predicted, truth) - oracle_g) <= 1e-9,
                "gIoU disagrees with pixel counting at trial " +
                    std::to_string(trial));
        require(std::abs(eval::c_iou(predicted, truth) - oracle_c) <= 1e-9,
                "cIoU disagrees with pixel counting at trial " +
                    std::to_string(trial));
    }

    // Two-frame fixture: a disjoint pair then a 4-pixel overlap.
    dt::BitGrid truth1(5, 2), pred1(5, 2), truth2(5, 3), pred2(5, 3);
    truth1.cells[0] = truth1.cells[1] = 1;
    pred1.cells[5] = pred1.cells[6] = pred1.cells[7] = 1;
    for (int i = 0; i < 6; ++i) truth2.cells[i] = 1;
    for (int i = 2; i < 8; ++i) pred2.cells[i] = 1;
    std::vector<dt::RleMask> pred = {dt::encode_rle(pred1),
                                     dt::encode_rle(pred2)};
    std::vector<dt::RleMask> gt = {dt::encode_rle(truth1),
                                   dt::encode_rle(truth2)};
    require(std::abs(eval::c_iou(pred, gt) - 4.0 / 13.0) <= 1e-9,
            "fixture cIoU is not 4/13");
    require(std::abs(eval::g_iou(pred, gt) - 0.25) <= 1e-9,
            "fixture gIoU is not 0.25");
}

// ---------------------------------------------------------------------------
// Criterion 3: the run-length codec is an exact involution.

void rle_codec() {
    std::mt19937_64 rng(64001);
    for (int trial = 0; trial < 1000; ++trial) {
        int width = 1 + static_cast<int>(rng() % 64);
        int height = 1 + static_cast<int>(rng() % 64);
        dt::BitGrid grid = random_grid(rng, width, height);
        dt::RleMask mask = dt::encode_rle(grid);
        require(dt::rle_is_well_formed(mask),
                "emitted mask fails the structural check");
        std::int64_t sum =
            std::accumulate(mask.runs.begin(), mask.runs.end(),
                            static_cast<std::int64_t>(0));
        require(sum == static_cast<std::int64_t>(width) * height,
                "runs do not sum to width*height");
        for (std::size_t i = 1; i < mask.runs.size(); ++i)
            require(mask.runs[i] > 0, "interior zero-length run");
        dt::BitGrid back = dt::decode_rle(mask);
        require(back.width == grid.width && back.height == grid.height &&
                    back.cells == grid.cells,
                "decode(encode(grid)) differs at trial " +
                    std::to_string(trial));
    }
}

// ---------------------------------------------------------------------------
// Criterion 4: filter text round-trips; malformed text is rejected in place.

struct FilterGen {
    std::mt19937_64 rng;
    std::vector<std::string> labels = {"door", "nurse", "operating table",
                                       "tray \"B\"", "c-arm\\boom"};
    std::vector<std::string> questions = {"sliding door", "carrying a tray",
                                          "draped for surgery",
                                          "say \"when\""};

    explicit FilterGen(std::uint64_t seed) : rng(seed) {}

    static std::string quoted(const std::string& raw) {
        std::string out = "\"";
        for (char c : raw) {
            if (c == '"' || c == '\\') out += '\\';
            out += c;
        }
        out += '"';
        return out;
    }

    std::string pick(const std::vector<std::string>& pool) {
        return pool[rng() % pool.size()];
    }

    std::string anchor(int depth) { return "ANCHOR(" + expr(depth, 2) + ")"; }

    std::string atom(int depth) {
        // Anchors may nest at most twice; past that only plain atoms.
        bool spatial_ok = depth < 2;
        switch (rng() % (spatial_ok ? 9 : 2)) {
            case 0: return "LABEL(" + quoted(pick(labels)) + ")";
            case 1: return "SEM(" + quoted(pick(questions)) + ")";
            case 2: {
                const char* preds[] = {"LEFT_OF", "RIGHT_OF", "ABOVE",
                                       "BELOW", "NEARER_THAN", "FARTHER_THAN"};
                return std::string(preds[rng() % 6]) + "(" +
                       anchor(depth + 1) + ")";
            }
            case 3:
                return "WITHIN_PX(" +
                       std::to_string(1 + static_cast<int>(rng() % 40)) +
                       ", " + anchor(depth + 1) + ")";
            case 4:
                return "OVERLAPS(" + anchor(depth + 1) + ")";
            case 5: {
                double tau = 0.05 + 0.0001 * static_cast<double>(rng() % 9500);
                std::ostringstream text;
                text << tau;
                return "OVERLAPS(" + text.str() + ", " + anchor(depth + 1) +
                       ")";
            }
            case 6:
                return "NEAREST_K(" +
                       std::to_string(1 + static_cast<int>(rng() % 4)) + ", " +
                       anchor(depth + 1) + ")";
            case 7:
                return "FARTHEST_K(" +
                       std::to_string(1 + static_cast<int>(rng() % 4)) + ", " +
                       anchor(depth + 1) + ")";
            default:
                return "LARGEST_K(" +
                       std::to_string(1 + static_cast<int>(rng() % 4)) + ")";
        }
    }

    std::string unit(int depth, int budget) {
        std::string inner = budget > 0 && rng() % 3 == 0
                                ? "(" + expr(depth, budget - 1) + ")"
                                : atom(depth);
        return rng() % 4 == 0 ? "NOT " + inner : inner;
    }

    std::string expr(int depth, int budget) {
        std::string text = unit(depth, budget);
        std::size_t extra = rng() % 3;
        for (std::size_t i = 0; i < extra; ++i)
            text += (rng() % 2 == 0 ? " AND " : " OR ") + unit(depth, budget);
        return text;
    }
};

void filter_round_trip() {
    FilterGen gen(4242);
    for (int trial = 0; trial < 100; ++trial) {
        std::string text = gen.expr(0, 2);
        rs::FilterPtr first = rs::parse_filter(text);
        require(rs::filter_anchor_depth(*first) <= 2,
                "generator exceeded the anchor depth bound");
        std::string printed = rs::print_filter(first);
        rs::FilterPtr second = rs::parse_filter(printed);
        require(rs::filter_equal(first, second),
                "round-trip changed the tree for: " + text);
    }

    const char* malformed[] = {
        "LABEL()",
        "LABEL(\"a\", \"b\")",
        "SEM(door)",
        "WITHIN_PX(ANCHOR(LABEL(\"a\")))",
        "WITHIN_PX(-3, ANCHOR(LABEL(\"a\")))",
        "NEAREST_K(2)",
        "NEAREST_K(0, ANCHOR(LABEL(\"a\")))",
        "LARGEST_K(2.5)",
        "OVERLAPS(0, ANCHOR(LABEL(\"a\")))",
        "OVERLAPS(1.5, ANCHOR(LABEL(\"a\")))",
        "ABOVE(ANCHOR(LABEL(\"a\")), ANCHOR(LABEL(\"b\")))",
        "LEFT_OF(ANCHOR(LEFT_OF(ANCHOR(LEFT_OF(ANCHOR(LABEL(\"x\")))))))",
        "(LABEL(\"a\") AND SEM(\"b\")",
        "LABEL(\"a\"))",
        "LABEL(\"a",
        "AND LABEL(\"a\")",
        "LABEL(\"a\") OR",
        "NOT",
        "LABEL(\"a\") LABEL(\"b\")",
        "FROBNICATE(\"x\")",
    };
    for (const char* text : malformed) {
        try {
            rs::parse_filter(text);
            throw CheckFailure(std::string("accepted malformed filter: ") +
                               text);
        } catch (const ParseError& e) {
            require(e.line() >= 1,
                    std::string("unpositioned parse error for: ") + text);
        }
    }
}

// ---------------------------------------------------------------------------
// Criterion 5: candidate-set algebra on random plans and frames.

struct AlgebraGen {
    std::mt19937_64 rng;
    std::vector<std::string> labels = {"door", "nurse", "operating table",
                                       "instrument tray"};
    std::vector<std::string> descriptions = {
        "sliding door standing open", "nurse carrying an instrument tray",
        "steel operating table", "instrument tray on a stand"};
    std::vector<std::string> questions = {"sliding door", "instrument tray",
                                          "operating table", "steel"};

    explicit AlgebraGen(std::uint64_t seed) : rng(seed) {}

    dt::DtFrame frame() {
        dt::DtFrame out;
        out.video_id = "algebra";
        out.frame_index = 0;
        out.timestamp_ms = 0.0;
        out.width = 40;
        out.height = 30;
        std::size_t count = 2 + rng() % 5;
        for (std::size_t i = 0; i < count; ++i) {
            dt::Instance inst;
            inst.instance_id = static_cast<std::int64_t>(i);
            std::size_t which = rng() % labels.size();
            inst.label = labels[which];
            inst.description = descriptions[which];
            int w = 2 + static_cast<int>(rng() % 10);
            int h = 2 + static_cast<int>(rng() % 8);
            int x = static_cast<int>(rng() % (40 - w));
            int y = static_cast<int>(rng() % (30 - h));
            dt::BitGrid grid(40, 30);
            for (int r = y; r < y + h; ++r)
                for (int c = x; c < x + w; ++c) grid.set(r, c, true);
            inst.mask = dt::encode_rle(grid);
            inst.bbox = {static_cast<double>(x), static_cast<double>(y),
                         static_cast<double>(x + w),
                         static_cast<double>(y + h)};
            inst.det_confidence = 0.5 + 0.001 * static_cast<double>(rng() % 500);
            inst.mask_confidence = 1.0;
            inst.depth = dt::DepthStats{
                0.1 + 0.001 * static_cast<double>(rng() % 800), 0.0,
                inst.mask.area()};
            out.instances.push_back(std::move(inst));
        }
        return out;
    }

    std::string label_atom() {
        return "LABEL(\"" + labels[rng() % labels.size()] + "\")";
    }

    std::string semantic_filter() {
        std::string text = rng() % 2 == 0
                               ? label_atom()
                               : "SEM(\"" + questions[rng() % questions.size()] +
                                     "\")";
        if (rng() % 3 == 0) text = "NOT " + text;
        if (rng() % 2 == 0)
            text += (rng() % 2 == 0 ? " AND " : " OR ") + label_atom();
        return text;
    }

    std::string spatial_filter() {
        const char* preds[] = {"LEFT_OF",     "RIGHT_OF",    "ABOVE",
                               "BELOW",       "NEARER_THAN", "FARTHER_THAN"};
        std::string anchor = "ANCHOR(" + label_atom() + ")";
        switch (rng() % 4) {
            case 0:
                return std::string(preds[rng() % 6]) + "(" + anchor + ")";
            case 1:
                return "WITHIN_PX(" +
                       std::to_string(4 + static_cast<int>(rng() % 30)) +
                       ", " + anchor + ")";
            case 2:
                return "NEAREST_K(" +
                       std::to_string(1 + static_cast<int>(rng() % 3)) + ", " +
                       anchor + ")";
            default:
                return "LARGEST_K(" +
                       std::to_string(1 + static_cast<int>(rng() % 3)) + ")";
        }
    }

    rs::Requirement requirement(const std::string& id) {
        rs::Requirement req;
        req.requirement_id = id;
        if (rng() % 2 == 0) {
            req.kind = rs::RequirementKind::Semantic;
            req.filter = rs::parse_filter(semantic_filter());
        } else {
            req.kind = rs::RequirementKind::Spatial;
            req.filter = rs::parse_filter(spatial_filter());
        }
        return req;
    }
};

std::vector<std::int64_t> intersect_sorted(
    const std::vector<std::vector<std::int64_t>>& sets) {
    if (sets.empty()) return {};
    std::vector<std::int64_t> acc = sets[0];
    for (std::size_t i = 1; i < sets.size(); ++i) {
        std::vector<std::int64_t> next;
        std::set_intersection(acc.begin(), acc.end(), sets[i].begin(),
                              sets[i].end(), std::back_inserter(next));
        acc = std::move(next);
    }
    return acc;
}

void set_algebra() {
    synth::ScriptedLlm llm =
        synth::ScriptedLlm::from_json(json{{"rules", json::array()}});
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        AlgebraGen gen(1000 + seed);
        dt::DtFrame frame = gen.frame();
        rs::ReasoningPlan plan;
        plan.query = "property trial " + std::to_string(seed);
        std::size_t req_count = 1 + gen.rng() % 3;
        for (std::size_t k = 0; k < req_count; ++k)
            plan.requirements.push_back(
                gen.requirement("r" + std::to_string(k)));

        rs::FrameSegmentation base = rs::segment_frame(plan, frame, llm);
        require(base.final_set == intersect_sorted(base.candidate_sets),
                "final set is not the intersection of the candidate sets");

        // Each requirement alone yields the same candidate set it
        // contributed to the joint run.
        for (std::size_t k = 0; k < plan.requirements.size(); ++k) {
            rs::ReasoningPlan single;
            single.query = plan.query;
            single.requirements.push_back(plan.requirements[k]);
            rs::FrameSegmentation alone =
                rs::segment_frame(single, frame, llm);
            require(alone.candidate_sets.at(0) == base.candidate_sets.at(k),
                    "candidate set differs when the requirement runs alone");
        }

        // Requirement order is irrelevant.
        rs::ReasoningPlan shuffled = plan;
        std::shuffle(shuffled.requirements.begin(),
                     shuffled.requirements.end(), gen.rng);
        rs::FrameSegmentation permuted =
            rs::segment_frame(shuffled, frame, llm);
        require(permuted.final_set == base.final_set,
                "final set changed under requirement permutation");
        require(permuted.mask == base.mask,
                "mask changed under requirement permutation");

        // Restating a requirement changes nothing.
        rs::ReasoningPlan doubled = plan;
        rs::Requirement dup = plan.requirements[gen.rng() % req_count];
        dup.requirement_id += "_dup";
        doubled.requirements.push_back(dup);
        require(rs::segment_frame(doubled, frame, llm).final_set ==
                    base.final_set,
                "duplicate requirement changed the final set");

        // Adding a requirement can only narrow the final set.
        rs::ReasoningPlan extended = plan;
        extended.requirements.push_back(gen.requirement("extra"));
        std::vector<std::int64_t> narrowed =
            rs::segment_frame(extended, frame, llm).final_set;
        require(std::includes(base.final_set.begin(), base.final_set.end(),
                              narrowed.begin(), narrowed.end()),
                "added requirement enlarged the final set");
    }
}

// ---------------------------------------------------------------------------
// Criterion 6: box jitter barely dents end-to-end quality.

void noise_robustness() {
    std::vector<synth::ScenarioSpec> specs = load_benchmark_scenarios();
    fs::path gt_dir = work_root() / "noise_gt";
    synth::write_corpus(specs, gt_dir);
    synth::ScriptedLlm llm =
        synth::ScriptedLlm::from_file(gt_dir / "llm_rules.json");

    double g_sum = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        fs::path seed_dir =
            work_root() / ("noise_seed_" + std::to_string(seed));
        fs::create_directories(seed_dir);
        fs::copy_file(gt_dir / "annotations.json",
                      seed_dir / "annotations.json",
                      fs::copy_options::overwrite_existing);
        for (const auto& spec : specs) {
            synth::World world = synth::generate_world(spec);
            synth::NoiseConfig noise;
            noise.bbox_sigma = 2.0;
            noise.seed = seed;
            synth::SyntheticBackend backend(world, noise);
            perception::PipelineConfig config =
                synth::corpus_pipeline_config(spec);
            std::vector<dt::DtFrame> frames;
            for (const auto& world_frame : world.frames)
                frames.push_back(perception::build_dt_frame(
                    world_frame.image, spec.name, world_frame.frame_index,
                    world.timestamp_ms(world_frame.frame_index), config,
                    backend));
            fs::create_directories(seed_dir / spec.name / "gt");
            dt::write_stream_file(frames, seed_dir / spec.name / "gt" /
                                              (spec.name + ".dt.jsonl"));
        }
        eval::BenchmarkOptions opts;
        opts.jobs = 2;
        eval::BenchmarkReport report =
            eval::run_benchmark(seed_dir / "annotations.json", llm, opts);
        g_sum += report.g_overall.mean;
    }
    double g_mean = g_sum / 5.0;
    require(g_mean >= 90.0, "seed-averaged gIoU " + std::to_string(g_mean) +
                                " below 90");
}

// ---------------------------------------------------------------------------
// Criterion 7: analysis metrics land exactly on the authored event frames.

const agent::SubqueryOutcome& find_subquery(
    const agent::AnalysisOutcome& outcome, const std::string& id) {
    for (const auto& sub : outcome.subqueries)
        if (sub.plan.subquery_id == id) return sub;
    throw CheckFailure("analysis produced no subquery named " + id);
}

agent::AnalysisOutcome analyze_scenario(const synth::ScenarioSpec& spec,
                                        const fs::path& dir,
                                        const std::string& query) {
    synth::write_corpus({spec}, dir);
    synth::ScriptedLlm llm =
        synth::ScriptedLlm::from_file(dir / "llm_rules.json");
    std::vector<dt::DtFrame> frames = dt::read_stream_file(
        dir / spec.name / "gt" / (spec.name + ".dt.jsonl"));
    agent::AnalyzeOptions opts;
    opts.fps = spec.fps;
    opts.clock = &util::fixed_clock_instance();
    return agent::analyze(query, frames, llm, opts);
}

std::int64_t event_start(const synth::ScenarioSpec& spec,
                         const std::string& name) {
    for (const auto& event : spec.events)
        if (event.name == name) return event.ranges.at(0).first;
    throw CheckFailure("scenario has no event named " + name);
}

void agent_fidelity() {
    // Two authored door openings, at frames 10 and 30.
    synth::ScenarioSpec door =
        synth::load_scenario_file(scenario_dir() / "door_events_long.yaml");
    agent::AnalysisOutcome door_outcome =
        analyze_scenario(door, work_root() / "agent_door",
                         "summarize the long door recording");
    const agent::SubqueryOutcome& openings =
        find_subquery(door_outcome, "door_openings");
    require(openings.error.empty(), "door subquery failed: " + openings.error);
    require(openings.metrics.at("opens") == 2,
            "door opening count is not exactly 2");
    require(openings.key_frames == std::vector<std::int64_t>{10, 30},
            "door key frames are not {10, 30}");

    // First-appearance deltas match the authored phase boundaries.
    synth::ScenarioSpec phase =
        synth::load_scenario_file(scenario_dir() / "phase_transitions.yaml");
    agent::AnalysisOutcome phase_outcome =
        analyze_scenario(phase, work_root() / "agent_phase",
                         "review the workflow phase");
    std::int64_t patient_start = event_start(phase, "patient_in");
    std::int64_t operating_start = event_start(phase, "operating");
    const agent::SubqueryOutcome& patient =
        find_subquery(phase_outcome, "patient_span");
    require(patient.metrics.at("arrival_frame") == patient_start,
            "patient arrival frame missed the authored event start");
    const agent::SubqueryOutcome& operative =
        find_subquery(phase_outcome, "operative_span");
    require(operative.key_frames ==
                std::vector<std::int64_t>{operating_start},
            "operative span does not start at the authored frame");
    require(patient.metrics.at("arrival_frame").get<std::int64_t>() +
                    (operating_start - patient_start) ==
                operating_start,
            "phase gap delta does not match the authored events");

    // Operator identities over random boolean series.
    std::mt19937_64 rng(7007);
    const std::string text =
        "p = PRESENCE\n"
        "rises = RISING_EDGES(p)\n"
        "falls = FALLING_EDGES(p)\n"
        "true_frames = COUNT_TRUE(p)\n"
        "spans = DURATIONS(p)\n"
        "OUTPUT rises, falls, true_frames, spans\n";
    agent::AnalysisProgram program = agent::AnalysisProgram::parse(text);
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t n = 1 + rng() % 32;
        agent::SeriesBundle bundle;
        bundle.fps = 2.0;
        for (std::size_t i = 0; i < n; ++i) {
            bool on = rng() % 2 == 0;
            bundle.frame_indices.push_back(static_cast<std::int64_t>(i));
            bundle.presence.push_back(on ? 1 : 0);
            bundle.area.push_back(on ? 10.0 : 0.0);
            bundle.count.push_back(on ? 1.0 : 0.0);
            bundle.centroid_x.push_back(on ? 1.0 : std::nan(""));
            bundle.centroid_y.push_back(on ? 1.0 : std::nan(""));
        }
        json metrics = program.evaluate(bundle).metrics;
        std::int64_t rises = metrics.at("rises");
        std::int64_t falls = metrics.at("falls");
        std::int64_t true_frames = metrics.at("true_frames_frames");
        std::int64_t spans = metrics.at("spans_count");
        std::int64_t span_sum = 0;
        for (std::int64_t k = 1; k <= spans; ++k)
            span_sum += metrics
                            .at("spans_" + std::to_string(k) + "_frames")
                            .get<std::int64_t>();
        require(span_sum == true_frames,
                "COUNT_TRUE differs from the sum of DURATIONS");
        require(std::llabs(rises - falls) <= 1,
                "rising/falling counts differ by more than one");
    }
}

// ---------------------------------------------------------------------------
// Criterion 8: the full pipeline is byte-deterministic.

void produce_artifacts(const fs::path& dir) {
    synth::ScenarioSpec spec =
        synth::load_scenario_file(scenario_dir() / "door_events.yaml");
    synth::write_corpus({spec}, dir / "corpus");
    synth::World world = synth::generate_world(spec);
    std::vector<dt::DtFrame> frames = synth::reference_stream(world);
    dt::write_stream_file(frames, dir / "rebuilt.dt.jsonl");

    synth::ScriptedLlm llm =
        synth::ScriptedLlm::from_file(dir / "corpus" / "llm_rules.json");
    rs::EngineOptions engine_opts;
    engine_opts.clock = &util::fixed_clock_instance();
    rs::SegmentationRun run = rs::segment_frames("the door standing open",
                                                 frames, llm, engine_opts);
    spill(dir / "trace.json", rs::run_to_json(run).dump(2) + "\n");

    eval::BenchmarkOptions bench_opts;
    bench_opts.clock = &util::fixed_clock_instance();
    eval::BenchmarkReport report = eval::run_benchmark(
        dir / "corpus" / "annotations.json", llm, bench_opts);
    spill(dir / "report.json", eval::report_to_json(report).dump(2) + "\n");

    agent::AnalyzeOptions agent_opts;
    agent_opts.fps = spec.fps;
    agent_opts.clock = &util::fixed_clock_instance();
    agent::AnalysisOutcome outcome = agent::analyze(
        "summarize the short door recording", frames, llm, agent_opts);
    spill(dir / "analysis.json", agent::analysis_to_json(outcome).dump(2) + "\n");
    spill(dir / "analysis.md", agent::analysis_markdown(outcome));
}

void determinism() {
    fs::path a = work_root() / "det_a";
    fs::path b = work_root() / "det_b";
    produce_artifacts(a);
    produce_artifacts(b);
    const char* artifacts[] = {
        "corpus/annotations.json",
        "corpus/llm_rules.json",
        "corpus/door_events/world.json",
        "corpus/door_events/gt/door_events.dt.jsonl",
        "rebuilt.dt.jsonl",
        "trace.json",
        "report.json",
        "analysis.json",
        "analysis.md",
    };
    for (const char* rel : artifacts)
        require(slurp(a / rel) == slurp(b / rel),
                std::string(rel) + " differs between identical runs");
    require(slurp(a / "rebuilt.dt.jsonl") ==
                slurp(a / "corpus" / "door_events" / "gt" /
                      "door_events.dt.jsonl"),
            "rebuilt stream differs from the generated reference stream");
}

// ---------------------------------------------------------------------------
// Criterion 9: the benchmark table renders mean±std to two decimals.

void report_format() {
    require(eval::format_mean_std({75.8, 3.58, 12}) == "75.80±3.58",
            "mean±std formatting is off");
    require(eval::format_mean_std({100.0, 0.0, 3}) == "100.00±0.00",
            "degenerate mean±std formatting is off");

    eval::BenchmarkReport report;
    report.g_by_category["semantic"] = {75.8, 3.58, 12};
    report.c_by_category["semantic"] = {76.85, 2.11, 12};
    report.g_by_category["spatial"] = {82.48, 0.5, 4};
    report.c_by_category["spatial"] = {81.07, 1.25, 4};
    report.g_overall = {79.55, 2.0, 16};
    report.c_overall = {77.25, 1.9, 16};
    std::string text = eval::report_to_text(report);
    require(text.find("category    samples  gIoU           cIoU") !=
                std::string::npos,
            "table header missing");
    require(text.find("semantic") != std::string::npos &&
                text.find("spatial") != std::string::npos &&
                text.find("overall") != std::string::npos,
            "category rows missing");
    require(text.find("75.80±3.58") != std::string::npos,
            "formatted cell missing");
    require(text.find("mean seconds per frame: 0") != std::string::npos,
            "timing line missing");
}

// ---------------------------------------------------------------------------
// Criterion 10: optional smoke test against a live model endpoint.

std::string live_smoke() {
    const char* key = std::getenv("ORDIRS_LLM_API_KEY");
    if (key == nullptr || *key == '\0')
        return "SKIPPED (ORDIRS_LLM_API_KEY not set)";
    rs::LiveLlmConfig config;
    config.api_key = key;
    if (const char* v = std::getenv("ORDIRS_LLM_URL"); v != nullptr && *v)
        config.base_url = v;
    if (const char* v = std::getenv("ORDIRS_LLM_MODEL"); v != nullptr && *v)
        config.model = v;
    rs::LiveLlm llm(config);
    const char* queries[] = {
        "the instrument tray closest to the operating table",
        "the person to the left of the anesthesia machine",
        "the largest object in the room",
        "the door standing open at the back of the room",
        "the monitor above the patient",
    };
    for (const char* query : queries) {
        rs::ReasoningPlan plan = rs::decompose_query(query, llm);
        require(!plan.requirements.empty(),
                std::string("empty plan for: ") + query);
    }
    return "";
}

}  // namespace

int main() {
    std::error_code ec;
    fs::remove_all(work_root(), ec);
    fs::create_directories(work_root());

    int failures = 0;
    auto criterion = [&](int number, const std::string& title,
                         const std::function<std::string()>& body) {
        std::string verdict = "PASS";
        std::string detail;
        try {
            std::string note = body();
            if (!note.empty()) verdict = note;
        } catch (const std::exception& e) {
            verdict = "FAIL";
            detail = std::string(" - ") + e.what();
            ++failures;
        }
        std::cout << "criterion " << number << " (" << title
                  << "): " << verdict << detail << "\n"
                  << std::flush;
    };
    auto plain = [](const std::function<void()>& body) {
        return [body]() -> std::string {
            body();
            return "";
        };
    };

    criterion(1, "oracle end-to-end benchmark", plain(oracle_end_to_end));
    criterion(2, "mask metric oracle agreement", plain(metric_oracle));
    criterion(3, "run-length codec involution", plain(rle_codec));
    criterion(4, "filter language round-trip and rejection",
              plain(filter_round_trip));
    criterion(5, "candidate set algebra", plain(set_algebra));
    criterion(6, "box jitter robustness", plain(noise_robustness));
    criterion(7, "workflow metric fidelity", plain(agent_fidelity));
    criterion(8, "byte-deterministic artifacts", plain(determinism));
    criterion(9, "report table formatting", plain(report_format));
    criterion(10, "live model decomposition smoke", live_smoke);

    return failures == 0 ? 0 : 1;
}
