#include "ordirs/agent/analyze.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "ordirs/errors.hpp"
#include "ordirs/spatial/mask_ops.hpp"
#include "ordirs/util/numeric.hpp"

namespace ordirs::agent {
namespace {

using nlohmann::json;

constexpr const char* kAspectsInstructions =
    "You are planning the analysis of an operating room video. The user's "
    "question is in the INPUT payload. Break the question into the distinct "
    "aspects of workflow it touches (door traffic, staff positioning, phase "
    "timing, equipment usage, and so on).\n"
    "Respond with a single JSON document, no prose:\n"
    "{\"aspects\": [\"...\", ...]}\n"
    "List between one and eight short aspect names.";

constexpr const char* kSubqueriesInstructions =
    "You are planning the analysis of an operating room video. The INPUT "
    "payload carries the user's question and the agreed aspects. Produce one "
    "or more subqueries, each tied to an aspect. A subquery's text is a "
    "segmentation query over the scene (it selects the instances to track). "
    "Choose mode \"quantitative\" when the answer is a measurement over "
    "time, and attach a program in the analysis language below; choose "
    "\"semantic\" when the answer is a described observation.\n"
    "Analysis language: one statement per line, 'name = expression', ending "
    "with 'OUTPUT name, ...'. Sources: PRESENCE (bool series), AREA, COUNT, "
    "CENTROID_X, CENTROID_Y (number series). Functions: "
    "THRESHOLD(series, t), RISING_EDGES(b), FALLING_EDGES(b), FIRST_TRUE(b), "
    "LAST_TRUE(b), COUNT_TRUE(b), DURATIONS(b), BETWEEN(frame, frame), "
    "RATE(count, FPS). Only non-series values can be OUTPUT.\n"
    "Respond with a single JSON document, no prose:\n"
    "{\"subqueries\": [{\"subquery_id\": \"...\", \"text\": \"...\", "
    "\"aspect\": \"...\", \"mode\": \"quantitative\"|\"semantic\", "
    "\"program\": \"...\"}]}\n"
    "Omit \"program\" for semantic subqueries.";

constexpr const char* kNarrativeInstructions =
    "You are describing one aspect of operating room activity. The INPUT "
    "payload carries the subquery, a summary of the matching instances, and "
    "the frame indices they appear in.\n"
    "Respond with a single JSON document, no prose:\n"
    "{\"narrative\": \"one or two sentences\", \"citations\": [frame "
    "indices drawn from the payload's frames]}";

constexpr const char* kReportInstructions =
    "You are writing the final answer to a question about operating room "
    "workflow. The INPUT payload carries the question and the findings of "
    "each subquery (metrics or narratives).\n"
    "Respond with a single JSON document, no prose:\n"
    "{\"report\": \"a short paragraph answering the question\"}";

std::vector<std::string> validate_aspects(const std::string& response) {
    json doc = rs::parse_llm_json(response);
    if (!doc.is_object() || !doc.contains("aspects") ||
        !doc.at("aspects").is_array())
        throw ProtocolError("response must be {\"aspects\": [...]}");
    std::vector<std::string> aspects;
    for (const json& a : doc.at("aspects")) {
        if (!a.is_string() || a.get<std::string>().empty())
            throw ProtocolError("aspects must be non-empty strings");
        aspects.push_back(a.get<std::string>());
    }
    if (aspects.empty() || aspects.size() > 8)
        throw ProtocolError("between one and eight aspects are required");
    return aspects;
}

std::vector<SubqueryPlan> validate_subqueries(
    const std::string& response, const std::vector<std::string>& aspects) {
    json doc = rs::parse_llm_json(response);
    if (!doc.is_object() || !doc.contains("subqueries") ||
        !doc.at("subqueries").is_array())
        throw ProtocolError("response must be {\"subqueries\": [...]}");
    std::vector<SubqueryPlan> plans;
    std::set<std::string> ids;
    for (const json& s : doc.at("subqueries")) {
        if (!s.is_object())
            throw ProtocolError("each subquery must be an object");
        SubqueryPlan plan;
        plan.subquery_id = s.value("subquery_id", "");
        plan.text = s.value("text", "");
        plan.aspect = s.value("aspect", "");
        plan.mode = s.value("mode", "");
        plan.program = s.value("program", "");
        if (plan.subquery_id.empty())
            throw ProtocolError("subquery_id must be non-empty");
        if (!ids.insert(plan.subquery_id).second)
            throw ProtocolError("subquery_id '" + plan.subquery_id +
                                "' is repeated");
        if (plan.text.empty())
            throw ProtocolError("subquery '" + plan.subquery_id +
                                "' needs text");
        if (std::find(aspects.begin(), aspects.end(), plan.aspect) ==
            aspects.end())
            throw ProtocolError("subquery '" + plan.subquery_id +
                                "' names an unknown aspect '" + plan.aspect +
                                "'");
        if (plan.mode != "quantitative" && plan.mode != "semantic")
            throw ProtocolError("subquery '" + plan.subquery_id +
                                "' mode must be quantitative or semantic");
        if (plan.mode == "quantitative") {
            if (plan.program.empty())
                throw ProtocolError("quantitative subquery '" +
                                    plan.subquery_id + "' needs a program");
            try {
                AnalysisProgram::parse(plan.program);
            } catch (const ProgramError& e) {
                throw ProtocolError("subquery '" + plan.subquery_id +
                                    "' program is invalid: " + e.what());
            }
        }
        plans.push_back(std::move(plan));
    }
    if (plans.empty()) throw ProtocolError("at least one subquery is required");
    if (plans.size() > 12)
        throw ProtocolError("at most twelve subqueries are allowed");
    return plans;
}

struct InstanceDigest {
    std::int64_t frame_index = 0;
    std::int64_t instance_id = 0;
    std::string label;
    std::string description;
};

std::string joined_labels(const std::vector<InstanceDigest>& digests) {
    std::vector<std::string> labels;
    for (const auto& digest : digests)
        if (std::find(labels.begin(), labels.end(), digest.label) ==
            labels.end())
            labels.push_back(digest.label);
    std::string out;
    for (const auto& label : labels) {
        if (!out.empty()) out += ", ";
        out += label;
    }
    return out;
}

void run_semantic_subquery(SubqueryOutcome& outcome,
                           const std::vector<dt::DtFrame>& frames,
                           rs::LlmClient& llm, const AnalyzeOptions& opts,
                           std::vector<Transcript>& transcripts) {
    std::vector<InstanceDigest> digests;
    std::set<std::int64_t> matched_frames;
    for (std::size_t i = 0; i < outcome.run.results.size(); ++i) {
        const auto& result = outcome.run.results[i];
        if (!result.error.empty() || result.final_set.empty()) continue;
        matched_frames.insert(result.frame_index);
        for (std::int64_t id : result.final_set) {
            const dt::Instance* inst = frames[i].find_instance(id);
            if (inst == nullptr) continue;
            digests.push_back({result.frame_index, id, inst->label,
                               inst->description});
        }
    }

    outcome.metrics = json::object();
    outcome.metrics["matched_frames"] =
        static_cast<std::int64_t>(matched_frames.size());
    outcome.metrics["instances"] = static_cast<std::int64_t>(digests.size());

    if (digests.empty()) {
        outcome.narrative = "No matching activity was observed.";
        return;
    }

    std::set<std::int64_t> cited;
    std::vector<std::string> narratives;
    for (std::size_t start = 0; start < digests.size();
         start += opts.chunk_size) {
        std::size_t end = std::min(digests.size(), start + opts.chunk_size);
        std::set<std::int64_t> chunk_frames;
        std::int64_t first = std::numeric_limits<std::int64_t>::max();
        std::int64_t last = std::numeric_limits<std::int64_t>::min();
        for (std::size_t i = start; i < end; ++i) {
            chunk_frames.insert(digests[i].frame_index);
            first = std::min(first, digests[i].frame_index);
            last = std::max(last, digests[i].frame_index);
        }
        std::vector<InstanceDigest> chunk(digests.begin() + start,
                                          digests.begin() + end);
        json payload;
        payload["subquery"] = outcome.plan.text;
        payload["summary"] = {
            {"instances", static_cast<std::int64_t>(chunk.size())},
            {"frames", static_cast<std::int64_t>(chunk_frames.size())},
            {"first_frame", first},
            {"last_frame", last},
            {"labels", joined_labels(chunk)},
        };
        payload["frames"] = json(chunk_frames);

        std::string narrative_text;
        std::vector<std::int64_t> citations;
        auto validate = [&](const std::string& response) {
            json doc = rs::parse_llm_json(response);
            if (!doc.is_object() || !doc.contains("narrative") ||
                !doc.at("narrative").is_string() ||
                doc.at("narrative").get<std::string>().empty())
                throw ProtocolError(
                    "response needs a non-empty 'narrative' string");
            if (!doc.contains("citations") || !doc.at("citations").is_array())
                throw ProtocolError("response needs a 'citations' array");
            std::vector<std::int64_t> seen;
            for (const json& c : doc.at("citations")) {
                if (!c.is_number_integer())
                    throw ProtocolError("citations must be frame indices");
                std::int64_t frame = c.get<std::int64_t>();
                if (chunk_frames.count(frame) == 0)
                    throw ProtocolError(
                        "citation " + std::to_string(frame) +
                        " is not among the payload's frames");
                seen.push_back(frame);
            }
            narrative_text = doc.at("narrative").get<std::string>();
            citations = std::move(seen);
        };
        rs::exchange_with_retries(
            llm, kNarrativeSchema,
            rs::build_prompt(kNarrativeInstructions, payload), validate,
            transcripts);
        narratives.push_back(narrative_text);
        cited.insert(citations.begin(), citations.end());
    }

    std::string joined;
    for (const auto& narrative : narratives) {
        if (!joined.empty()) joined += " ";
        joined += narrative;
    }
    outcome.narrative = joined;
    outcome.key_frames.assign(cited.begin(), cited.end());
}

std::string metrics_sentence(const json& metrics) {
    std::string out;
    for (const auto& [key, value] : metrics.items()) {
        if (!out.empty()) out += ", ";
        out += key + " = ";
        if (value.is_number_float())
            out += util::format_sig6(value.get<double>());
        else
            out += value.dump();
    }
    return out;
}

std::string fallback_report(const AnalysisOutcome& outcome) {
    std::ostringstream out;
    out << "Question: " << outcome.query << "\n";
    for (const auto& sub : outcome.subqueries) {
        out << "- " << sub.plan.text << ": ";
        if (!sub.error.empty())
            out << "could not be answered (" << sub.error << ")";
        else if (sub.plan.mode == "semantic")
            out << sub.narrative;
        else
            out << metrics_sentence(sub.metrics);
        out << "\n";
    }
    return out.str();
}

}  // namespace

SeriesBundle series_from_run(const rs::SegmentationRun& run, double fps) {
    SeriesBundle bundle;
    bundle.fps = fps;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const auto& result : run.results) {
        bundle.frame_indices.push_back(result.frame_index);
        bool present = result.error.empty() && !result.empty_flag;
        bundle.presence.push_back(present ? 1 : 0);
        double area = present ? static_cast<double>(result.mask.area()) : 0.0;
        bundle.area.push_back(area);
        bundle.count.push_back(
            result.error.empty()
                ? static_cast<double>(result.final_set.size())
                : 0.0);
        if (present && area > 0.0) {
            auto [cx, cy] = spatial::centroid(result.mask);
            bundle.centroid_x.push_back(cx);
            bundle.centroid_y.push_back(cy);
        } else {
            bundle.centroid_x.push_back(nan);
            bundle.centroid_y.push_back(nan);
        }
    }
    return bundle;
}

AnalysisOutcome analyze(const std::string& query,
                        const std::vector<dt::DtFrame>& frames,
                        rs::LlmClient& llm, const AnalyzeOptions& opts) {
    if (query.empty()) throw InputError("analysis question must be non-empty");
    if (!(opts.fps > 0.0)) throw InputError("fps must be positive");

    AnalysisOutcome outcome;
    outcome.query = query;

    {
        json payload = {{"query", query}};
        rs::exchange_with_retries(
            llm, kAgentAspectsSchema,
            rs::build_prompt(kAspectsInstructions, payload),
            [&](const std::string& response) {
                outcome.aspects = validate_aspects(response);
            },
            outcome.transcripts);
    }

    std::vector<SubqueryPlan> plans;
    {
        json payload = {{"query", query}, {"aspects", outcome.aspects}};
        rs::exchange_with_retries(
            llm, kAgentSubqueriesSchema,
            rs::build_prompt(kSubqueriesInstructions, payload),
            [&](const std::string& response) {
                plans = validate_subqueries(response, outcome.aspects);
            },
            outcome.transcripts);
    }

    rs::EngineOptions engine_opts;
    engine_opts.jobs = opts.jobs;
    engine_opts.clock = opts.clock;

    for (const auto& plan : plans) {
        SubqueryOutcome sub;
        sub.plan = plan;
        sub.metrics = json::object();
        try {
            sub.run = rs::segment_frames(plan.text, frames, llm, engine_opts);
            if (plan.mode == "quantitative") {
                AnalysisProgram program = AnalysisProgram::parse(plan.program);
                MetricOutputs outputs =
                    program.evaluate(series_from_run(sub.run, opts.fps));
                sub.metrics = std::move(outputs.metrics);
                sub.key_frames = std::move(outputs.key_frames);
            } else {
                run_semantic_subquery(sub, frames, llm, opts,
                                      outcome.transcripts);
            }
        } catch (const Error& e) {
            sub.error = e.what();
            sub.metrics = json::object();
            sub.key_frames.clear();
        }
        outcome.subqueries.push_back(std::move(sub));
    }

    json findings = json::array();
    for (const auto& sub : outcome.subqueries) {
        json f = {{"subquery_id", sub.plan.subquery_id},
                  {"aspect", sub.plan.aspect},
                  {"mode", sub.plan.mode},
                  {"text", sub.plan.text}};
        if (!sub.error.empty())
            f["error"] = sub.error;
        else if (sub.plan.mode == "semantic")
            f["narrative"] = sub.narrative;
        else
            f["metrics"] = sub.metrics;
        findings.push_back(std::move(f));
    }
    try {
        json payload = {{"query", query}, {"findings", findings}};
        rs::exchange_with_retries(
            llm, kReportSchema, rs::build_prompt(kReportInstructions, payload),
            [&](const std::string& response) {
                json doc = rs::parse_llm_json(response);
                if (!doc.is_object() || !doc.contains("report") ||
                    !doc.at("report").is_string() ||
                    doc.at("report").get<std::string>().empty())
                    throw ProtocolError(
                        "response needs a non-empty 'report' string");
                outcome.report = doc.at("report").get<std::string>();
            },
            outcome.transcripts);
        outcome.report_from_model = true;
    } catch (const Error&) {
        outcome.report = fallback_report(outcome);
        outcome.report_from_model = false;
    }
    return outcome;
}

nlohmann::json analysis_to_json(const AnalysisOutcome& outcome) {
    json subqueries = json::array();
    for (const auto& sub : outcome.subqueries) {
        json s = {{"subquery_id", sub.plan.subquery_id},
                  {"text", sub.plan.text},
                  {"aspect", sub.plan.aspect},
                  {"mode", sub.plan.mode},
                  {"metrics", sub.metrics},
                  {"key_frames", sub.key_frames},
                  {"narrative", sub.narrative},
                  {"error", sub.error}};
        if (!sub.plan.program.empty()) s["program"] = sub.plan.program;
        subqueries.push_back(std::move(s));
    }
    return json{{"query", outcome.query},
                {"aspects", outcome.aspects},
                {"subqueries", std::move(subqueries)},
                {"report", outcome.report},
                {"report_from_model", outcome.report_from_model}};
}

std::string analysis_markdown(const AnalysisOutcome& outcome,
                              const EvidenceIndex& evidence) {
    std::ostringstream out;
    out << "# Workflow analysis\n\n";
    out << "**Question:** " << outcome.query << "\n\n";
    out << outcome.report << "\n";
    if (!outcome.report_from_model)
        out << "\n*(composed without model assistance)*\n";

    out << "\n## Aspects\n\n";
    for (const auto& aspect : outcome.aspects) out << "- " << aspect << "\n";

    for (const auto& sub : outcome.subqueries) {
        out << "\n## " << sub.plan.subquery_id << ": " << sub.plan.text
            << "\n\n";
        out << "*Aspect: " << sub.plan.aspect << ", mode: " << sub.plan.mode
            << "*\n\n";
        if (!sub.error.empty()) {
            out << "This subquery failed: " << sub.error << "\n";
            continue;
        }
        if (!sub.narrative.empty()) out << sub.narrative << "\n\n";
        if (sub.metrics.is_object() && !sub.metrics.empty()) {
            out << "| metric | value |\n|---|---|\n";
            for (const auto& [key, value] : sub.metrics.items()) {
                out << "| " << key << " | ";
                if (value.is_number_float())
                    out << util::format_sig6(value.get<double>());
                else
                    out << value.dump();
                out << " |\n";
            }
            out << "\n";
        }
        if (!sub.key_frames.empty()) {
            out << "Key frames:";
            for (std::int64_t frame : sub.key_frames) out << " " << frame;
            out << "\n";
        }
        auto ev = evidence.find(sub.plan.subquery_id);
        if (ev != evidence.end() && !ev->second.empty()) {
            out << "\n";
            for (const auto& [frame, path] : ev->second)
                out << "![frame " << frame << "](" << path << ")\n";
        }
    }
    return out.str();
}

}  // namespace ordirs::agent
