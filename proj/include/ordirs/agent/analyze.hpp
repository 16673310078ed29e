#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "ordirs/agent/program.hpp"
#include "ordirs/dt/types.hpp"
#include "ordirs/rs/engine.hpp"
#include "ordirs/rs/llm.hpp"
#include "ordirs/util/clock.hpp"

namespace ordirs::agent {

/// One planned sub-question. Quantitative subqueries carry an analysis
/// program; semantic ones are answered with a cited narrative.
struct SubqueryPlan {
    std::string subquery_id;
    std::string text;
    std::string aspect;
    std::string mode;  // "quantitative" | "semantic"
    std::string program;
};

struct SubqueryOutcome {
    SubqueryPlan plan;
    rs::SegmentationRun run;
    nlohmann::json metrics;
    std::vector<std::int64_t> key_frames;
    std::string narrative;
    /// Non-empty when this subquery failed; metrics are then absent.
    std::string error;
};

struct AnalysisOutcome {
    std::string query;
    std::vector<std::string> aspects;
    std::vector<SubqueryOutcome> subqueries;
    std::string report;
    /// False when the report came from the deterministic fallback composer.
    bool report_from_model = true;
    std::vector<Transcript> transcripts;
};

struct AnalyzeOptions {
    int jobs = 1;
    const util::Clock* clock = nullptr;
    double fps = 1.0;
    /// Instances summarized per narrative request.
    std::size_t chunk_size = 40;
};

/// Builds the per-frame signal series from a segmentation run. A frame that
/// failed or matched nothing contributes presence 0, area 0, count 0, and
/// NaN centroids.
SeriesBundle series_from_run(const rs::SegmentationRun& run, double fps);

/// Full workflow analysis: plan aspects and subqueries with the model, run
/// each subquery through the reasoning engine, evaluate programs or compose
/// cited narratives, and assemble the final report (falling back to a
/// deterministic composition when the model cannot produce one).
AnalysisOutcome analyze(const std::string& query,
                        const std::vector<dt::DtFrame>& frames,
                        rs::LlmClient& llm, const AnalyzeOptions& opts = {});

nlohmann::json analysis_to_json(const AnalysisOutcome& outcome);

/// Evidence links per subquery: (frame_index, relative image path).
using EvidenceIndex =
    std::map<std::string, std::vector<std::pair<std::int64_t, std::string>>>;

std::string analysis_markdown(const AnalysisOutcome& outcome,
                              const EvidenceIndex& evidence = {});

inline constexpr const char* kAgentAspectsSchema = "agent_aspects_v1";
inline constexpr const char* kAgentSubqueriesSchema = "agent_subqueries_v1";
inline constexpr const char* kNarrativeSchema = "narrative_v1";
inline constexpr const char* kReportSchema = "report_v1";

}  // namespace ordirs::agent
