#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "ordirs/dt/types.hpp"
#include "ordirs/rs/plan.hpp"
#include "ordirs/util/clock.hpp"

namespace ordirs::rs {

/// One atom evaluation against one instance. `source` is "llm" for SEM
/// judgments and "geometry" for LABEL and spatial atoms.
struct TraceRecord {
    std::string atom;  // canonical printed form of the atom
    std::int64_t instance_id = 0;
    bool verdict = false;
    std::string source;
};

/// Per-frame outcome of retrieve + synthesize.
struct FrameSegmentation {
    std::int64_t frame_index = 0;
    /// Candidate sets C_k, aligned with plan.requirements, ids ascending.
    std::vector<std::vector<std::int64_t>> candidate_sets;
    /// Final set C = intersection of all C_k, ids ascending.
    std::vector<std::int64_t> final_set;
    dt::RleMask mask;
    bool empty_flag = true;
    std::vector<TraceRecord> trace;
    double elapsed_seconds = 0.0;
    /// Non-empty when this frame failed; the other fields are then defaults.
    std::string error;
};

struct SegmentationRun {
    ReasoningPlan plan;
    std::vector<FrameSegmentation> results;
};

struct EngineOptions {
    int jobs = 1;
    /// Timing source; null selects the monotonic wall clock. Tests and
    /// deterministic runs inject the fixed clock so elapsed_seconds is 0.
    const util::Clock* clock = nullptr;
};

/// Evaluates every requirement filter against the frame and intersects the
/// candidate sets. SEM atoms are judged by the LLM, one batched call per
/// distinct question per frame, under the shared retry budget; judgment
/// failure raises RequirementError. Depth predicates on a depth-less frame
/// raise CapabilityMissingError. The returned FrameSegmentation carries
/// candidate sets, final set, and trace, but not yet the mask.
FrameSegmentation retrieve(const ReasoningPlan& plan, const dt::DtFrame& frame,
                           LlmClient& llm);

/// Union of the member instances' masks. Unknown ids raise ConsistencyError;
/// an empty set yields the all-zero mask with empty_flag set.
void synthesize(const std::vector<std::int64_t>& final_set,
                const dt::DtFrame& frame, FrameSegmentation& out);

/// Full per-frame pass: retrieve then synthesize.
FrameSegmentation segment_frame(const ReasoningPlan& plan,
                                const dt::DtFrame& frame, LlmClient& llm);

/// End-to-end: decompose the query once, then run every frame (optionally
/// in parallel), producing results in frame order. A per-frame failure is
/// recorded in that result's `error`; a planning failure propagates as
/// PlanError. Frames must be ordered by frame_index.
SegmentationRun segment_frames(const std::string& query,
                               const std::vector<dt::DtFrame>& frames,
                               LlmClient& llm, const EngineOptions& opts = {});

/// Trace document: plan plus per-frame candidate sets and atom records.
nlohmann::json run_to_json(const SegmentationRun& run);

/// Schema id for SEM judgment exchanges.
inline constexpr const char* kSemJudgmentSchema = "sem_judgment_v1";

}  // namespace ordirs::rs
