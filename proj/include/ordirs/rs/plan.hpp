#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "ordirs/errors.hpp"
#include "ordirs/rs/filter.hpp"
#include "ordirs/rs/llm.hpp"

namespace ordirs::rs {

enum class RequirementKind { Semantic, Spatial };

const char* requirement_kind_name(RequirementKind kind);
bool requirement_kind_from_name(const std::string& name, RequirementKind& out);

/// One atomic condition the target instances must satisfy.
struct Requirement {
    std::string requirement_id;
    RequirementKind kind = RequirementKind::Semantic;
    std::string rationale;
    FilterPtr filter;
};

/// The reasoning stage's output: the decomposed query.
struct ReasoningPlan {
    std::string query;
    std::vector<Requirement> requirements;
    std::vector<Transcript> transcripts;
};

/// Wire format: {"requirements": [{"id", "kind", "rationale", "filter"}]}
/// with the filter expressed in the canonical DSL text form.
nlohmann::json plan_to_json(const ReasoningPlan& plan);

/// Parses and fully validates a plan document for the given query. Checks:
/// at least one requirement, unique non-empty ids, known kinds, filters that
/// parse, semantic requirements containing a LABEL/SEM atom and spatial
/// requirements containing a spatial atom. Throws ProtocolError naming the
/// violation.
ReasoningPlan plan_from_json(const nlohmann::json& doc,
                             const std::string& query);

/// Decomposes an implicit query into atomic requirements via the LLM,
/// re-prompting with the validation error up to the attempt budget.
/// Throws InputError on an empty query and PlanError (carrying all
/// transcripts) when the budget is exhausted.
ReasoningPlan decompose_query(const std::string& query, LlmClient& llm);

/// Schema id used for decomposition exchanges.
inline constexpr const char* kRsPlanSchema = "rs_plan_v1";

}  // namespace ordirs::rs
