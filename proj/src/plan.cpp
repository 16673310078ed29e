#include "ordirs/rs/plan.hpp"

#include <set>

namespace ordirs::rs {

const char* requirement_kind_name(RequirementKind kind) {
    return kind == RequirementKind::Semantic ? "semantic" : "spatial";
}

bool requirement_kind_from_name(const std::string& name,
                                RequirementKind& out) {
    if (name == "semantic") {
        out = RequirementKind::Semantic;
        return true;
    }
    if (name == "spatial") {
        out = RequirementKind::Spatial;
        return true;
    }
    return false;
}

nlohmann::json plan_to_json(const ReasoningPlan& plan) {
    nlohmann::json reqs = nlohmann::json::array();
    for (const auto& r : plan.requirements) {
        reqs.push_back({{"id", r.requirement_id},
                        {"kind", requirement_kind_name(r.kind)},
                        {"rationale", r.rationale},
                        {"filter", print_filter(r.filter)}});
    }
    return {{"requirements", reqs}};
}

ReasoningPlan plan_from_json(const nlohmann::json& doc,
                             const std::string& query) {
    if (!doc.is_object() || !doc.contains("requirements") ||
        !doc["requirements"].is_array())
        throw ProtocolError("plan must be {\"requirements\": [...]}");
    const auto& reqs = doc["requirements"];
    if (reqs.empty()) throw ProtocolError("plan has no requirements");

    ReasoningPlan plan;
    plan.query = query;
    std::set<std::string> seen_ids;
    for (std::size_t i = 0; i < reqs.size(); ++i) {
        const auto& rj = reqs[i];
        std::string at = "requirements[" + std::to_string(i) + "]";
        if (!rj.is_object()) throw ProtocolError(at + " is not an object");
        for (const char* key : {"id", "kind", "rationale", "filter"}) {
            if (!rj.contains(key) || !rj[key].is_string())
                throw ProtocolError(at + "." + key + " missing or not a string");
        }
        Requirement r;
        r.requirement_id = rj["id"].get<std::string>();
        if (r.requirement_id.empty())
            throw ProtocolError(at + ".id is empty");
        if (!seen_ids.insert(r.requirement_id).second)
            throw ProtocolError(at + ".id duplicates \"" + r.requirement_id +
                                "\"");
        if (!requirement_kind_from_name(rj["kind"].get<std::string>(), r.kind))
            throw ProtocolError(at + ".kind must be semantic or spatial");
        r.rationale = rj["rationale"].get<std::string>();
        try {
            r.filter = parse_filter(rj["filter"].get<std::string>());
        } catch (const ParseError& e) {
            throw ProtocolError(at + ".filter does not parse: " +
                                std::string(e.what()));
        }
        if (r.kind == RequirementKind::Semantic &&
            !filter_has_semantic_atom(*r.filter))
            throw ProtocolError(at +
                                ": semantic requirement lacks a LABEL/SEM atom");
        if (r.kind == RequirementKind::Spatial &&
            !filter_has_spatial_atom(*r.filter))
            throw ProtocolError(at +
                                ": spatial requirement lacks a spatial atom");
        plan.requirements.push_back(std::move(r));
    }
    return plan;
}

namespace {

const char* kDecomposeInstructions =
    "You are analyzing an operating-room scene query. Decompose the query "
    "into the atomic requirements a target instance must satisfy. Respond "
    "with exactly one JSON document of the form\n"
    "{\"requirements\": [{\"id\": \"r1\", \"kind\": \"semantic\"|\"spatial\", "
    "\"rationale\": \"...\", \"filter\": \"...\"}]}\n"
    "where each filter is an expression over the atoms LABEL(\"name\"), "
    "SEM(\"yes/no question about one instance\"), and the spatial predicates "
    "LEFT_OF/RIGHT_OF/ABOVE/BELOW/NEARER_THAN/FARTHER_THAN(ANCHOR(f)), "
    "WITHIN_PX(radius, ANCHOR(f)), OVERLAPS([tau,] ANCHOR(f)), "
    "NEAREST_K/FARTHEST_K(k, ANCHOR(f)), LARGEST_K(k), combined with "
    "AND/OR/NOT and parentheses. Semantic requirements must contain a "
    "LABEL or SEM atom; spatial requirements must contain a spatial "
    "predicate. Use one requirement per atomic condition.";

}  // namespace

ReasoningPlan decompose_query(const std::string& query, LlmClient& llm) {
    if (query.empty()) throw InputError("decompose_query: empty query");

    std::string prompt =
        build_prompt(kDecomposeInstructions, {{"query", query}});

    ReasoningPlan plan;
    std::vector<Transcript> transcripts;
    std::string response = exchange_with_retries(
        llm, kRsPlanSchema, prompt,
        [&](const std::string& raw) {
            plan = plan_from_json(parse_llm_json(raw), query);
        },
        transcripts);
    (void)response;
    plan.transcripts = std::move(transcripts);
    return plan;
}

}  // namespace ordirs::rs
