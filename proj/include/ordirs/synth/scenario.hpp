#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace ordirs::synth {

/// Position keyframe; positions are the top-left corner of the object's
/// bounding box in pixels. Between keyframes the position is interpolated
/// linearly and rounded to the nearest integer pixel.
struct TrajectoryKey {
    std::int64_t frame = 0;
    double x = 0.0;
    double y = 0.0;
};

enum class ObjectShape { kRect, kEllipse };

const char* object_shape_name(ObjectShape shape);
ObjectShape object_shape_from_name(const std::string& name);

struct ObjectSpec {
    std::string name;
    std::string label;
    ObjectShape shape = ObjectShape::kRect;
    int width = 0;
    int height = 0;
    /// Constant scene depth in [0, 1]; smaller is closer to the camera.
    double depth = 0.5;
    std::array<std::uint8_t, 3> color{128, 128, 128};
    std::string description;
    /// Name of the event that gates visibility; empty means always present.
    std::string active_event;
    std::vector<TrajectoryKey> trajectory;
};

/// Half-open frame ranges during which the event is active.
struct EventSpec {
    std::string name;
    std::vector<std::pair<std::int64_t, std::int64_t>> ranges;

    bool active_at(std::int64_t frame) const;
};

struct PlanRequirementSpec {
    std::string id;
    std::string kind;
    std::string rationale;
    std::string filter;
};

/// A benchmark query authored with its decomposition and the objects whose
/// visible masks form the ground-truth segmentation.
struct QuerySpec {
    std::string id;
    std::string text;
    std::string query_type;
    std::vector<std::string> target_objects;
    std::vector<PlanRequirementSpec> plan;
};

struct SubquerySpec {
    std::string subquery_id;
    std::string text;
    std::string aspect;
    /// "quantitative" or "semantic".
    std::string mode;
    /// Analysis program for quantitative subqueries.
    std::string program;
    /// Narrative template for semantic subqueries.
    std::string narrative;
};

/// Scripted responses for the workflow-analysis planner, keyed by a
/// case-insensitive substring of the analysis question.
struct AnalysisRuleSpec {
    std::string match;
    std::vector<std::string> aspects;
    std::vector<SubquerySpec> subqueries;
    std::string report;
};

struct ScenarioSpec {
    std::string name;
    std::uint64_t seed = 0;
    int width = 0;
    int height = 0;
    double fps = 1.0;
    std::int64_t duration_frames = 0;
    double background_depth = 1.0;
    std::array<std::uint8_t, 3> background_color{232, 232, 228};
    std::vector<ObjectSpec> objects;
    std::vector<EventSpec> events;
    std::vector<QuerySpec> queries;
    std::vector<AnalysisRuleSpec> analysis;

    const ObjectSpec* find_object(const std::string& name) const;
    const EventSpec* find_event(const std::string& name) const;
};

/// Throws ScenarioError naming the offending object, event, or query.
void validate_scenario(const ScenarioSpec& spec);

nlohmann::json scenario_to_json(const ScenarioSpec& spec);
ScenarioSpec scenario_from_json(const nlohmann::json& doc);

/// Loads a YAML or JSON scenario file and validates it.
ScenarioSpec load_scenario_file(const std::filesystem::path& path);

}  // namespace ordirs::synth
