#include "ordirs/synth/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "ordirs/errors.hpp"
#include "ordirs/rs/filter.hpp"

namespace ordirs::synth {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw ScenarioError(msg); }

const json& member(const json& obj, const std::string& context,
                   const std::string& key) {
    if (!obj.is_object() || !obj.contains(key))
        fail(context + ": missing required key '" + key + "'");
    return obj.at(key);
}

std::string str_field(const json& obj, const std::string& context,
                      const std::string& key, const char* fallback = nullptr) {
    if (!obj.contains(key)) {
        if (fallback != nullptr) return fallback;
        fail(context + ": missing required key '" + key + "'");
    }
    const json& v = obj.at(key);
    if (!v.is_string()) fail(context + ": '" + key + "' must be a string");
    return v.get<std::string>();
}

double num_field(const json& obj, const std::string& context,
                 const std::string& key, double fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number()) fail(context + ": '" + key + "' must be a number");
    return v.get<double>();
}

std::int64_t int_field(const json& obj, const std::string& context,
                       const std::string& key, std::int64_t fallback,
                       bool required = false) {
    if (!obj.contains(key)) {
        if (required) fail(context + ": missing required key '" + key + "'");
        return fallback;
    }
    const json& v = obj.at(key);
    if (!v.is_number_integer())
        fail(context + ": '" + key + "' must be an integer");
    return v.get<std::int64_t>();
}

std::array<std::uint8_t, 3> color_field(const json& obj,
                                        const std::string& context,
                                        const std::string& key,
                                        std::array<std::uint8_t, 3> fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_array() || v.size() != 3)
        fail(context + ": '" + key + "' must be an array of three integers");
    std::array<std::uint8_t, 3> out{};
    for (std::size_t i = 0; i < 3; ++i) {
        if (!v[i].is_number_integer())
            fail(context + ": '" + key + "' components must be integers");
        std::int64_t c = v[i].get<std::int64_t>();
        if (c < 0 || c > 255)
            fail(context + ": '" + key + "' components must be in [0, 255]");
        out[i] = static_cast<std::uint8_t>(c);
    }
    return out;
}

json yaml_to_json(const YAML::Node& node) {
    switch (node.Type()) {
        case YAML::NodeType::Null:
            return nullptr;
        case YAML::NodeType::Scalar: {
            const std::string& text = node.Scalar();
            if (node.Tag() == "!") return text;
            if (text == "true") return true;
            if (text == "false") return false;
            if (!text.empty()) {
                char* end = nullptr;
                errno = 0;
                long long i = std::strtoll(text.c_str(), &end, 10);
                if (errno == 0 && end != nullptr && *end == '\0')
                    return static_cast<std::int64_t>(i);
                errno = 0;
                double d = std::strtod(text.c_str(), &end);
                if (errno == 0 && end != nullptr && *end == '\0') return d;
            }
            return text;
        }
        case YAML::NodeType::Sequence: {
            json out = json::array();
            for (const auto& item : node) out.push_back(yaml_to_json(item));
            return out;
        }
        case YAML::NodeType::Map: {
            json out = json::object();
            for (const auto& item : node)
                out[item.first.as<std::string>()] = yaml_to_json(item.second);
            return out;
        }
        default:
            fail("scenario document contains an undefined YAML node");
    }
}

bool valid_scenario_name(const std::string& name) {
    if (name.empty()) return false;
    for (char c : name) {
        bool ok = std::isalnum(static_cast<unsigned char>(c)) != 0 ||
                  c == '_' || c == '-';
        if (!ok) return false;
    }
    return true;
}

}  // namespace

const char* object_shape_name(ObjectShape shape) {
    return shape == ObjectShape::kRect ? "rect" : "ellipse";
}

ObjectShape object_shape_from_name(const std::string& name) {
    if (name == "rect") return ObjectShape::kRect;
    if (name == "ellipse") return ObjectShape::kEllipse;
    fail("unknown object shape '" + name + "' (expected rect or ellipse)");
}

bool EventSpec::active_at(std::int64_t frame) const {
    for (const auto& [start, end] : ranges)
        if (frame >= start && frame < end) return true;
    return false;
}

const ObjectSpec* ScenarioSpec::find_object(const std::string& obj) const {
    for (const auto& o : objects)
        if (o.name == obj) return &o;
    return nullptr;
}

const EventSpec* ScenarioSpec::find_event(const std::string& event) const {
    for (const auto& e : events)
        if (e.name == event) return &e;
    return nullptr;
}

void validate_scenario(const ScenarioSpec& spec) {
    const std::string where = "scenario '" + spec.name + "'";
    if (!valid_scenario_name(spec.name))
        fail("scenario name '" + spec.name +
             "' must be non-empty and restricted to [A-Za-z0-9_-]");
    if (spec.width < 1 || spec.height < 1)
        fail(where + ": frame dimensions must be positive");
    if (spec.duration_frames < 1)
        fail(where + ": duration_frames must be at least 1");
    if (!(spec.fps > 0.0)) fail(where + ": fps must be positive");
    if (spec.background_depth < 0.0 || spec.background_depth > 1.0)
        fail(where + ": background_depth must be in [0, 1]");
    if (spec.objects.empty()) fail(where + ": at least one object is required");

    std::set<std::string> event_names;
    for (const auto& event : spec.events) {
        const std::string ctx = where + ", event '" + event.name + "'";
        if (event.name.empty()) fail(where + ": event with empty name");
        if (!event_names.insert(event.name).second)
            fail(ctx + ": duplicate event name");
        if (event.ranges.empty()) fail(ctx + ": no active ranges");
        for (const auto& [start, end] : event.ranges) {
            if (start < 0 || end > spec.duration_frames || start >= end)
                fail(ctx + ": range [" + std::to_string(start) + ", " +
                     std::to_string(end) +
                     ") must satisfy 0 <= start < end <= duration_frames");
        }
    }

    std::set<std::string> object_names;
    for (const auto& obj : spec.objects) {
        const std::string ctx = where + ", object '" + obj.name + "'";
        if (obj.name.empty()) fail(where + ": object with empty name");
        if (!object_names.insert(obj.name).second)
            fail(ctx + ": duplicate object name");
        if (obj.label.empty()) fail(ctx + ": label must be non-empty");
        if (obj.width < 1 || obj.height < 1)
            fail(ctx + ": size must be at least 1x1");
        if (obj.width > spec.width || obj.height > spec.height)
            fail(ctx + ": size exceeds the frame");
        if (obj.depth < 0.0 || obj.depth > 1.0)
            fail(ctx + ": depth must be in [0, 1]");
        if (!obj.active_event.empty() &&
            spec.find_event(obj.active_event) == nullptr)
            fail(ctx + ": active_event '" + obj.active_event +
                 "' is not a declared event");
        if (obj.trajectory.empty())
            fail(ctx + ": trajectory needs at least one keyframe");
        std::int64_t prev_frame = -1;
        for (const auto& key : obj.trajectory) {
            if (key.frame <= prev_frame)
                fail(ctx + ": trajectory frames must be strictly increasing");
            prev_frame = key.frame;
            if (key.frame < 0 || key.frame >= spec.duration_frames)
                fail(ctx + ": trajectory frame " + std::to_string(key.frame) +
                     " is outside [0, duration_frames)");
            if (key.x < 0.0 || key.y < 0.0 ||
                key.x > static_cast<double>(spec.width - obj.width) ||
                key.y > static_cast<double>(spec.height - obj.height))
                fail(ctx + ": keyframe at frame " + std::to_string(key.frame) +
                     " places the object outside the frame");
        }
    }

    std::set<std::string> query_ids;
    for (const auto& query : spec.queries) {
        const std::string ctx = where + ", query '" + query.id + "'";
        if (query.id.empty()) fail(where + ": query with empty id");
        if (!query_ids.insert(query.id).second)
            fail(ctx + ": duplicate query id");
        if (query.text.empty()) fail(ctx + ": text must be non-empty");
        if (query.query_type != "semantic" && query.query_type != "spatial" &&
            query.query_type != "mixed")
            fail(ctx + ": query_type must be semantic, spatial, or mixed");
        for (const auto& target : query.target_objects)
            if (spec.find_object(target) == nullptr)
                fail(ctx + ": target object '" + target + "' does not exist");
        if (query.plan.empty()) fail(ctx + ": an authored plan is required");
        std::set<std::string> req_ids;
        for (const auto& req : query.plan) {
            const std::string rctx = ctx + ", requirement '" + req.id + "'";
            if (req.id.empty()) fail(ctx + ": requirement with empty id");
            if (!req_ids.insert(req.id).second)
                fail(rctx + ": duplicate requirement id");
            if (req.kind != "semantic" && req.kind != "spatial")
                fail(rctx + ": kind must be semantic or spatial");
            rs::FilterPtr filter;
            try {
                filter = rs::parse_filter(req.filter);
            } catch (const ParseError& e) {
                fail(rctx + ": filter does not parse: " + e.what());
            }
            if (req.kind == "semantic" && !rs::filter_has_semantic_atom(*filter))
                fail(rctx + ": semantic requirement needs a LABEL or SEM atom");
            if (req.kind == "spatial" && !rs::filter_has_spatial_atom(*filter))
                fail(rctx + ": spatial requirement needs a spatial predicate");
        }
    }

    for (const auto& rule : spec.analysis) {
        const std::string ctx = where + ", analysis rule '" + rule.match + "'";
        if (rule.match.empty()) fail(where + ": analysis rule with empty match");
        if (rule.aspects.empty()) fail(ctx + ": aspects must be non-empty");
        std::set<std::string> sub_ids;
        for (const auto& sub : rule.subqueries) {
            const std::string sctx = ctx + ", subquery '" + sub.subquery_id + "'";
            if (sub.subquery_id.empty())
                fail(ctx + ": subquery with empty id");
            if (!sub_ids.insert(sub.subquery_id).second)
                fail(sctx + ": duplicate subquery id");
            if (sub.text.empty()) fail(sctx + ": text must be non-empty");
            bool known_aspect = false;
            for (const auto& aspect : rule.aspects)
                known_aspect = known_aspect || aspect == sub.aspect;
            if (!known_aspect)
                fail(sctx + ": aspect '" + sub.aspect +
                     "' is not listed in the rule's aspects");
            if (sub.mode != "quantitative" && sub.mode != "semantic")
                fail(sctx + ": mode must be quantitative or semantic");
            if (sub.mode == "quantitative" && sub.program.empty())
                fail(sctx + ": quantitative subqueries need a program");
            if (sub.mode == "semantic" && sub.narrative.empty())
                fail(sctx + ": semantic subqueries need a narrative template");
        }
    }
}

nlohmann::json scenario_to_json(const ScenarioSpec& spec) {
    json doc;
    doc["name"] = spec.name;
    doc["seed"] = spec.seed;
    doc["width"] = spec.width;
    doc["height"] = spec.height;
    doc["fps"] = spec.fps;
    doc["duration_frames"] = spec.duration_frames;
    doc["background_depth"] = spec.background_depth;
    doc["background_color"] = spec.background_color;

    json objects = json::array();
    for (const auto& obj : spec.objects) {
        json o;
        o["name"] = obj.name;
        o["label"] = obj.label;
        o["shape"] = object_shape_name(obj.shape);
        o["width"] = obj.width;
        o["height"] = obj.height;
        o["depth"] = obj.depth;
        o["color"] = obj.color;
        o["description"] = obj.description;
        if (!obj.active_event.empty()) o["active_event"] = obj.active_event;
        json keys = json::array();
        for (const auto& key : obj.trajectory)
            keys.push_back({{"frame", key.frame}, {"x", key.x}, {"y", key.y}});
        o["trajectory"] = std::move(keys);
        objects.push_back(std::move(o));
    }
    doc["objects"] = std::move(objects);

    json events = json::array();
    for (const auto& event : spec.events) {
        json ranges = json::array();
        for (const auto& [start, end] : event.ranges)
            ranges.push_back({{"start", start}, {"end", end}});
        events.push_back({{"name", event.name}, {"ranges", std::move(ranges)}});
    }
    doc["events"] = std::move(events);

    json queries = json::array();
    for (const auto& query : spec.queries) {
        json q;
        q["id"] = query.id;
        q["text"] = query.text;
        q["query_type"] = query.query_type;
        q["target_objects"] = query.target_objects;
        json plan = json::array();
        for (const auto& req : query.plan)
            plan.push_back({{"id", req.id},
                            {"kind", req.kind},
                            {"rationale", req.rationale},
                            {"filter", req.filter}});
        q["plan"] = std::move(plan);
        queries.push_back(std::move(q));
    }
    doc["queries"] = std::move(queries);

    json analysis = json::array();
    for (const auto& rule : spec.analysis) {
        json r;
        r["match"] = rule.match;
        r["aspects"] = rule.aspects;
        json subs = json::array();
        for (const auto& sub : rule.subqueries) {
            json s;
            s["subquery_id"] = sub.subquery_id;
            s["text"] = sub.text;
            s["aspect"] = sub.aspect;
            s["mode"] = sub.mode;
            if (!sub.program.empty()) s["program"] = sub.program;
            if (!sub.narrative.empty()) s["narrative"] = sub.narrative;
            subs.push_back(std::move(s));
        }
        r["subqueries"] = std::move(subs);
        if (!rule.report.empty()) r["report"] = rule.report;
        analysis.push_back(std::move(r));
    }
    doc["analysis"] = std::move(analysis);
    return doc;
}

ScenarioSpec scenario_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) fail("scenario document must be a JSON object");
    ScenarioSpec spec;
    spec.name = str_field(doc, "scenario", "name");
    const std::string where = "scenario '" + spec.name + "'";
    std::int64_t seed = int_field(doc, where, "seed", 0);
    if (seed < 0) fail(where + ": seed must be non-negative");
    spec.seed = static_cast<std::uint64_t>(seed);
    spec.width = static_cast<int>(int_field(doc, where, "width", 0, true));
    spec.height = static_cast<int>(int_field(doc, where, "height", 0, true));
    spec.fps = num_field(doc, where, "fps", 1.0);
    spec.duration_frames = int_field(doc, where, "duration_frames", 0, true);
    spec.background_depth = num_field(doc, where, "background_depth", 1.0);
    spec.background_color =
        color_field(doc, where, "background_color", spec.background_color);

    for (const json& o : member(doc, where, "objects")) {
        ObjectSpec obj;
        obj.name = str_field(o, where + " object", "name");
        const std::string ctx = where + ", object '" + obj.name + "'";
        obj.label = str_field(o, ctx, "label");
        obj.shape = object_shape_from_name(str_field(o, ctx, "shape", "rect"));
        obj.width = static_cast<int>(int_field(o, ctx, "width", 0, true));
        obj.height = static_cast<int>(int_field(o, ctx, "height", 0, true));
        obj.depth = num_field(o, ctx, "depth", 0.5);
        obj.color = color_field(o, ctx, "color", obj.color);
        obj.description = str_field(o, ctx, "description", "");
        obj.active_event = str_field(o, ctx, "active_event", "");
        const json& keys = member(o, ctx, "trajectory");
        if (!keys.is_array()) fail(ctx + ": 'trajectory' must be an array");
        for (const json& k : keys) {
            TrajectoryKey key;
            key.frame = int_field(k, ctx + " trajectory key", "frame", 0, true);
            key.x = num_field(k, ctx + " trajectory key", "x", 0.0);
            key.y = num_field(k, ctx + " trajectory key", "y", 0.0);
            obj.trajectory.push_back(key);
        }
        spec.objects.push_back(std::move(obj));
    }

    if (doc.contains("events")) {
        const json& events = doc.at("events");
        if (!events.is_array()) fail(where + ": 'events' must be an array");
        for (const json& e : events) {
            EventSpec event;
            event.name = str_field(e, where + " event", "name");
            const std::string ctx = where + ", event '" + event.name + "'";
            const json& ranges = member(e, ctx, "ranges");
            if (!ranges.is_array()) fail(ctx + ": 'ranges' must be an array");
            for (const json& r : ranges)
                event.ranges.emplace_back(
                    int_field(r, ctx + " range", "start", 0, true),
                    int_field(r, ctx + " range", "end", 0, true));
            spec.events.push_back(std::move(event));
        }
    }

    if (doc.contains("queries")) {
        const json& queries = doc.at("queries");
        if (!queries.is_array()) fail(where + ": 'queries' must be an array");
        for (const json& q : queries) {
            QuerySpec query;
            query.id = str_field(q, where + " query", "id");
            const std::string ctx = where + ", query '" + query.id + "'";
            query.text = str_field(q, ctx, "text");
            query.query_type = str_field(q, ctx, "query_type");
            if (q.contains("target_objects")) {
                const json& targets = q.at("target_objects");
                if (!targets.is_array())
                    fail(ctx + ": 'target_objects' must be an array");
                for (const json& t : targets) {
                    if (!t.is_string())
                        fail(ctx + ": target object names must be strings");
                    query.target_objects.push_back(t.get<std::string>());
                }
            }
            const json& plan = member(q, ctx, "plan");
            if (!plan.is_array()) fail(ctx + ": 'plan' must be an array");
            for (const json& r : plan) {
                PlanRequirementSpec req;
                req.id = str_field(r, ctx + " requirement", "id");
                req.kind = str_field(r, ctx + " requirement", "kind");
                req.rationale = str_field(r, ctx + " requirement", "rationale", "");
                req.filter = str_field(r, ctx + " requirement", "filter");
                query.plan.push_back(std::move(req));
            }
            spec.queries.push_back(std::move(query));
        }
    }

    if (doc.contains("analysis")) {
        const json& analysis = doc.at("analysis");
        if (!analysis.is_array()) fail(where + ": 'analysis' must be an array");
        for (const json& r : analysis) {
            AnalysisRuleSpec rule;
            rule.match = str_field(r, where + " analysis rule", "match");
            const std::string ctx = where + ", analysis rule '" + rule.match + "'";
            const json& aspects = member(r, ctx, "aspects");
            if (!aspects.is_array()) fail(ctx + ": 'aspects' must be an array");
            for (const json& a : aspects) {
                if (!a.is_string()) fail(ctx + ": aspects must be strings");
                rule.aspects.push_back(a.get<std::string>());
            }
            if (r.contains("subqueries")) {
                const json& subs = r.at("subqueries");
                if (!subs.is_array())
                    fail(ctx + ": 'subqueries' must be an array");
                for (const json& s : subs) {
                    SubquerySpec sub;
                    sub.subquery_id = str_field(s, ctx + " subquery", "subquery_id");
                    const std::string sctx =
                        ctx + ", subquery '" + sub.subquery_id + "'";
                    sub.text = str_field(s, sctx, "text");
                    sub.aspect = str_field(s, sctx, "aspect");
                    sub.mode = str_field(s, sctx, "mode");
                    sub.program = str_field(s, sctx, "program", "");
                    sub.narrative = str_field(s, sctx, "narrative", "");
                    rule.subqueries.push_back(std::move(sub));
                }
            }
            rule.report = str_field(r, ctx, "report", "");
            spec.analysis.push_back(std::move(rule));
        }
    }
    return spec;
}

ScenarioSpec load_scenario_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open scenario file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();

    json doc;
    if (path.extension() == ".json") {
        try {
            doc = json::parse(text);
        } catch (const json::exception& e) {
            fail("scenario file " + path.string() + " is not valid JSON: " +
                 e.what());
        }
    } else {
        try {
            doc = yaml_to_json(YAML::Load(text));
        } catch (const YAML::Exception& e) {
            fail("scenario file " + path.string() + " is not valid YAML: " +
                 e.what());
        }
    }
    ScenarioSpec spec = scenario_from_json(doc);
    validate_scenario(spec);
    return spec;
}

}  // namespace ordirs::synth
