#include "ordirs/rs/engine.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "ordirs/dt/json_codec.hpp"
#include "ordirs/spatial/mask_ops.hpp"
#include "ordirs/spatial/predicates.hpp"
#include "ordirs/util/parallel.hpp"

namespace ordirs::rs {

namespace {

const char* kSemInstructions =
    "Judge each listed instance of an operating-room scene against the "
    "question. Answer from the instance's description and label only. "
    "Respond with exactly one JSON document of the form\n"
    "{\"verdicts\": [{\"instance_id\": 0, \"answer\": \"yes\"|\"no\"}]}\n"
    "containing every listed instance exactly once.";

using Verdicts = std::map<std::int64_t, bool>;

Verdicts judge_sem_question(const std::string& question,
                            const dt::DtFrame& frame, LlmClient& llm) {
    nlohmann::json instances = nlohmann::json::array();
    for (const auto& inst : frame.instances) {
        instances.push_back({{"instance_id", inst.instance_id},
                             {"label", inst.label},
                             {"description", inst.description}});
    }
    std::string prompt = build_prompt(
        kSemInstructions, {{"question", question}, {"instances", instances}});

    Verdicts verdicts;
    std::vector<Transcript> transcripts;
    try {
        exchange_with_retries(
            llm, kSemJudgmentSchema, prompt,
            [&](const std::string& raw) {
                nlohmann::json doc = parse_llm_json(raw);
                if (!doc.is_object() || !doc.contains("verdicts") ||
                    !doc["verdicts"].is_array())
                    throw ProtocolError(
                        "judgment must be {\"verdicts\": [...]}");
                Verdicts parsed;
                for (const auto& v : doc["verdicts"]) {
                    if (!v.is_object() || !v.contains("instance_id") ||
                        !v["instance_id"].is_number_integer() ||
                        !v.contains("answer") || !v["answer"].is_string())
                        throw ProtocolError(
                            "each verdict needs instance_id and answer");
                    std::string answer = v["answer"].get<std::string>();
                    if (answer != "yes" && answer != "no")
                        throw ProtocolError("answer must be yes or no");
                    parsed[v["instance_id"].get<std::int64_t>()] =
                        answer == "yes";
                }
                for (const auto& inst : frame.instances) {
                    if (!parsed.count(inst.instance_id))
                        throw ProtocolError(
                            "verdicts miss instance " +
                            std::to_string(inst.instance_id));
                }
                verdicts = std::move(parsed);
            },
            transcripts);
    } catch (const PlanError& e) {
        throw RequirementError("SEM judgment for \"" + question +
                               "\" unusable: " + e.what());
    }
    return verdicts;
}

struct FrameEval {
    const dt::DtFrame& frame;
    const std::map<std::string, Verdicts>& sem_verdicts;
    std::vector<TraceRecord>& trace;
    std::map<std::string, std::set<std::int64_t>> atom_cache;

    std::set<std::int64_t> all_ids() const {
        std::set<std::int64_t> ids;
        for (const auto& inst : frame.instances) ids.insert(inst.instance_id);
        return ids;
    }

    std::set<std::int64_t> eval(const FilterExpr& e) {
        if (const auto* o = std::get_if<FilterOr>(&e.node)) {
            std::set<std::int64_t> acc;
            for (const auto& c : o->operands) {
                auto s = eval(*c);
                acc.insert(s.begin(), s.end());
            }
            return acc;
        }
        if (const auto* a = std::get_if<FilterAnd>(&e.node)) {
            std::set<std::int64_t> acc = eval(*a->operands.front());
            for (std::size_t i = 1; i < a->operands.size(); ++i) {
                std::set<std::int64_t> next = eval(*a->operands[i]);
                std::set<std::int64_t> inter;
                std::set_intersection(acc.begin(), acc.end(), next.begin(),
                                      next.end(),
                                      std::inserter(inter, inter.begin()));
                acc = std::move(inter);
            }
            return acc;
        }
        if (const auto* n = std::get_if<FilterNot>(&e.node)) {
            std::set<std::int64_t> inner = eval(*n->operand);
            std::set<std::int64_t> out;
            for (const auto& inst : frame.instances) {
                if (!inner.count(inst.instance_id))
                    out.insert(inst.instance_id);
            }
            return out;
        }
        return eval_atom(e);
    }

    std::set<std::int64_t> eval_atom(const FilterExpr& e) {
        std::string key = print_filter(e);
        auto cached = atom_cache.find(key);
        if (cached != atom_cache.end()) return cached->second;

        std::set<std::int64_t> members;
        if (const auto* l = std::get_if<FilterLabel>(&e.node)) {
            for (const auto& inst : frame.instances) {
                bool verdict = inst.label == l->label;
                if (verdict) members.insert(inst.instance_id);
                trace.push_back({key, inst.instance_id, verdict, "geometry"});
            }
        } else if (const auto* s = std::get_if<FilterSem>(&e.node)) {
            const Verdicts& verdicts = sem_verdicts.at(s->question);
            for (const auto& inst : frame.instances) {
                bool verdict = verdicts.at(inst.instance_id);
                if (verdict) members.insert(inst.instance_id);
                trace.push_back({key, inst.instance_id, verdict, "llm"});
            }
        } else {
            const auto& sp = std::get<FilterSpatial>(e.node);
            std::vector<const dt::Instance*> anchors;
            if (sp.anchor) {
                for (std::int64_t id : eval(*sp.anchor))
                    anchors.push_back(frame.find_instance(id));
            }
            bool anchored = spatial::pred_kind_takes_anchor(sp.pred.kind);
            for (const auto& inst : frame.instances) {
                // An unsatisfiable anchor makes the predicate false rather
                // than an error: the query may validly match nothing here.
                bool verdict =
                    (anchored && anchors.empty())
                        ? false
                        : spatial::eval_spatial_predicate(sp.pred, inst,
                                                          anchors, frame);
                if (verdict) members.insert(inst.instance_id);
                trace.push_back({key, inst.instance_id, verdict, "geometry"});
            }
        }
        atom_cache.emplace(std::move(key), members);
        return members;
    }
};

}  // namespace

FrameSegmentation retrieve(const ReasoningPlan& plan, const dt::DtFrame& frame,
                           LlmClient& llm) {
    FrameSegmentation out;
    out.frame_index = frame.frame_index;

    std::map<std::string, Verdicts> sem_verdicts;
    if (!frame.instances.empty()) {
        std::vector<std::string> questions;
        for (const auto& req : plan.requirements) {
            for (const auto& q : filter_sem_questions(*req.filter)) {
                if (std::find(questions.begin(), questions.end(), q) ==
                    questions.end())
                    questions.push_back(q);
            }
        }
        for (const auto& q : questions)
            sem_verdicts.emplace(q, judge_sem_question(q, frame, llm));
    }

    FrameEval eval{frame, sem_verdicts, out.trace, {}};

    std::set<std::int64_t> final_set;
    bool first = true;
    for (const auto& req : plan.requirements) {
        std::set<std::int64_t> ck = eval.eval(*req.filter);
        out.candidate_sets.emplace_back(ck.begin(), ck.end());
        if (first) {
            final_set = std::move(ck);
            first = false;
        } else {
            std::set<std::int64_t> inter;
            std::set_intersection(final_set.begin(), final_set.end(),
                                  ck.begin(), ck.end(),
                                  std::inserter(inter, inter.begin()));
            final_set = std::move(inter);
        }
    }
    out.final_set.assign(final_set.begin(), final_set.end());
    return out;
}

void synthesize(const std::vector<std::int64_t>& final_set,
                const dt::DtFrame& frame, FrameSegmentation& out) {
    std::vector<dt::RleMask> members;
    for (std::int64_t id : final_set) {
        const dt::Instance* inst = frame.find_instance(id);
        if (!inst)
            throw ConsistencyError("candidate id " + std::to_string(id) +
                                   " is not in frame " +
                                   std::to_string(frame.frame_index));
        members.push_back(inst->mask);
    }
    out.mask = spatial::mask_union(members, frame.width, frame.height);
    out.empty_flag = final_set.empty();
}

FrameSegmentation segment_frame(const ReasoningPlan& plan,
                                const dt::DtFrame& frame, LlmClient& llm) {
    FrameSegmentation result = retrieve(plan, frame, llm);
    synthesize(result.final_set, frame, result);
    return result;
}

SegmentationRun segment_frames(const std::string& query,
                               const std::vector<dt::DtFrame>& frames,
                               LlmClient& llm, const EngineOptions& opts) {
    for (std::size_t i = 1; i < frames.size(); ++i) {
        if (frames[i].frame_index <= frames[i - 1].frame_index)
            throw OrderingError("frames not ordered by frame_index at " +
                                std::to_string(i));
    }

    const util::Clock& clock =
        opts.clock ? *opts.clock : util::steady_clock_instance();

    SegmentationRun run;
    run.plan = decompose_query(query, llm);
    run.results.resize(frames.size());

    util::parallel_for(frames.size(), opts.jobs, [&](std::size_t i) {
        double start = clock.now_seconds();
        try {
            run.results[i] = segment_frame(run.plan, frames[i], llm);
        } catch (const Error& e) {
            FrameSegmentation failed;
            failed.frame_index = frames[i].frame_index;
            failed.mask = dt::RleMask{
                frames[i].width, frames[i].height,
                {static_cast<std::int64_t>(frames[i].width) *
                 frames[i].height}};
            failed.error = e.what();
            run.results[i] = std::move(failed);
        }
        run.results[i].elapsed_seconds = clock.now_seconds() - start;
    });
    return run;
}

nlohmann::json run_to_json(const SegmentationRun& run) {
    nlohmann::json frames = nlohmann::json::array();
    for (const auto& r : run.results) {
        nlohmann::json sets = nlohmann::json::object();
        for (std::size_t k = 0; k < r.candidate_sets.size(); ++k)
            sets[run.plan.requirements[k].requirement_id] =
                r.candidate_sets[k];
        nlohmann::json records = nlohmann::json::array();
        for (const auto& t : r.trace) {
            records.push_back({{"atom", t.atom},
                               {"instance_id", t.instance_id},
                               {"verdict", t.verdict},
                               {"source", t.source}});
        }
        frames.push_back({{"frame_index", r.frame_index},
                          {"candidate_sets", sets},
                          {"final", r.final_set},
                          {"empty_flag", r.empty_flag},
                          {"mask", dt::to_json(r.mask)},
                          {"elapsed_seconds", r.elapsed_seconds},
                          {"error", r.error},
                          {"records", records}});
    }
    return {{"query", run.plan.query},
            {"plan", plan_to_json(run.plan)},
            {"frames", frames}};
}

}  // namespace ordirs::rs
