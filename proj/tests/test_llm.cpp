#include <deque>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "ordirs/errors.hpp"
#include "ordirs/rs/llm.hpp"
#include "ordirs/rs/llm_cassette.hpp"
#include "ordirs/synth/scripted_llm.hpp"

using namespace ordirs;
using nlohmann::json;

namespace {

namespace fs = std::filesystem;

fs::path temp_file(const std::string& name) {
    fs::path path = fs::temp_directory_path() / ("ordirs_llm_" + name);
    fs::remove(path);
    return path;
}

class EchoLlm final : public rs::LlmClient {
public:
    std::string complete(const std::string& prompt,
                         const std::string& schema_id) override {
        ++calls;
        return "reply " + std::to_string(calls) + " to " + schema_id + "/" +
               std::to_string(prompt.size());
    }
    std::string identity() const override { return "echo"; }
    bool deterministic() const override { return true; }
    int calls = 0;
};

}  // namespace

TEST_CASE("prompts carry a single-line payload after the marker") {
    json payload = {{"query", "the door"}, {"k", 3}};
    std::string prompt = rs::build_prompt("Do the thing.", payload);
    CHECK(prompt.find("Do the thing.") == 0);
    CHECK(prompt.find(rs::kPromptPayloadMarker) != std::string::npos);
    json back = rs::extract_prompt_payload(prompt);
    CHECK(back.at("query") == "the door");
    CHECK(back.at("k") == 3);

    CHECK_THROWS_AS(rs::extract_prompt_payload("no marker here"),
                    NoRuleError);
    CHECK_THROWS_AS(
        rs::extract_prompt_payload(std::string("x\n\n") +
                                   rs::kPromptPayloadMarker + "{broken"),
        NoRuleError);
}

TEST_CASE("model responses may arrive fenced") {
    CHECK(rs::parse_llm_json("{\"a\": 1}").at("a") == 1);
    CHECK(rs::parse_llm_json("```json\n{\"a\": 2}\n```").at("a") == 2);
    CHECK(rs::parse_llm_json("```\n[1, 2]\n```").size() == 2);
    CHECK_THROWS_AS(rs::parse_llm_json("the answer is yes"), ProtocolError);
}

TEST_CASE("semantic judgments follow the keyword containment rule") {
    synth::ScriptedLlm llm =
        synth::ScriptedLlm::from_json(json{{"rules", json::array()}});
    json payload = {
        {"question", "nurse carrying tray"},
        {"instances",
         json::array(
             {{{"instance_id", 0},
               {"label", "nurse"},
               {"description", "nurse in scrubs carrying an instrument tray"}},
              {{"instance_id", 1},
               {"label", "door"},
               {"description", "sliding door standing open"}}})}};
    std::string response = llm.complete(
        rs::build_prompt("judge", payload), "sem_judgment_v1");
    json verdicts = json::parse(response).at("verdicts");
    REQUIRE(verdicts.size() == 2);
    CHECK(verdicts[0].at("answer") == "yes");
    CHECK(verdicts[1].at("answer") == "no");
}

TEST_CASE("a question of pure stopwords is judged no") {
    synth::ScriptedLlm llm =
        synth::ScriptedLlm::from_json(json{{"rules", json::array()}});
    json payload = {{"question", "is it there"},
                    {"instances",
                     json::array({{{"instance_id", 0},
                                   {"label", "door"},
                                   {"description", "is it there or not"}}})}};
    std::string response =
        llm.complete(rs::build_prompt("judge", payload), "sem_judgment_v1");
    CHECK(json::parse(response).at("verdicts")[0].at("answer") == "no");
}

TEST_CASE("keyword matching ignores case and punctuation") {
    CHECK(synth::keyword_match("Sliding DOOR", "the door, sliding open"));
    CHECK_FALSE(synth::keyword_match("sliding door", "a door standing open"));
    CHECK_FALSE(synth::keyword_match("", "anything"));
}

TEST_CASE("rule lookups render templates and report misses") {
    json rules = {
        {"rules",
         json::array(
             {{{"kind", "narrative"},
               {"match", "the door"},
               {"template",
                "Seen {instances} times, frames {first_frame}-{last_frame}."}},
              {{"kind", "report"},
               {"match", "door report"},
               {"template", "Answering: {query}"}}})}};
    synth::ScriptedLlm llm = synth::ScriptedLlm::from_json(rules);

    json payload = {{"subquery", "the door standing open"},
                    {"summary",
                     {{"instances", 12},
                      {"first_frame", 5},
                      {"last_frame", 18.0}}},
                    {"frames", {5, 6, 17, 18}}};
    json narrative = json::parse(llm.complete(
        rs::build_prompt("narrate", payload), "narrative_v1"));
    CHECK(narrative.at("narrative") == "Seen 12 times, frames 5-18.");
    CHECK(narrative.at("citations") == json({5, 6, 17, 18}));

    json report_payload = {{"query", "please write the door report"}};
    json report = json::parse(llm.complete(
        rs::build_prompt("report", report_payload), "report_v1"));
    CHECK(report.at("report") == "Answering: please write the door report");

    // Unmatched subquery and unknown template key both raise.
    json other = payload;
    other["subquery"] = "the window";
    CHECK_THROWS_AS(
        llm.complete(rs::build_prompt("narrate", other), "narrative_v1"),
        NoRuleError);

    json missing_key = {
        {"rules",
         json::array({{{"kind", "narrative"},
                       {"match", "the door"},
                       {"template", "{never_provided}"}}})}};
    synth::ScriptedLlm bad = synth::ScriptedLlm::from_json(missing_key);
    CHECK_THROWS_AS(
        bad.complete(rs::build_prompt("narrate", payload), "narrative_v1"),
        NoRuleError);
}

TEST_CASE("rule tables reject unknown kinds and missing bodies") {
    CHECK_THROWS_AS(synth::ScriptedLlm::from_json(json::array()), InputError);
    CHECK_THROWS_AS(synth::ScriptedLlm::from_json(json{
                        {"rules",
                         json::array({{{"kind", "whimsy"},
                                       {"match", "x"},
                                       {"body", "y"}}})}}),
                    InputError);
    CHECK_THROWS_AS(synth::ScriptedLlm::from_json(json{
                        {"rules",
                         json::array({{{"kind", "report"}, {"match", "x"}}})}}),
                    InputError);
}

TEST_CASE("scripted identities reflect the rule table") {
    json a = {{"rules",
               json::array({{{"kind", "report"},
                             {"match", "x"},
                             {"template", "one"}}})}};
    json b = {{"rules",
               json::array({{{"kind", "report"},
                             {"match", "x"},
                             {"template", "two"}}})}};
    CHECK(synth::ScriptedLlm::from_json(a).identity() ==
          synth::ScriptedLlm::from_json(a).identity());
    CHECK(synth::ScriptedLlm::from_json(a).identity() !=
          synth::ScriptedLlm::from_json(b).identity());
}

TEST_CASE("validation failures are retried with feedback, transport is not") {
    EchoLlm inner;
    std::vector<Transcript> transcripts;
    int seen = 0;
    std::string response = rs::exchange_with_retries(
        inner, "report_v1", "prompt",
        [&seen](const std::string&) {
            if (++seen < 3) throw ProtocolError("not yet");
        },
        transcripts);
    CHECK(inner.calls == 3);
    CHECK(response.rfind("reply 3", 0) == 0);
    REQUIRE(transcripts.size() == 3);
    CHECK(transcripts[0].error == "not yet");
    CHECK(transcripts[2].error.empty());

    std::vector<Transcript> exhausted;
    EchoLlm inner2;
    CHECK_THROWS_AS(
        rs::exchange_with_retries(
            inner2, "report_v1", "prompt",
            [](const std::string&) { throw ProtocolError("never"); },
            exhausted),
        PlanError);
    CHECK(inner2.calls == rs::kLlmAttemptBudget);
    CHECK(exhausted.size() == rs::kLlmAttemptBudget);
}

TEST_CASE("cassettes replay recorded exchanges in order") {
    fs::path path = temp_file("cassette.jsonl");
    EchoLlm inner;
    {
        rs::RecordingLlm recorder(inner, path);
        CHECK(recorder.complete("same prompt", "report_v1") ==
              "reply 1 to report_v1/11");
        CHECK(recorder.complete("same prompt", "report_v1") ==
              "reply 2 to report_v1/11");
        CHECK(recorder.complete("other", "narrative_v1") ==
              "reply 3 to narrative_v1/5");
    }

    rs::ReplayLlm replay(path);
    CHECK(replay.identity() == "replay:echo");
    CHECK(replay.deterministic());
    // Two recordings for the same key come back in order; the last repeats.
    CHECK(replay.complete("same prompt", "report_v1") ==
          "reply 1 to report_v1/11");
    CHECK(replay.complete("same prompt", "report_v1") ==
          "reply 2 to report_v1/11");
    CHECK(replay.complete("same prompt", "report_v1") ==
          "reply 2 to report_v1/11");
    CHECK(replay.complete("other", "narrative_v1") ==
          "reply 3 to narrative_v1/5");
    CHECK_THROWS_AS(replay.complete("unseen", "report_v1"), CassetteError);
    // The same prompt under a different schema is a different key.
    CHECK_THROWS_AS(replay.complete("same prompt", "narrative_v1"),
                    CassetteError);
}

TEST_CASE("a missing cassette file is reported") {
    CHECK_THROWS_AS(rs::ReplayLlm(temp_file("never_written.jsonl")),
                    CassetteError);
}
