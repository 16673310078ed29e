#pragma once

#include <functional>
#include <string>

#include <json.hpp>

#include "ordirs/errors.hpp"

namespace ordirs::rs {

/// Abstraction over a chat-style language model. Implementations:
/// scripted (rule table), cassette replay, live HTTP. The scripted and
/// replay clients are pure functions of the prompt; the live client always
/// requests temperature 0.
class LlmClient {
public:
    virtual ~LlmClient() = default;

    /// Produces a completion for the prompt. `schema_id` names the response
    /// schema the caller will validate against (e.g. "rs_plan_v1") and lets
    /// scripted implementations route without guessing from prose.
    virtual std::string complete(const std::string& prompt,
                                 const std::string& schema_id) = 0;

    virtual std::string identity() const = 0;
    virtual bool deterministic() const = 0;
};

/// Total attempts per exchange: the initial prompt plus up to two
/// error-feedback re-prompts.
inline constexpr int kLlmAttemptBudget = 3;

/// Every prompt ends with a machine-readable section so deterministic
/// clients can answer without natural-language parsing:
///
///   INPUT:
///   {"query": "..."}
///
/// The payload is the single line following the marker.
inline constexpr const char* kPromptPayloadMarker = "INPUT:\n";

std::string build_prompt(const std::string& instructions,
                         const nlohmann::json& payload);

/// Extracts the JSON payload embedded by build_prompt. Throws NoRuleError
/// when the marker is missing or the payload does not parse (scripted
/// clients have no use for such a prompt).
nlohmann::json extract_prompt_payload(const std::string& prompt);

/// Strips a markdown code fence (``` or ```json) if the response is wrapped
/// in one, then parses the remainder as JSON. Throws ProtocolError with the
/// parse message on failure.
nlohmann::json parse_llm_json(const std::string& response);

/// Runs one validated exchange under the attempt budget. `validate` parses
/// the raw response and throws (any ordirs::Error) to reject it; the error
/// text is fed back in the next attempt's prompt. Each attempt is appended
/// to `transcripts`. After kLlmAttemptBudget rejected attempts the last
/// validation error is rethrown as PlanError carrying the transcripts.
/// Transport-level failures (NoRuleError, TransportError) are not retried:
/// re-prompting cannot help when no response was produced.
std::string exchange_with_retries(
    LlmClient& llm, const std::string& schema_id, const std::string& prompt,
    const std::function<void(const std::string& response)>& validate,
    std::vector<Transcript>& transcripts);

}  // namespace ordirs::rs
