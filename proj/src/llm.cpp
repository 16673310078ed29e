#include "ordirs/rs/llm.hpp"

namespace ordirs::rs {

std::string build_prompt(const std::string& instructions,
                         const nlohmann::json& payload) {
    return instructions + "\n\n" + kPromptPayloadMarker + payload.dump();
}

nlohmann::json extract_prompt_payload(const std::string& prompt) {
    std::size_t pos = prompt.rfind(kPromptPayloadMarker);
    if (pos == std::string::npos)
        throw NoRuleError("prompt carries no INPUT payload");
    std::size_t start = pos + std::string(kPromptPayloadMarker).size();
    std::size_t end = prompt.find('\n', start);
    std::string line = prompt.substr(
        start, end == std::string::npos ? std::string::npos : end - start);
    nlohmann::json payload =
        nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (payload.is_discarded())
        throw NoRuleError("prompt INPUT payload is not valid JSON");
    return payload;
}

nlohmann::json parse_llm_json(const std::string& response) {
    std::string body = response;
    std::size_t fence = body.find("```");
    if (fence != std::string::npos) {
        std::size_t start = body.find('\n', fence);
        std::size_t close = body.rfind("```");
        if (start != std::string::npos && close > fence) {
            body = body.substr(start + 1, close - start - 1);
        }
    }
    nlohmann::json parsed =
        nlohmann::json::parse(body, nullptr, /*allow_exceptions=*/false);
    if (parsed.is_discarded())
        throw ProtocolError("response is not valid JSON");
    return parsed;
}

std::string exchange_with_retries(
    LlmClient& llm, const std::string& schema_id, const std::string& prompt,
    const std::function<void(const std::string& response)>& validate,
    std::vector<Transcript>& transcripts) {
    std::string current_prompt = prompt;
    std::string last_error;
    for (int attempt = 0; attempt < kLlmAttemptBudget; ++attempt) {
        std::string response = llm.complete(current_prompt, schema_id);
        Transcript t;
        t.schema_id = schema_id;
        t.prompt = current_prompt;
        t.response = response;
        try {
            validate(response);
            transcripts.push_back(std::move(t));
            return response;
        } catch (const Error& e) {
            last_error = e.what();
            t.error = last_error;
            transcripts.push_back(std::move(t));
        }
        current_prompt = prompt +
                         "\n\nYour previous response was rejected: " +
                         last_error +
                         "\nAnswer again with a single JSON document that "
                         "follows the schema exactly.";
    }
    throw PlanError("response rejected after " +
                        std::to_string(kLlmAttemptBudget) +
                        " attempts (schema " + schema_id + "): " + last_error,
                    transcripts);
}

}  // namespace ordirs::rs
