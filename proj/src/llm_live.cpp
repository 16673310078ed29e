#include "ordirs/rs/llm_live.hpp"

#include <chrono>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "ordirs/errors.hpp"

namespace ordirs::rs {

using nlohmann::json;

LiveLlm::LiveLlm(LiveLlmConfig config) : config_(std::move(config)) {
    if (config_.base_url.empty())
        throw ConfigError("language model URL must be non-empty");
    if (config_.api_key.empty())
        throw ConfigError("language model API key must be non-empty");
    if (config_.model.empty())
        throw ConfigError("language model name must be non-empty");
}

std::string LiveLlm::complete(const std::string& prompt,
                              const std::string& /*schema_id*/) {
    const json request = {
        {"model", config_.model},
        {"temperature", 0},
        {"messages", json::array({{{"role", "user"}, {"content", prompt}}})},
    };
    const std::string body = request.dump();
    const int attempts_allowed = 1 + config_.max_retries;
    std::string last_failure;

    for (int attempt = 0; attempt < attempts_allowed; ++attempt) {
        if (attempt > 0 && config_.backoff_seconds > 0.0) {
            double delay = config_.backoff_seconds * (1 << (attempt - 1));
            std::this_thread::sleep_for(std::chrono::duration<double>(delay));
        }
        httplib::Client client(config_.base_url);
        client.set_connection_timeout(config_.timeout_seconds, 0);
        client.set_read_timeout(config_.timeout_seconds, 0);
        client.set_write_timeout(config_.timeout_seconds, 0);
        httplib::Headers headers = {
            {"Authorization", "Bearer " + config_.api_key}};
        auto result = client.Post("/v1/chat/completions", headers, body,
                                  "application/json");
        if (!result) {
            last_failure = httplib::to_string(result.error());
            continue;
        }
        if (result->status != 200) {
            last_failure = "HTTP " + std::to_string(result->status);
            continue;
        }
        json doc;
        try {
            doc = json::parse(result->body);
        } catch (const json::exception& e) {
            throw ProtocolError(
                std::string("chat response is not valid JSON: ") + e.what());
        }
        if (!doc.contains("choices") || !doc.at("choices").is_array() ||
            doc.at("choices").empty())
            throw ProtocolError("chat response lacks choices");
        const json& message = doc.at("choices").at(0).value("message", json());
        if (!message.is_object() || !message.contains("content") ||
            !message.at("content").is_string())
            throw ProtocolError("chat response lacks message content");
        return message.at("content").get<std::string>();
    }
    throw TransportError("POST " + config_.base_url +
                             "/v1/chat/completions failed after " +
                             std::to_string(attempts_allowed) + " attempts: " +
                             last_failure,
                         attempts_allowed);
}

std::string LiveLlm::identity() const {
    return "live:" + config_.model + "@" + config_.base_url;
}

}  // namespace ordirs::rs
