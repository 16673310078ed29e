#pragma once

#include <string>

#include "ordirs/rs/llm.hpp"

namespace ordirs::rs {

/// Chat-completions endpoint in the common OpenAI-compatible shape:
/// POST {base_url}/v1/chat/completions with a single user message, always at
/// temperature 0.
struct LiveLlmConfig {
    std::string base_url = "https://api.openai.com";
    std::string api_key;
    std::string model = "gpt-4o-mini";
    int timeout_seconds = 60;
    int max_retries = 2;
    double backoff_seconds = 0.5;
};

class LiveLlm final : public LlmClient {
public:
    explicit LiveLlm(LiveLlmConfig config);

    std::string complete(const std::string& prompt,
                         const std::string& schema_id) override;
    std::string identity() const override;
    bool deterministic() const override { return false; }

private:
    LiveLlmConfig config_;
};

}  // namespace ordirs::rs
