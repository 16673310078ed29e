#pragma once

#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <string>

#include "ordirs/rs/llm.hpp"

namespace ordirs::rs {

/// Wraps a live client and appends every exchange to a cassette file:
/// a header line {"identity": ...} followed by one
/// {"schema_id", "prompt_digest", "response"} line per call.
class RecordingLlm final : public LlmClient {
public:
    RecordingLlm(LlmClient& inner, const std::filesystem::path& path);

    std::string complete(const std::string& prompt,
                         const std::string& schema_id) override;
    std::string identity() const override { return inner_.identity(); }
    bool deterministic() const override { return inner_.deterministic(); }

private:
    LlmClient& inner_;
    std::ofstream out_;
    std::mutex mutex_;
};

/// Replays a recorded cassette. Responses are keyed by (schema_id, prompt
/// digest) and returned in recorded order; when a key's recordings are
/// exhausted the last one is repeated, since an identical prompt warrants an
/// identical answer. An unknown key raises CassetteError.
class ReplayLlm final : public LlmClient {
public:
    explicit ReplayLlm(const std::filesystem::path& path);

    std::string complete(const std::string& prompt,
                         const std::string& schema_id) override;
    std::string identity() const override { return identity_; }
    bool deterministic() const override { return true; }

private:
    std::string identity_;
    std::map<std::string, std::deque<std::string>> responses_;
    std::mutex mutex_;
};

}  // namespace ordirs::rs
