#include "ordirs/rs/llm_cassette.hpp"

#include <json.hpp>

#include "ordirs/errors.hpp"
#include "ordirs/util/digest.hpp"

namespace ordirs::rs {

using nlohmann::json;

namespace {

std::string cassette_key(const std::string& schema_id,
                         const std::string& digest) {
    return schema_id + ":" + digest;
}

}  // namespace

RecordingLlm::RecordingLlm(LlmClient& inner,
                           const std::filesystem::path& path)
    : inner_(inner), out_(path, std::ios::trunc) {
    if (!out_)
        throw CassetteError("cannot open cassette for writing: " +
                            path.string());
    out_ << json{{"identity", inner_.identity()}}.dump() << "\n";
    out_.flush();
}

std::string RecordingLlm::complete(const std::string& prompt,
                                   const std::string& schema_id) {
    std::string response = inner_.complete(prompt, schema_id);
    std::lock_guard<std::mutex> lock(mutex_);
    out_ << json{{"schema_id", schema_id},
                 {"prompt_digest", util::digest_hex(prompt)},
                 {"response", response}}
                .dump()
         << "\n";
    out_.flush();
    if (!out_) throw CassetteError("cassette write failed");
    return response;
}

ReplayLlm::ReplayLlm(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw CassetteError("cannot open cassette for reading: " +
                            path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json doc;
        try {
            doc = json::parse(line);
        } catch (const json::exception& e) {
            throw CassetteError("cassette line " + std::to_string(line_no) +
                                " is not valid JSON: " + e.what());
        }
        if (doc.contains("identity")) {
            identity_ = "replay:" + doc.at("identity").get<std::string>();
            continue;
        }
        if (!doc.contains("schema_id") || !doc.contains("prompt_digest") ||
            !doc.contains("response"))
            throw CassetteError("cassette line " + std::to_string(line_no) +
                                " lacks schema_id/prompt_digest/response");
        responses_[cassette_key(doc.at("schema_id").get<std::string>(),
                                doc.at("prompt_digest").get<std::string>())]
            .push_back(doc.at("response").get<std::string>());
    }
    if (identity_.empty()) identity_ = "replay:unknown";
}

std::string ReplayLlm::complete(const std::string& prompt,
                                const std::string& schema_id) {
    std::string digest = util::digest_hex(prompt);
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = responses_.find(cassette_key(schema_id, digest));
    if (it == responses_.end() || it->second.empty())
        throw CassetteError("cassette has no recording for schema '" +
                            schema_id + "' prompt " + digest);
    std::string response = it->second.front();
    if (it->second.size() > 1) it->second.pop_front();
    return response;
}

}  // namespace ordirs::rs
