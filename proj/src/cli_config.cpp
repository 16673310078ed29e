#include "ordirs/cli/config.hpp"

#include <fstream>

#include "ordirs/errors.hpp"

namespace ordirs::cli {

using nlohmann::json;

void apply_config_json(AppConfig& config, const json& doc) {
    if (!doc.is_object())
        throw ConfigError("config document must be a JSON object");
    for (const auto& [key, value] : doc.items()) {
        if (key == "llm_api_key" || key == "llm_url" || key == "llm_model" ||
            key == "perception_url") {
            if (!value.is_string())
                throw ConfigError("config '" + key + "' must be a string");
            const std::string text = value.get<std::string>();
            if (key == "llm_api_key") config.llm_api_key = text;
            else if (key == "llm_url") config.llm_url = text;
            else if (key == "llm_model") config.llm_model = text;
            else config.perception_url = text;
        } else if (key == "jobs") {
            if (!value.is_number_integer() || value.get<int>() < 1)
                throw ConfigError("config 'jobs' must be a positive integer");
            config.jobs = value.get<int>();
        } else {
            throw ConfigError("config key '" + key + "' is not recognized");
        }
    }
}

void apply_config_file(AppConfig& config, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ConfigError("config file " + path.string() +
                          " is not valid JSON: " + e.what());
    }
    apply_config_json(config, doc);
}

void apply_env(AppConfig& config,
               const std::function<const char*(const char*)>& get) {
    if (const char* v = get("ORDIRS_LLM_API_KEY"); v != nullptr && *v != '\0')
        config.llm_api_key = v;
    if (const char* v = get("ORDIRS_LLM_URL"); v != nullptr && *v != '\0')
        config.llm_url = v;
    if (const char* v = get("ORDIRS_LLM_MODEL"); v != nullptr && *v != '\0')
        config.llm_model = v;
}

}  // namespace ordirs::cli
