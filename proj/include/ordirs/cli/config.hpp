#pragma once

#include <filesystem>
#include <functional>
#include <string>

#include <json.hpp>

namespace ordirs::cli {

/// Settings shared by the subcommands. Precedence, lowest to highest:
/// config file, environment (ORDIRS_LLM_API_KEY, ORDIRS_LLM_URL,
/// ORDIRS_LLM_MODEL), command-line flags.
struct AppConfig {
    std::string llm_api_key;
    std::string llm_url = "https://api.openai.com";
    std::string llm_model = "gpt-4o-mini";
    std::string perception_url;
    int jobs = 1;
};

/// Applies a config document's recognized keys (llm_api_key, llm_url,
/// llm_model, perception_url, jobs). Unknown keys raise ConfigError, as do
/// wrongly typed values.
void apply_config_json(AppConfig& config, const nlohmann::json& doc);

void apply_config_file(AppConfig& config, const std::filesystem::path& path);

/// Reads the ORDIRS_* variables through the given lookup (the test seam;
/// production passes std::getenv).
void apply_env(AppConfig& config,
               const std::function<const char*(const char*)>& get);

}  // namespace ordirs::cli
