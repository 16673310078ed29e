#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "ordirs/rs/llm.hpp"

namespace ordirs::synth {

/// One scripted response. Rules are matched by a case-insensitive substring
/// test against the relevant text in the prompt payload (the query for plan,
/// aspect, and subquery schemas; the subquery text for narratives; the query
/// for reports). The first matching rule wins.
struct ScriptedRule {
    std::string kind;      // rs_plan | agent_aspects | agent_subqueries |
                           // narrative | report
    std::string match;
    nlohmann::json body;   // plan | aspects | subqueries | template text
};

/// Deterministic stand-in for the language model. Structured schemas answer
/// from the rule table; semantic judgments are answered by a keyword rule:
/// an instance matches a question when every non-stopword question token
/// occurs among the tokens of the instance's label and description.
class ScriptedLlm final : public rs::LlmClient {
public:
    ScriptedLlm() = default;
    explicit ScriptedLlm(std::vector<ScriptedRule> rules);

    static ScriptedLlm from_json(const nlohmann::json& doc);
    static ScriptedLlm from_file(const std::filesystem::path& path);

    std::string complete(const std::string& prompt,
                         const std::string& schema_id) override;
    std::string identity() const override;
    bool deterministic() const override { return true; }

private:
    const ScriptedRule* find_rule(const std::string& kind,
                                  const std::string& text) const;

    std::vector<ScriptedRule> rules_;
};

/// Lowercased alphanumeric tokens of the text.
std::vector<std::string> keyword_tokens(const std::string& text);

/// True when every non-stopword token of `question` occurs in `haystack`'s
/// token set. A question with no non-stopword tokens matches nothing.
bool keyword_match(const std::string& question, const std::string& haystack);

}  // namespace ordirs::synth
