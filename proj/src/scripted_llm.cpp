#include "ordirs/synth/scripted_llm.hpp"

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "ordirs/errors.hpp"
#include "ordirs/util/digest.hpp"
#include "ordirs/util/numeric.hpp"

namespace ordirs::synth {
namespace {

using nlohmann::json;

const std::set<std::string>& stopwords() {
    static const std::set<std::string> kStopwords = {
        "a",    "an",    "and",  "are",  "at",   "be",    "been", "being",
        "did",  "do",    "does", "for",  "had",  "has",   "have", "in",
        "is",   "it",    "its",  "not",  "of",   "on",    "or",   "that",
        "the",  "their", "there", "they", "this", "to",   "was",  "were",
        "what", "which", "who",  "with"};
    return kStopwords;
}

std::string lowercase(const std::string& text) {
    std::string out = text;
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string render_template(const std::string& tmpl, const json& values) {
    std::string out;
    std::size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] != '{') {
            out.push_back(tmpl[i++]);
            continue;
        }
        std::size_t close = tmpl.find('}', i);
        if (close == std::string::npos)
            throw NoRuleError("template has an unterminated '{' placeholder");
        std::string key = tmpl.substr(i + 1, close - i - 1);
        if (!values.is_object() || !values.contains(key))
            throw NoRuleError("template references unknown key '" + key + "'");
        const json& v = values.at(key);
        if (v.is_string())
            out += v.get<std::string>();
        else if (v.is_number_float())
            out += util::format_sig6(v.get<double>());
        else
            out += v.dump();
        i = close + 1;
    }
    return out;
}

std::string payload_text(const json& payload, const char* key) {
    if (!payload.is_object() || !payload.contains(key) ||
        !payload.at(key).is_string())
        throw NoRuleError(std::string("prompt payload lacks a '") + key +
                          "' string");
    return payload.at(key).get<std::string>();
}

}  // namespace

std::vector<std::string> keyword_tokens(const std::string& text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char raw : text) {
        unsigned char c = static_cast<unsigned char>(raw);
        if (std::isalnum(c)) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

bool keyword_match(const std::string& question, const std::string& haystack) {
    std::vector<std::string> hay = keyword_tokens(haystack);
    std::set<std::string> have(hay.begin(), hay.end());
    bool any = false;
    for (const auto& token : keyword_tokens(question)) {
        if (stopwords().count(token) > 0) continue;
        any = true;
        if (have.count(token) == 0) return false;
    }
    return any;
}

ScriptedLlm::ScriptedLlm(std::vector<ScriptedRule> rules)
    : rules_(std::move(rules)) {}

ScriptedLlm ScriptedLlm::from_json(const json& doc) {
    if (!doc.is_object() || !doc.contains("rules") ||
        !doc.at("rules").is_array())
        throw InputError("scripted rule table must be {\"rules\": [...]}");
    std::vector<ScriptedRule> rules;
    for (const json& r : doc.at("rules")) {
        ScriptedRule rule;
        if (!r.is_object() || !r.contains("kind") || !r.at("kind").is_string() ||
            !r.contains("match") || !r.at("match").is_string())
            throw InputError("scripted rule needs string 'kind' and 'match'");
        rule.kind = r.at("kind").get<std::string>();
        rule.match = r.at("match").get<std::string>();
        const char* body_key = nullptr;
        if (rule.kind == "rs_plan") body_key = "plan";
        else if (rule.kind == "agent_aspects") body_key = "aspects";
        else if (rule.kind == "agent_subqueries") body_key = "subqueries";
        else if (rule.kind == "narrative" || rule.kind == "report")
            body_key = "template";
        else
            throw InputError("scripted rule kind '" + rule.kind +
                             "' is not recognized");
        if (!r.contains(body_key))
            throw InputError("scripted rule of kind '" + rule.kind +
                             "' needs a '" + body_key + "' body");
        rule.body = r.at(body_key);
        rules.push_back(std::move(rule));
    }
    return ScriptedLlm(std::move(rules));
}

ScriptedLlm ScriptedLlm::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open rule table: " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw InputError("rule table " + path.string() + " is not valid JSON: " +
                         e.what());
    }
    return from_json(doc);
}

const ScriptedRule* ScriptedLlm::find_rule(const std::string& kind,
                                           const std::string& text) const {
    std::string lowered = lowercase(text);
    for (const auto& rule : rules_) {
        if (rule.kind != kind) continue;
        if (lowered.find(lowercase(rule.match)) != std::string::npos)
            return &rule;
    }
    return nullptr;
}

std::string ScriptedLlm::complete(const std::string& prompt,
                                  const std::string& schema_id) {
    json payload = rs::extract_prompt_payload(prompt);

    if (schema_id == "sem_judgment_v1") {
        std::string question = payload_text(payload, "question");
        if (!payload.contains("instances") || !payload.at("instances").is_array())
            throw NoRuleError("semantic judgment payload lacks 'instances'");
        json verdicts = json::array();
        for (const json& inst : payload.at("instances")) {
            std::string text;
            if (inst.contains("label") && inst.at("label").is_string())
                text += inst.at("label").get<std::string>();
            if (inst.contains("description") &&
                inst.at("description").is_string()) {
                text += " ";
                text += inst.at("description").get<std::string>();
            }
            verdicts.push_back(
                {{"instance_id", inst.value("instance_id", 0)},
                 {"answer", keyword_match(question, text) ? "yes" : "no"}});
        }
        return json{{"verdicts", verdicts}}.dump();
    }

    if (schema_id == "rs_plan_v1") {
        std::string query = payload_text(payload, "query");
        const ScriptedRule* rule = find_rule("rs_plan", query);
        if (rule == nullptr)
            throw NoRuleError("no rs_plan rule matches prompt " +
                              util::digest_hex(prompt));
        return rule->body.dump();
    }

    if (schema_id == "agent_aspects_v1") {
        std::string query = payload_text(payload, "query");
        const ScriptedRule* rule = find_rule("agent_aspects", query);
        if (rule == nullptr)
            throw NoRuleError("no agent_aspects rule matches prompt " +
                              util::digest_hex(prompt));
        return json{{"aspects", rule->body}}.dump();
    }

    if (schema_id == "agent_subqueries_v1") {
        std::string query = payload_text(payload, "query");
        const ScriptedRule* rule = find_rule("agent_subqueries", query);
        if (rule == nullptr)
            throw NoRuleError("no agent_subqueries rule matches prompt " +
                              util::digest_hex(prompt));
        return json{{"subqueries", rule->body}}.dump();
    }

    if (schema_id == "narrative_v1") {
        std::string subquery = payload_text(payload, "subquery");
        const ScriptedRule* rule = find_rule("narrative", subquery);
        if (rule == nullptr)
            throw NoRuleError("no narrative rule matches prompt " +
                              util::digest_hex(prompt));
        json summary = payload.value("summary", json::object());
        json response;
        response["narrative"] =
            render_template(rule->body.get<std::string>(), summary);
        response["citations"] = payload.value("frames", json::array());
        return response.dump();
    }

    if (schema_id == "report_v1") {
        std::string query = payload_text(payload, "query");
        const ScriptedRule* rule = find_rule("report", query);
        if (rule == nullptr)
            throw NoRuleError("no report rule matches prompt " +
                              util::digest_hex(prompt));
        json values = json::object();
        values["query"] = query;
        json response;
        response["report"] =
            render_template(rule->body.get<std::string>(), values);
        return response.dump();
    }

    throw NoRuleError("scripted model does not answer schema '" + schema_id +
                      "'");
}

std::string ScriptedLlm::identity() const {
    std::ostringstream table;
    for (const auto& rule : rules_)
        table << rule.kind << "\x1f" << rule.match << "\x1f" << rule.body.dump()
              << "\x1e";
    return "scripted:" + util::digest_hex(table.str());
}

}  // namespace ordirs::synth
