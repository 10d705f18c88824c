#include "pathrouter/qa/http.hpp"

#include <cstdlib>

#include <httplib.h>

#include "pathrouter/core/error.hpp"
#include "pathrouter/core/text.hpp"

namespace pathrouter::qa {

namespace {

std::string env(const char* name) {
    const char* v = std::getenv(name);
    return v ? std::string(v) : std::string();
}

struct SplitUrl {
    std::string origin;
    std::string prefix;
};

SplitUrl split_url(const std::string& url) {
    const auto scheme = url.find("://");
    if (scheme == std::string::npos) throw Error(ErrorCode::ConfigError, "base URL needs a scheme: " + url);
    const auto slash = url.find('/', scheme + 3);
    SplitUrl out;
    out.origin = slash == std::string::npos ? url : url.substr(0, slash);
    out.prefix = slash == std::string::npos ? "" : url.substr(slash);
    while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
    return out;
}

}  // namespace

std::optional<EndpointConfig> EndpointConfig::from_env(bool embedding) {
    EndpointConfig c;
    if (embedding) {
        c.base_url = env("PATHROUTER_EMBED_BASE_URL");
        c.model = env("PATHROUTER_EMBED_MODEL");
        c.api_key = env("PATHROUTER_EMBED_API_KEY");
    }
    if (c.base_url.empty()) c.base_url = env("PATHROUTER_LLM_BASE_URL");
    if (c.api_key.empty()) c.api_key = env("PATHROUTER_LLM_API_KEY");
    if (!embedding) c.model = env("PATHROUTER_LLM_MODEL");
    if (c.base_url.empty() || c.model.empty()) return std::nullopt;
    return c;
}

nlohmann::json post_json(const EndpointConfig& endpoint, std::string_view route, const nlohmann::json& body) {
    const auto url = split_url(endpoint.base_url);
    httplib::Client cli(url.origin);
    cli.set_connection_timeout(endpoint.timeout);
    cli.set_read_timeout(endpoint.timeout);
    cli.set_write_timeout(endpoint.timeout);
    httplib::Headers headers;
    if (!endpoint.api_key.empty()) headers.emplace("Authorization", "Bearer " + endpoint.api_key);
    const auto res = cli.Post(url.prefix + std::string(route), headers, body.dump(), "application/json");
    if (!res) throw Error(ErrorCode::ClientError, "request failed: " + httplib::to_string(res.error()));
    if (res->status < 200 || res->status >= 300)
        throw Error(ErrorCode::ClientError, "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
    try {
        return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::ClientError, std::string("response is not JSON: ") + e.what());
    }
}

std::string strip_code_fence(std::string_view reply) {
    std::string s(text::trim(reply));
    if (s.rfind("```", 0) != 0) return s;
    const auto nl = s.find('\n');
    if (nl == std::string::npos) return {};
    s = s.substr(nl + 1);
    const auto close = s.rfind("```");
    if (close != std::string::npos) s.resize(close);
    return std::string(text::trim(s));
}

HttpChatClient::HttpChatClient(EndpointConfig endpoint, double temperature)
    : endpoint_(std::move(endpoint)), temperature_(temperature) {
    split_url(endpoint_.base_url);
}

Completion HttpChatClient::chat(std::string_view system, std::string_view user) {
    nlohmann::json body{{"model", endpoint_.model},
                        {"temperature", temperature_},
                        {"messages",
                         {{{"role", "system"}, {"content", std::string(system)}},
                          {{"role", "user"}, {"content", std::string(user)}}}}};
    const auto res = post_json(endpoint_, "/chat/completions", body);
    try {
        Completion c;
        c.answer_text = res.at("choices").at(0).at("message").at("content").get<std::string>();
        if (res.contains("usage") && res["usage"].contains("completion_tokens"))
            c.completion_tokens = res["usage"]["completion_tokens"].get<std::uint64_t>();
        else
            c.completion_tokens = count_tokens(c.answer_text);
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ClientError, std::string("unexpected chat response: ") + e.what());
    }
}

Completion HttpChatClient::complete(const Prompt& prompt) { return chat(prompt.system_text, prompt.user_text); }

HttpEmbeddingProvider::HttpEmbeddingProvider(EndpointConfig endpoint, std::size_t dimension)
    : endpoint_(std::move(endpoint)), dimension_(dimension) {}

std::vector<float> HttpEmbeddingProvider::raw_embed(std::string_view text) {
    const auto res = post_json(endpoint_, "/embeddings", {{"model", endpoint_.model}, {"input", std::string(text)}});
    std::vector<float> v;
    try {
        v = res.at("data").at(0).at("embedding").get<std::vector<float>>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ProviderError, std::string("unexpected embedding response: ") + e.what());
    }
    if (dimension_ == 0) dimension_ = v.size();
    return v;
}

std::string ChatExpertClient::propose(std::string_view rules_document, std::string_view report_text) {
    static constexpr std::string_view system =
        "You maintain a rule file that routes questions to one of four answer paths: DB (database facts), "
        "Doc (document passages), Hybrid (both) and LLM (no retrieval). Each line is a JSON record. Rule records "
        "have id, description, condition (an s-expression over kw, re, flag, sem, and, or, not), path, delta "
        "(integer) and origin. Using the diagnostics, strengthen rules that route correctly, weaken or remove "
        "rules that misroute, and add rules where a path is missing coverage. Reply with the complete new rule "
        "file and nothing else.";
    std::string user = "Current rule file:\n";
    user += rules_document;
    user += "\nDiagnostics:\n";
    user += report_text;
    return strip_code_fence(chat_.chat(system, user).answer_text);
}

bool ChatJudge::holds(std::string_view query_text, std::string_view predicate) {
    std::string user = "Question: ";
    user += query_text;
    user += "\nStatement about the question: ";
    user += predicate;
    user += "\nReply yes or no.";
    const auto reply = text::tokenize(chat_.chat("You judge statements about questions.", user).answer_text);
    if (reply.empty()) throw Error(ErrorCode::ClientError, "empty judge reply");
    if (reply.front() == "yes") return true;
    if (reply.front() == "no") return false;
    throw Error(ErrorCode::ClientError, "judge reply is neither yes nor no");
}

std::optional<Path> parse_path_choice(std::string_view reply) {
    for (const auto& tok : text::tokenize(reply)) {
        if (tok == "db" || tok == "database") return Path::DB;
        if (tok == "doc" || tok == "document" || tok == "documents") return Path::Doc;
        if (tok == "hybrid") return Path::Hybrid;
        if (tok == "llm" || tok == "direct") return Path::LLM;
    }
    return std::nullopt;
}

rules::PathScores ChatChooserScorer::score(std::string_view query_text, const rules::RuleSet&) {
    Prompt p;
    p.path = Path::LLM;
    p.system_text =
        "Choose how to answer the question: DB (query financial tables), Doc (read document passages), "
        "Hybrid (both) or LLM (answer directly). Reply with one word.";
    p.user_text = "Question: " + std::string(query_text);
    p.token_count = count_tokens(p.system_text) + count_tokens(p.user_text);
    rules::PathScores out;
    if (const auto choice = parse_path_choice(client_.complete(p).answer_text)) {
        out.scores[*choice] = 1;
        out.fired_rules.push_back({"llm_chooser", *choice, 1});
    }
    return out;
}

}  // namespace pathrouter::qa
