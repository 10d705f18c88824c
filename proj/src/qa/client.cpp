#include "pathrouter/qa/client.hpp"

#include <cctype>

#include "pathrouter/core/error.hpp"
#include "pathrouter/core/jsonl.hpp"

namespace pathrouter::qa {

std::size_t WhitespaceTokenCounter::count(std::string_view text) const { return count_tokens(text); }

std::size_t count_tokens(std::string_view text) {
    std::size_t n = 0;
    bool in_token = false;
    for (char c : text) {
        const bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
        if (!space && !in_token) ++n;
        in_token = !space;
    }
    return n;
}

ScriptedClient::ScriptedClient(std::vector<std::pair<std::string, std::string>> table) {
    for (auto& [pattern, answer_text] : table) add(std::move(pattern), std::move(answer_text));
}

void ScriptedClient::add(std::string pattern, std::string answer_text) {
    table_.emplace_back(std::regex(pattern, std::regex::ECMAScript | std::regex::icase), std::move(answer_text));
}

Completion ScriptedClient::complete(const Prompt& prompt) {
    ++calls_;
    for (const auto& [re, answer_text] : table_) {
        if (std::regex_search(prompt.user_text, re)) return {answer_text, count_tokens(answer_text)};
    }
    throw Error(ErrorCode::ClientError, "NoMatch: no scripted pattern matches the prompt");
}

ReplayClient ReplayClient::parse(std::string_view document) {
    ReplayClient client;
    jsonl::for_each_in(document, [&](const nlohmann::json& rec, std::size_t line) {
        try {
            const auto path = parse_path(rec.at("path").get<std::string>());
            if (!path) throw Error(ErrorCode::SchemaError, "unknown path");
            ReplayAnswer a;
            a.answer_text = rec.at("answer_text").get<std::string>();
            a.prompt_tokens = rec.value("prompt_tokens", std::uint64_t{0});
            a.completion_tokens = rec.value("completion_tokens", std::uint64_t{0});
            client.add(rec.at("query_id").get<std::string>(), *path, std::move(a));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::SchemaError, "replay line " + std::to_string(line) + ": " + e.what());
        }
    });
    return client;
}

ReplayClient ReplayClient::load(const std::string& file) { return parse(jsonl::read_file(file)); }

void ReplayClient::add(std::string query_id, Path path, ReplayAnswer a) {
    answers_[{std::move(query_id), path}] = std::move(a);
}

bool ReplayClient::contains(std::string_view query_id, Path path) const noexcept {
    return answers_.find(std::pair<std::string, Path>{std::string(query_id), path}) != answers_.end();
}

const ReplayAnswer& ReplayClient::lookup(std::string_view query_id, Path path) const {
    const auto it = answers_.find(std::pair<std::string, Path>{std::string(query_id), path});
    if (it == answers_.end()) {
        throw Error(ErrorCode::MissingFixture,
                    "no replay answer for (" + std::string(query_id) + ", " + std::string(to_string(path)) + ")");
    }
    return it->second;
}

Completion ReplayClient::complete(const Prompt& prompt) {
    const auto& a = lookup(prompt.query_id, prompt.path);
    return {a.answer_text, a.completion_tokens};
}

AnswerRecord answer(const Prompt& prompt, AnswerClient& client) {
    const auto start = std::chrono::steady_clock::now();
    Completion c;
    try {
        c = client.complete(prompt);
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw Error(ErrorCode::ClientError, e.what());
    }
    AnswerRecord r;
    r.query_id = prompt.query_id;
    r.path = prompt.path;
    r.answer_text = std::move(c.answer_text);
    r.prompt_tokens = prompt.token_count;
    r.completion_tokens = c.completion_tokens;
    r.generation_latency = std::chrono::steady_clock::now() - start;
    return r;
}

}  // namespace pathrouter::qa
