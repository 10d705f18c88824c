#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <regex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pathrouter/core/path.hpp"

namespace pathrouter::qa {

struct Prompt {
    std::string query_id;
    Path path = Path::LLM;
    std::string system_text;
    std::string user_text;
    std::size_t token_count = 0;
};

struct Completion {
    std::string answer_text;
    std::uint64_t completion_tokens = 0;
};

/// Answer-generation backend.
class AnswerClient {
public:
    virtual ~AnswerClient() = default;
    virtual Completion complete(const Prompt& prompt) = 0;
    virtual std::string name() const = 0;
};

/// Counts prompt tokens. The whitespace counter is the fallback when no
/// provider tokenizer is configured.
class TokenCounter {
public:
    virtual ~TokenCounter() = default;
    virtual std::size_t count(std::string_view text) const = 0;
    virtual std::string name() const = 0;
};

class WhitespaceTokenCounter final : public TokenCounter {
public:
    std::size_t count(std::string_view text) const override;
    std::string name() const override { return "whitespace"; }
};

/// Whitespace-token count.
std::size_t count_tokens(std::string_view text);

/// Pattern -> answer table; the first regex that matches the prompt's user
/// text wins. No match is Error(ClientError).
class ScriptedClient final : public AnswerClient {
public:
    ScriptedClient() = default;
    explicit ScriptedClient(std::vector<std::pair<std::string, std::string>> table);

    void add(std::string pattern, std::string answer);
    Completion complete(const Prompt& prompt) override;
    std::string name() const override { return "scripted"; }

    std::size_t calls() const noexcept { return calls_; }

private:
    std::vector<std::pair<std::regex, std::string>> table_;
    std::size_t calls_ = 0;
};

struct ReplayAnswer {
    std::string answer_text;
    std::uint64_t prompt_tokens = 0;
    std::uint64_t completion_tokens = 0;
};

/// Pre-computed answers keyed by (query_id, path). Missing keys are
/// Error(MissingFixture).
class ReplayClient final : public AnswerClient {
public:
    ReplayClient() = default;

    /// Line-delimited {"query_id","path","answer_text","prompt_tokens","completion_tokens"}.
    static ReplayClient load(const std::string& file);
    static ReplayClient parse(std::string_view document);

    void add(std::string query_id, Path path, ReplayAnswer answer);
    const ReplayAnswer& lookup(std::string_view query_id, Path path) const;
    bool contains(std::string_view query_id, Path path) const noexcept;

    Completion complete(const Prompt& prompt) override;
    std::string name() const override { return "replay"; }

    std::size_t size() const noexcept { return answers_.size(); }

private:
    std::map<std::pair<std::string, Path>, ReplayAnswer, std::less<>> answers_;
};

struct AnswerRecord {
    std::string query_id;
    Path path = Path::LLM;
    std::string answer_text;
    std::uint64_t prompt_tokens = 0;
    std::uint64_t completion_tokens = 0;
    std::chrono::nanoseconds generation_latency{0};
};

/// Invokes the client and measures wall-clock latency. Client failures that
/// are not already library errors become Error(ClientError).
AnswerRecord answer(const Prompt& prompt, AnswerClient& client);

}  // namespace pathrouter::qa
