#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "pathrouter/cache/embedding.hpp"
#include "pathrouter/evolution/updater.hpp"
#include "pathrouter/qa/client.hpp"
#include "pathrouter/router/router.hpp"
#include "pathrouter/rules/condition.hpp"

namespace pathrouter::qa {

/// OpenAI-compatible endpoint settings.
struct EndpointConfig {
    std::string base_url;  ///< e.g. http://localhost:8000/v1
    std::string model;
    std::string api_key;   ///< sent as a bearer token when non-empty
    std::chrono::seconds timeout{60};

    /// Reads PATHROUTER_LLM_BASE_URL, PATHROUTER_LLM_MODEL and
    /// PATHROUTER_LLM_API_KEY (or the PATHROUTER_EMBED_* variants with
    /// `embedding` set, falling back to the LLM ones). Nullopt when the base
    /// URL or model is unset.
    static std::optional<EndpointConfig> from_env(bool embedding = false);
};

/// Minimal JSON-over-HTTP POST. Transport failures and non-2xx statuses are
/// Error(ClientError).
nlohmann::json post_json(const EndpointConfig& endpoint, std::string_view route, const nlohmann::json& body);

/// Strips a surrounding markdown code fence, if any.
std::string strip_code_fence(std::string_view reply);

/// POST {base}/chat/completions with the system and user messages.
class HttpChatClient final : public AnswerClient {
public:
    explicit HttpChatClient(EndpointConfig endpoint, double temperature = 0.0);
    Completion complete(const Prompt& prompt) override;
    std::string name() const override { return "http:" + endpoint_.model; }
    /// Plain two-message chat, used by the other live adapters.
    Completion chat(std::string_view system, std::string_view user);

private:
    EndpointConfig endpoint_;
    double temperature_;
};

/// POST {base}/embeddings. The dimension is fixed by the first response
/// unless given; later mismatches reach embed() as DimensionMismatch.
class HttpEmbeddingProvider final : public cache::EmbeddingProvider {
public:
    explicit HttpEmbeddingProvider(EndpointConfig endpoint, std::size_t dimension = 0);
    std::size_t dimension() const noexcept override { return dimension_; }
    std::vector<float> raw_embed(std::string_view text) override;
    std::string name() const override { return "http:" + endpoint_.model; }

private:
    EndpointConfig endpoint_;
    std::size_t dimension_;
};

/// Rule-set rewriting by a chat model: the reply must be a complete rule file.
class ChatExpertClient final : public evolution::ExpertClient {
public:
    explicit ChatExpertClient(HttpChatClient& chat) : chat_(chat) {}
    std::string propose(std::string_view rules_document, std::string_view report_text) override;

private:
    HttpChatClient& chat_;
};

/// Yes/no judgement for semantic predicates.
class ChatJudge final : public rules::Judge {
public:
    explicit ChatJudge(HttpChatClient& chat) : chat_(chat) {}
    bool holds(std::string_view query_text, std::string_view predicate) override;

private:
    HttpChatClient& chat_;
};

/// Asks the model to pick a path directly; the pick scores 1, others 0.
/// An unparseable reply picks nothing, so the priority head wins.
class ChatChooserScorer final : public router::PathScorer {
public:
    explicit ChatChooserScorer(AnswerClient& client) : client_(client) {}
    rules::PathScores score(std::string_view query_text, const rules::RuleSet& ruleset) override;

private:
    AnswerClient& client_;
};

/// First path name found in a free-text reply, if any.
std::optional<Path> parse_path_choice(std::string_view reply);

}  // namespace pathrouter::qa
