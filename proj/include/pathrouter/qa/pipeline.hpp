#pragma once

#include <cstddef>
#include <memory>
#include <semaphore>
#include <string>
#include <string_view>

#include "pathrouter/core/path.hpp"
#include "pathrouter/qa/client.hpp"
#include "pathrouter/qa/prompt.hpp"
#include "pathrouter/retrieval/evidence.hpp"

namespace pathrouter::qa {

struct PipelineResult {
    AnswerRecord record;                 ///< record.path is the path actually answered
    Path requested_path = Path::LLM;
    bool degraded = false;               ///< evidence was missing or partial
    std::string degraded_reason;
    retrieval::EvidenceBundle evidence;
    Prompt prompt;
};

/// Evidence, prompt, answer. When retrieval for the requested path fails
/// the query is answered on the LLM path and marked degraded; a Hybrid
/// query that lost its facts keeps its passages and is marked degraded.
class QaPipeline {
public:
    QaPipeline(const retrieval::RetrievalIndex& index, PromptTemplates templates, AnswerClient& client,
               retrieval::RetrievalConfig config = {}, AnswerClient* sql_client = nullptr);

    PipelineResult run(std::string_view query_id, std::string_view question, Path path) const;

    const PromptTemplates& templates() const noexcept { return templates_; }
    const retrieval::RetrievalConfig& config() const noexcept { return config_; }

private:
    const retrieval::RetrievalIndex& index_;
    PromptTemplates templates_;
    AnswerClient& client_;
    retrieval::RetrievalConfig config_;
    AnswerClient* sql_client_;
};

/// Caps the number of concurrent complete() calls on the wrapped client.
class ThrottledClient final : public AnswerClient {
public:
    ThrottledClient(AnswerClient& inner, std::ptrdiff_t max_in_flight);
    Completion complete(const Prompt& prompt) override;
    std::string name() const override { return inner_.name(); }

private:
    static constexpr std::ptrdiff_t kMaxSlots = 1024;
    AnswerClient& inner_;
    std::counting_semaphore<kMaxSlots> slots_;
};

}  // namespace pathrouter::qa
