#include "pathrouter/qa/pipeline.hpp"

#include <algorithm>

#include "pathrouter/core/error.hpp"
#include "pathrouter/core/log.hpp"

namespace pathrouter::qa {

QaPipeline::QaPipeline(const retrieval::RetrievalIndex& index, PromptTemplates templates, AnswerClient& client,
                       retrieval::RetrievalConfig config, AnswerClient* sql_client)
    : index_(index), templates_(std::move(templates)), client_(client), config_(config), sql_client_(sql_client) {
    templates_.validate();
}

PipelineResult QaPipeline::run(std::string_view query_id, std::string_view question, Path path) const {
    PipelineResult out;
    out.requested_path = path;
    try {
        out.evidence = retrieval::gather_evidence(path, question, index_, config_, sql_client_);
        if (out.evidence.degraded) {
            out.degraded = true;
            out.degraded_reason = out.evidence.degraded_reason;
        }
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ConfigError) throw;
        log::debug(std::string("falling back to LLM for ") + std::string(query_id) + ": " + e.what());
        out.degraded = true;
        out.degraded_reason = e.what();
        out.evidence = {};
        out.evidence.path = Path::LLM;
    }
    out.prompt = build_prompt(query_id, question, out.evidence, templates_);
    out.record = answer(out.prompt, client_);
    return out;
}

ThrottledClient::ThrottledClient(AnswerClient& inner, std::ptrdiff_t max_in_flight)
    : inner_(inner), slots_(std::clamp<std::ptrdiff_t>(max_in_flight, 1, kMaxSlots)) {}

Completion ThrottledClient::complete(const Prompt& prompt) {
    slots_.acquire();
    try {
        auto c = inner_.complete(prompt);
        slots_.release();
        return c;
    } catch (...) {
        slots_.release();
        throw;
    }
}

}  // namespace pathrouter::qa
