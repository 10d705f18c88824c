#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "pathrouter/core/path.hpp"
#include "pathrouter/qa/client.hpp"
#include "pathrouter/retrieval/evidence.hpp"

namespace pathrouter::qa {

/// Always placed in front of injected database facts. Templates cannot
/// remove it: the {facts} placeholder expands to this line plus renderings.
inline constexpr std::string_view kImmutabilityInstruction =
    "The database facts below are exact query results. Do not alter, round, convert or recompute any value; "
    "copy values verbatim when you use them.";

/// Per-path prompt templates. Placeholders: {question} everywhere,
/// {passages} for Doc and Hybrid, {facts} for DB and Hybrid.
struct PromptTemplates {
    int version = 1;
    PathMap<std::string> system;
    PathMap<std::string> user;
    std::string passage = "[{doc_id}] {text}";

    static PromptTemplates defaults();
    /// JSON object {"version", "system": {path: text}, "user": {path: text}, "passage"}.
    /// Missing keys or placeholders are TemplateMissing.
    static PromptTemplates from_json(const nlohmann::json& j);
    static PromptTemplates load(const std::filesystem::path& file);
    nlohmann::json to_json() const;
    /// Throws TemplateMissing when a required placeholder is absent.
    void validate() const;
};

/// Assembles question, then passages, then facts. Deterministic.
/// Throws TemplateMissing, or SchemaError when the bundle carries evidence
/// its path does not allow.
Prompt build_prompt(std::string_view query_id, std::string_view question, const retrieval::EvidenceBundle& bundle,
                    const PromptTemplates& templates);

}  // namespace pathrouter::qa
