#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "pathrouter/core/path.hpp"
#include "pathrouter/rules/condition.hpp"
#include "pathrouter/rules/features.hpp"

namespace pathrouter::rules {

enum class RuleOrigin { ExpertSeed, Evolved };

std::string_view to_string(RuleOrigin origin) noexcept;

struct Rule {
    std::string id;
    std::string description;
    ConditionExpr condition;
    Path target_path = Path::DB;
    int delta = 0;
    RuleOrigin origin = RuleOrigin::ExpertSeed;

    bool operator==(const Rule&) const = default;
};

/// Versioned, immutable-by-convention snapshot of routing rules. Share it as
/// `std::shared_ptr<const RuleSet>`; updates produce a new value.
struct RuleSet {
    std::uint64_t version = 0;
    std::vector<Rule> rules;
    PriorityOrder priority;
    std::shared_ptr<const FeatureExtractor> extractor = default_extractor();

    const FeatureLexicon& lexicon() const noexcept { return extractor->lexicon(); }
    const Rule* find(std::string_view id) const noexcept;
};

/// Same version, priority, lexicon and rules (compared in order).
bool semantically_equal(const RuleSet& a, const RuleSet& b);

/// Throws DuplicateRuleId, ParseError (zero delta, depth bound).
void validate(const RuleSet& ruleset);

/// Parses the line-delimited rule document:
///   {"record":"header","version":0,"priority":["DB","Doc","Hybrid","LLM"],"lexicon":{...}}
///   {"id":"r1","description":"...","condition":"(flag has_numeric_request)","path":"DB","delta":3}
/// The header is optional but must come first when present.
RuleSet parse_rules(std::string_view document);
RuleSet load_rules(const std::string& file);

/// Inverse of parse_rules; output is stable for a given RuleSet.
std::string serialize_rules(const RuleSet& ruleset);

/// The four expert seed rules (numeric->DB, how/why->Doc, definition->LLM,
/// fact with explanation->Hybrid), each +3, version 0.
RuleSet seed_rules();

struct FiredRule {
    std::string rule_id;
    Path target_path;
    int delta;

    bool operator==(const FiredRule&) const = default;
};

struct PathScores {
    PathMap<int> scores{};
    std::vector<FiredRule> fired_rules;

    int operator[](Path p) const noexcept { return scores[p]; }
    /// Sum of fired-rule deltas per path; equals `scores` for any scorer output.
    PathMap<int> replay() const noexcept;

    bool operator==(const PathScores&) const = default;
};

/// Additive scores of every rule that fires on the query (base score 0).
/// Judge exceptions surface as Error(JudgeError) naming the rule.
PathScores score_paths(std::string_view query_text, const RuleSet& ruleset, Judge* judge = nullptr);
PathScores score_paths(const QueryFeatures& feats, const RuleSet& ruleset, Judge* judge = nullptr);

/// Argmax over paths; equal maxima resolve to the earliest path in `priority`.
Path select_path(const PathMap<int>& scores, const PriorityOrder& priority) noexcept;
inline Path select_path(const PathScores& scores, const PriorityOrder& priority) noexcept {
    return select_path(scores.scores, priority);
}

}  // namespace pathrouter::rules
