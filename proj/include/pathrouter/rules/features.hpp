#pragma once

#include <memory>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace pathrouter::rules {

/// Editable word lists behind the feature predicates. Shipped in the rule
/// file header so they version together with the rules.
struct FeatureLexicon {
    std::vector<std::string> numeric_phrases;   ///< token phrases, e.g. "how much"
    std::vector<std::string> numeric_patterns;  ///< ECMAScript regexes over lowercased text
    std::vector<std::string> definition_phrases;
    std::vector<std::string> explanation_terms;
    std::vector<std::string> interrogatives;

    static FeatureLexicon defaults();

    nlohmann::json to_json() const;
    /// Missing keys keep their default lists.
    static FeatureLexicon from_json(const nlohmann::json& j);

    bool operator==(const FeatureLexicon&) const = default;
};

struct QueryFeatures {
    std::vector<std::string> normalized_text;  ///< lowercased tokens
    std::string lowered_text;                  ///< lowercased raw text, used by PatternMatch
    bool has_numeric_request = false;
    bool has_explanation_marker = false;
    bool seeks_definition = false;
    bool seeks_fact_with_explanation = false;
    std::set<std::string> interrogative_markers;
    std::set<std::string> matched_keywords;  ///< lexicon entries that fired
    std::size_t token_count = 0;

    /// Value of a named boolean flag; nullopt for unknown names.
    std::optional<bool> flag(std::string_view name) const noexcept;

    bool operator==(const QueryFeatures&) const = default;
};

/// Flag names accepted by `(flag ...)` conditions.
const std::vector<std::string_view>& known_flags() noexcept;
bool is_known_flag(std::string_view name) noexcept;

/// Lexicon compiled once (phrases tokenized, regexes built). Immutable and
/// safe to share across threads.
class FeatureExtractor {
public:
    explicit FeatureExtractor(FeatureLexicon lexicon);

    /// Throws Error(EmptyQuery) when the text is blank.
    QueryFeatures extract(std::string_view query_text) const;

    const FeatureLexicon& lexicon() const noexcept { return lexicon_; }

private:
    struct Phrase {
        std::string text;
        std::vector<std::string> tokens;
    };
    static std::vector<Phrase> compile_phrases(const std::vector<std::string>& phrases);

    FeatureLexicon lexicon_;
    std::vector<Phrase> numeric_;
    std::vector<std::pair<std::string, std::regex>> numeric_patterns_;
    std::vector<Phrase> definition_;
    std::vector<Phrase> explanation_;
    std::vector<Phrase> interrogatives_;
};

/// Shared extractor over FeatureLexicon::defaults().
const std::shared_ptr<const FeatureExtractor>& default_extractor();

/// Features under the default lexicon.
QueryFeatures extract_features(std::string_view query_text);

}  // namespace pathrouter::rules
