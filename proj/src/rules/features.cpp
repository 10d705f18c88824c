#include "pathrouter/rules/features.hpp"

#include "pathrouter/core/error.hpp"
#include "pathrouter/core/text.hpp"

namespace pathrouter::rules {

namespace {

std::vector<std::string> string_list(const nlohmann::json& j, const char* key,
                                     std::vector<std::string> fallback) {
    if (!j.contains(key)) return fallback;
    const auto& arr = j.at(key);
    if (!arr.is_array()) throw Error(ErrorCode::ParseError, std::string("lexicon.") + key + " must be a list");
    std::vector<std::string> out;
    for (const auto& v : arr) {
        if (!v.is_string()) throw Error(ErrorCode::ParseError, std::string("lexicon.") + key + " holds a non-string");
        out.push_back(v.get<std::string>());
    }
    return out;
}

}  // namespace

FeatureLexicon FeatureLexicon::defaults() {
    FeatureLexicon lex;
    lex.numeric_phrases = {"how much", "how many", "percentage", "percent", "proportion", "ratio",
                           "amount", "total", "average", "sum", "calculate", "compute",
                           "quantify", "number of"};
    lex.numeric_patterns = {
        R"(\b(19|20)\d{2}\b)",
        R"(\d[\d,.]*\s*(%|percent\b|million\b|billion\b|thousand\b|bn\b|usd\b|dollars?\b))",
        R"(\$\s*\d)",
    };
    lex.definition_phrases = {"what is", "what are", "what does", "define", "definition of", "meaning of",
                              "what s"};
    lex.explanation_terms = {"explain", "explains", "explained", "explanation", "why", "reason",
                             "reasons", "driver", "drivers", "drove", "describe", "because", "justify"};
    lex.interrogatives = {"what", "which", "who", "whom", "whose", "when", "where", "why", "how"};
    return lex;
}

nlohmann::json FeatureLexicon::to_json() const {
    return {{"numeric_phrases", numeric_phrases},
            {"numeric_patterns", numeric_patterns},
            {"definition_phrases", definition_phrases},
            {"explanation_terms", explanation_terms},
            {"interrogatives", interrogatives}};
}

FeatureLexicon FeatureLexicon::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw Error(ErrorCode::ParseError, "lexicon must be an object");
    const auto d = defaults();
    FeatureLexicon lex;
    lex.numeric_phrases = string_list(j, "numeric_phrases", d.numeric_phrases);
    lex.numeric_patterns = string_list(j, "numeric_patterns", d.numeric_patterns);
    lex.definition_phrases = string_list(j, "definition_phrases", d.definition_phrases);
    lex.explanation_terms = string_list(j, "explanation_terms", d.explanation_terms);
    lex.interrogatives = string_list(j, "interrogatives", d.interrogatives);
    return lex;
}

const std::vector<std::string_view>& known_flags() noexcept {
    static const std::vector<std::string_view> flags{
        "has_numeric_request", "has_explanation_marker", "seeks_definition",
        "seeks_fact_with_explanation", "has_interrogative"};
    return flags;
}

bool is_known_flag(std::string_view name) noexcept {
    for (auto f : known_flags())
        if (f == name) return true;
    return false;
}

std::optional<bool> QueryFeatures::flag(std::string_view name) const noexcept {
    if (name == "has_numeric_request") return has_numeric_request;
    if (name == "has_explanation_marker") return has_explanation_marker;
    if (name == "seeks_definition") return seeks_definition;
    if (name == "seeks_fact_with_explanation") return seeks_fact_with_explanation;
    if (name == "has_interrogative") return !interrogative_markers.empty();
    return std::nullopt;
}

std::vector<FeatureExtractor::Phrase> FeatureExtractor::compile_phrases(
    const std::vector<std::string>& phrases) {
    std::vector<Phrase> out;
    for (const auto& p : phrases) {
        auto tokens = text::tokenize(p);
        if (!tokens.empty()) out.push_back({text::join(tokens), std::move(tokens)});
    }
    return out;
}

FeatureExtractor::FeatureExtractor(FeatureLexicon lexicon) : lexicon_(std::move(lexicon)) {
    numeric_ = compile_phrases(lexicon_.numeric_phrases);
    definition_ = compile_phrases(lexicon_.definition_phrases);
    explanation_ = compile_phrases(lexicon_.explanation_terms);
    interrogatives_ = compile_phrases(lexicon_.interrogatives);
    for (const auto& pattern : lexicon_.numeric_patterns) {
        try {
            numeric_patterns_.emplace_back(pattern, std::regex(pattern, std::regex::ECMAScript));
        } catch (const std::regex_error& e) {
            throw Error(ErrorCode::ParseError, "invalid numeric pattern '" + pattern + "': " + e.what());
        }
    }
}

QueryFeatures FeatureExtractor::extract(std::string_view query_text) const {
    if (text::trim(query_text).empty()) throw Error(ErrorCode::EmptyQuery, "query text is blank");

    QueryFeatures f;
    f.normalized_text = text::tokenize(query_text);
    f.lowered_text = text::to_lower(query_text);
    f.token_count = f.normalized_text.size();

    auto match_any = [&](const std::vector<Phrase>& phrases) {
        bool any = false;
        for (const auto& p : phrases) {
            if (text::contains_sequence(f.normalized_text, p.tokens)) {
                f.matched_keywords.insert(p.text);
                any = true;
            }
        }
        return any;
    };

    bool numeric = match_any(numeric_);
    for (const auto& [source, re] : numeric_patterns_) {
        if (std::regex_search(f.lowered_text, re)) {
            f.matched_keywords.insert(source);
            numeric = true;
        }
    }
    f.has_numeric_request = numeric;
    f.has_explanation_marker = match_any(explanation_);
    const bool definition_marker = match_any(definition_);
    f.seeks_definition = definition_marker && !f.has_numeric_request;
    f.seeks_fact_with_explanation = f.has_numeric_request && f.has_explanation_marker;

    for (const auto& p : interrogatives_) {
        if (text::contains_sequence(f.normalized_text, p.tokens)) f.interrogative_markers.insert(p.text);
    }
    return f;
}

const std::shared_ptr<const FeatureExtractor>& default_extractor() {
    static const auto extractor = std::make_shared<const FeatureExtractor>(FeatureLexicon::defaults());
    return extractor;
}

QueryFeatures extract_features(std::string_view query_text) {
    return default_extractor()->extract(query_text);
}

}  // namespace pathrouter::rules
