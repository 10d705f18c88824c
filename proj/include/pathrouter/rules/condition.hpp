#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <regex>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pathrouter/rules/features.hpp"

namespace pathrouter::rules {

inline constexpr std::size_t kMaxConditionDepth = 8;

class ConditionExpr;

/// `(kw "a" "b" ...)`: any keyword (single token or contiguous phrase) present.
struct KeywordAny {
    std::vector<std::string> keywords;
    std::vector<std::vector<std::string>> token_seqs;  ///< keywords, tokenized
};
/// `(re "pattern")`: ECMAScript regex searched in the lowercased query text.
struct PatternMatch {
    std::string pattern;
    std::shared_ptr<const std::regex> compiled;
};
/// `(flag name)`: one of known_flags().
struct FeatureFlag {
    std::string name;
};
/// `(sem "description")`: resolved by a Judge.
struct SemanticPredicate {
    std::string description;
};
struct AllOf {
    std::vector<ConditionExpr> terms;
};
struct AnyOf {
    std::vector<ConditionExpr> terms;
};
struct NotOf {
    std::vector<ConditionExpr> term;  ///< exactly one element
};

class ConditionExpr {
public:
    using Node = std::variant<KeywordAny, PatternMatch, FeatureFlag, SemanticPredicate, AllOf, AnyOf, NotOf>;

    ConditionExpr() = default;
    ConditionExpr(Node node) : node_(std::move(node)) {}  // NOLINT: implicit by design of the builders

    const Node& node() const noexcept { return node_; }

    /// Leaves have depth 1.
    std::size_t depth() const noexcept;
    bool has_semantic() const noexcept;

    static ConditionExpr keyword_any(std::vector<std::string> keywords);
    static ConditionExpr pattern(std::string pattern);
    static ConditionExpr flag(std::string name);
    static ConditionExpr semantic(std::string description);
    static ConditionExpr all_of(std::vector<ConditionExpr> terms);
    static ConditionExpr any_of(std::vector<ConditionExpr> terms);
    static ConditionExpr negate(ConditionExpr term);

private:
    Node node_{KeywordAny{}};
};

/// Parses the s-expression condition syntax:
///   (kw "a" ...) (re "pat") (flag name) (sem "text") (and c...) (or c...) (not c)
/// `line` is only used for error reporting.
ConditionExpr parse_condition(std::string_view source, std::size_t line = 0);

/// Canonical single-spaced rendering; parse_condition(serialize(c)) == c.
std::string serialize(const ConditionExpr& cond);

bool operator==(const ConditionExpr& a, const ConditionExpr& b) noexcept;

/// Answers semantic predicates about a query (typically an LLM call).
class Judge {
public:
    virtual ~Judge() = default;
    virtual bool holds(std::string_view query_text, std::string_view predicate) = 0;
};

/// Per-routing-call memo of judge answers keyed by predicate text.
using JudgeMemo = std::map<std::string, bool, std::less<>>;

/// Judge-free trees are pure. Throws Error(JudgeUnavailable) if the tree has a
/// semantic leaf and no judge is given; judge exceptions become Error(JudgeError).
bool evaluate_condition(const ConditionExpr& cond, const QueryFeatures& feats, Judge* judge = nullptr,
                        JudgeMemo* memo = nullptr);

}  // namespace pathrouter::rules
