#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "pathrouter/cache/embedding.hpp"
#include "pathrouter/cache/meta_cache.hpp"
#include "pathrouter/core/error.hpp"
#include "pathrouter/rules/ruleset.hpp"

namespace pathrouter::router {

enum class DecisionSource { CacheHit, Scorer };

std::string_view to_string(DecisionSource s) noexcept;

struct RoutingDecision {
    std::string query_id;
    std::string query_text;
    rules::PathScores scores;
    Path chosen_path = Path::DB;
    DecisionSource source = DecisionSource::Scorer;
    std::optional<double> cache_similarity;
    std::uint64_t ruleset_version = 0;
    std::chrono::nanoseconds routing_latency{0};
    bool degraded_cache = false;  ///< embedding failed; routed without the cache
};

/// Stable id: FNV-1a 64 (hex) over the lowercased, token-normalized text.
std::string query_id_for(std::string_view query_text);

/// Produces path scores for a query under a rule set. The default is the rule
/// engine; tests and LLM-chooser baselines substitute their own.
class PathScorer {
public:
    virtual ~PathScorer() = default;
    virtual rules::PathScores score(std::string_view query_text, const rules::RuleSet& ruleset) = 0;
};

class RuleScorer final : public PathScorer {
public:
    explicit RuleScorer(rules::Judge* judge = nullptr) : judge_(judge) {}
    rules::PathScores score(std::string_view query_text, const rules::RuleSet& ruleset) override {
        return rules::score_paths(query_text, ruleset, judge_);
    }

private:
    rules::Judge* judge_;
};

struct RouterConfig {
    double tau = cache::MetaCache::kDefaultTau;
    /// On embedding failure, route without the cache instead of failing.
    bool degrade_on_provider_error = true;
};

struct BatchItem {
    std::optional<RoutingDecision> decision;
    std::optional<ErrorCode> error_code;
    std::string error_message;

    bool ok() const noexcept { return decision.has_value(); }
};

/// Per-query orchestration: meta-cache first, rule scoring on a miss, then
/// write-back. Safe for concurrent callers. Rule-set swaps wait for in-flight
/// routes, then invalidate the cache before any further route completes.
class Router {
public:
    /// `cache` and `provider` may both be null to route without caching.
    Router(std::shared_ptr<const rules::RuleSet> ruleset, RouterConfig config,
           std::shared_ptr<cache::EmbeddingProvider> provider = nullptr,
           std::shared_ptr<cache::MetaCache> cache = nullptr, std::shared_ptr<PathScorer> scorer = nullptr);

    RoutingDecision route(std::string_view query_text);

    /// Sequential route calls in order. Errors are recorded per item unless
    /// `fail_fast`, in which case the first error is rethrown. Throws
    /// EmptyBatch on an empty list.
    std::vector<BatchItem> route_batch(const std::vector<std::string>& queries, bool fail_fast = false);

    std::shared_ptr<const rules::RuleSet> ruleset() const;

    /// Installs a new rule set; a version change invalidates the cache.
    void swap_rules(std::shared_ptr<const rules::RuleSet> next);

    std::uint64_t scorer_invocations() const noexcept { return scorer_calls_.load(); }
    const std::shared_ptr<cache::MetaCache>& cache() const noexcept { return cache_; }
    const RouterConfig& config() const noexcept { return config_; }

private:
    RouterConfig config_;
    std::shared_ptr<cache::EmbeddingProvider> provider_;
    std::shared_ptr<cache::MetaCache> cache_;
    std::shared_ptr<PathScorer> scorer_;

    mutable std::shared_mutex epoch_;  ///< shared by routes, exclusive for swaps
    std::shared_ptr<const rules::RuleSet> ruleset_;
    std::atomic<std::uint64_t> scorer_calls_{0};
};

}  // namespace pathrouter::router
