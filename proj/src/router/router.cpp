#include "pathrouter/router/router.hpp"

#include "pathrouter/core/log.hpp"
#include "pathrouter/core/text.hpp"

namespace pathrouter::router {

std::string_view to_string(DecisionSource s) noexcept { return s == DecisionSource::CacheHit ? "cache_hit" : "scorer"; }

std::string query_id_for(std::string_view query_text) {
    return text::hex64(text::fnv1a64(text::join(text::tokenize(query_text))));
}

Router::Router(std::shared_ptr<const rules::RuleSet> ruleset, RouterConfig config,
               std::shared_ptr<cache::EmbeddingProvider> provider, std::shared_ptr<cache::MetaCache> cache,
               std::shared_ptr<PathScorer> scorer)
    : config_(config),
      provider_(std::move(provider)),
      cache_(std::move(cache)),
      scorer_(scorer ? std::move(scorer) : std::make_shared<RuleScorer>()),
      ruleset_(std::move(ruleset)) {
    if (!ruleset_) throw Error(ErrorCode::ConfigError, "router needs a rule set");
    rules::validate(*ruleset_);
    if (cache_ && !provider_) throw Error(ErrorCode::ConfigError, "a cache needs an embedding provider");
    if (cache_ && provider_->dimension() != cache_->dimension())
        throw Error(ErrorCode::DimensionMismatch, "provider and cache dimensions differ");
    if (!(config_.tau > 0.0 && config_.tau <= 1.0)) throw Error(ErrorCode::ConfigError, "tau must lie in (0, 1]");
}

RoutingDecision Router::route(std::string_view query_text) {
    if (text::trim(query_text).empty()) throw Error(ErrorCode::EmptyQuery, "query text is blank");

    std::shared_lock epoch(epoch_);
    const auto rs = ruleset_;
    const auto start = std::chrono::steady_clock::now();

    RoutingDecision d;
    d.query_text = std::string(query_text);
    d.query_id = query_id_for(query_text);
    d.ruleset_version = rs->version;

    std::optional<cache::Embedding> z;
    if (cache_) {
        try {
            z = cache::embed(query_text, *provider_);
        } catch (const Error& e) {
            const bool provider_side = e.code() == ErrorCode::ProviderError ||
                                       e.code() == ErrorCode::DimensionMismatch ||
                                       e.code() == ErrorCode::NormalizationError;
            if (!provider_side || !config_.degrade_on_provider_error) throw;
            log::warn(std::string("embedding failed, routing without cache: ") + e.what());
            d.degraded_cache = true;
        }
    }

    std::optional<cache::CacheHit> hit;
    if (z) hit = cache_->lookup(*z, config_.tau);

    if (hit) {
        d.scores = hit->entry.scores;
        d.chosen_path = hit->entry.chosen_path;
        d.source = DecisionSource::CacheHit;
        d.cache_similarity = hit->similarity;
    } else {
        d.scores = scorer_->score(query_text, *rs);
        scorer_calls_.fetch_add(1, std::memory_order_relaxed);
        d.chosen_path = rules::select_path(d.scores, rs->priority);
        d.source = DecisionSource::Scorer;
        if (z) cache_->insert(*z, d.scores, d.chosen_path, rs->priority);
    }
    d.routing_latency = std::chrono::steady_clock::now() - start;
    return d;
}

std::vector<BatchItem> Router::route_batch(const std::vector<std::string>& queries, bool fail_fast) {
    if (queries.empty()) throw Error(ErrorCode::EmptyBatch, "route_batch needs at least one query");
    std::vector<BatchItem> out;
    out.reserve(queries.size());
    for (const auto& q : queries) {
        BatchItem item;
        try {
            item.decision = route(q);
        } catch (const Error& e) {
            if (fail_fast) throw;
            item.error_code = e.code();
            item.error_message = e.what();
        }
        out.push_back(std::move(item));
    }
    return out;
}

std::shared_ptr<const rules::RuleSet> Router::ruleset() const {
    std::shared_lock epoch(epoch_);
    return ruleset_;
}

void Router::swap_rules(std::shared_ptr<const rules::RuleSet> next) {
    if (!next) throw Error(ErrorCode::ConfigError, "cannot install a null rule set");
    rules::validate(*next);
    std::unique_lock epoch(epoch_);
    const bool version_changed = next->version != ruleset_->version;
    ruleset_ = std::move(next);
    if (version_changed && cache_) cache_->invalidate_all();
}

}  // namespace pathrouter::router
