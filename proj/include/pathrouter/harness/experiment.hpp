#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pathrouter/cache/embedding.hpp"
#include "pathrouter/cache/meta_cache.hpp"
#include "pathrouter/evolution/updater.hpp"
#include "pathrouter/harness/dataset.hpp"
#include "pathrouter/harness/oracle.hpp"
#include "pathrouter/qa/client.hpp"
#include "pathrouter/qa/prompt.hpp"
#include "pathrouter/retrieval/evidence.hpp"
#include "pathrouter/router/router.hpp"
#include "pathrouter/rules/ruleset.hpp"

namespace pathrouter::harness {

enum class Strategy { Basic, Doc, Db, Hybrid, RuleBasedStatic, Route, RouteCached, ScoreAgent };

std::string_view to_string(Strategy s) noexcept;
std::optional<Strategy> parse_strategy(std::string_view s) noexcept;
/// The path a fixed strategy forces, if it is one.
std::optional<Path> forced_path(Strategy s) noexcept;

struct ExperimentConfig {
    Strategy strategy = Strategy::Route;
    double tau = cache::MetaCache::kDefaultTau;
    std::size_t batch_size = 100;
    evolution::UpdateMode update_mode = evolution::UpdateMode::Off;
    std::uint64_t seed = 0;
    std::size_t eval_n = kDefaultEvalN;
    std::size_t train_n = kDefaultTrainN;
    std::size_t cache_capacity = cache::MetaCache::kDefaultCapacity;
    evolution::HeuristicConfig heuristic;
    retrieval::RetrievalConfig retrieval;

    /// Throws ConfigError on an out-of-range value.
    void validate() const;
};

/// Borrowed collaborators. `answers` is required; the rest are optional.
struct ExperimentInputs {
    const std::vector<QARecord>* dataset = nullptr;
    const retrieval::RetrievalIndex* index = nullptr;
    qa::AnswerClient* answers = nullptr;
    rules::RuleSet rules;
    qa::PromptTemplates templates = qa::PromptTemplates::defaults();
    /// Cache embeddings for route_cached; hashing provider when null.
    std::shared_ptr<cache::EmbeddingProvider> embedder;
    /// Required for update_mode=agent.
    evolution::ExpertClient* expert = nullptr;
    /// Required for semantic rule conditions.
    rules::Judge* judge = nullptr;
    /// Required for strategy=score_agent.
    std::shared_ptr<router::PathScorer> chooser;
    /// Optional model-backed structured-query generation.
    qa::AnswerClient* sql_client = nullptr;
};

struct PathOutcome {
    std::string answer;
    bool correct = false;
    double f1 = 0.0;
    Path answered_path = Path::LLM;
    std::uint64_t prompt_tokens = 0;
    std::uint64_t completion_tokens = 0;
    bool degraded = false;
    std::string error;  ///< non-empty when the query failed on this path
    std::chrono::nanoseconds generation_latency{0};
};

struct QueryResult {
    QARecord record;
    std::optional<router::RoutingDecision> decision;  ///< route strategies only
    Path chosen_path = Path::LLM;
    PathOutcome outcome;
    std::string error;
};

struct EvalMetrics {
    std::size_t n = 0;
    double f1 = 0.0;
    double accuracy = 0.0;
    double mean_prompt_tokens = 0.0;
    double mean_completion_tokens = 0.0;
    double mean_routing_time_ms = 0.0;
    PathMap<double> path_distribution{};
    std::size_t degraded = 0;
    std::size_t errors = 0;
};

struct UpdatePoint {
    std::size_t updates_applied = 0;
    std::uint64_t version = 0;
    std::size_t rule_count = 0;
    double eval_accuracy = 0.0;  ///< eval set routed under this rule set
};

struct ExperimentReport {
    ExperimentConfig config;
    std::string answer_client;
    std::string token_counter = "whitespace";
    std::size_t train_n = 0;
    std::vector<QueryResult> results;          ///< eval order
    EvalMetrics metrics;
    /// Forced per-path outcomes for every eval query, same order as results.
    std::vector<PathMap<PathOutcome>> forced;
    PathMap<EvalMetrics> forced_metrics;
    OracleAssignment oracle;
    std::vector<evolution::UpdateEvent> updates;
    std::vector<UpdatePoint> update_curve;
    std::shared_ptr<const rules::RuleSet> final_rules;
    std::optional<cache::CacheStats> cache_stats;  ///< eval phase only
    std::optional<cache::CacheStats> cache_stats_total;
    std::shared_ptr<cache::MetaCache> cache;
    std::vector<evolution::OutcomeRecord> outcomes;  ///< eval outcomes
};

/// Splits the dataset, answers every eval query on all four paths (oracle,
/// forced-path tables), trains route strategies on the train split when an
/// update mode is set, then evaluates the strategy with rules frozen.
/// Per-query failures are recorded, not thrown. Throws ConfigError.
ExperimentReport run_experiment(const ExperimentConfig& config, const ExperimentInputs& inputs);

EvalMetrics summarize(const std::vector<QueryResult>& results);

}  // namespace pathrouter::harness
