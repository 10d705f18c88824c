#pragma once

#include <chrono>
#include <cstdint>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pathrouter/core/path.hpp"
#include "pathrouter/router/router.hpp"
#include "pathrouter/rules/ruleset.hpp"

namespace pathrouter::evolution {

struct OutcomeRecord {
    std::string query_id;
    std::string query_text;
    router::RoutingDecision decision;
    std::string predicted_answer;
    std::vector<std::string> gold_answers;
    bool correct = false;
    std::uint64_t prompt_tokens = 0;
    std::uint64_t completion_tokens = 0;
    std::chrono::nanoseconds answer_latency{0};
};

struct TokenCounts {
    std::uint64_t prompt = 0;
    std::uint64_t completion = 0;
};

/// Grades the prediction with harness::exact_match.
OutcomeRecord record_outcome(const router::RoutingDecision& decision, std::string predicted,
                             std::vector<std::string> golds, TokenCounts tokens = {},
                             std::chrono::nanoseconds latency = {});

/// JSON-lines form used by `run` output and the `evolve` command.
nlohmann::json to_json(const OutcomeRecord& r);
OutcomeRecord outcome_from_json(const nlohmann::json& j);
std::vector<OutcomeRecord> load_outcomes(const std::string& file);

/// Append-only, thread-safe outcome buffer.
class OutcomeLog {
public:
    void append(OutcomeRecord record);
    std::size_t size() const;
    /// Removes and returns everything buffered so far.
    std::vector<OutcomeRecord> drain();

private:
    mutable std::mutex mutex_;
    std::vector<OutcomeRecord> records_;
};

struct PathStat {
    Path path = Path::DB;
    std::uint64_t selected_count = 0;
    std::uint64_t correct_count = 0;
    double accuracy = 0.0;
};

struct RuleStat {
    std::string rule_id;
    std::uint64_t trigger_count = 0;
    std::uint64_t correct_when_triggered = 0;
    double accuracy_when_triggered = 0.0;
};

struct QueryOutcome {
    std::string query_text;
    Path chosen_path = Path::DB;
    bool correct = false;
};

/// Batch summary handed to the rule updater: (i) queries, (ii) rule-set
/// snapshot, (iii) path-level and (iv) rule-level statistics.
struct DiagnosticsReport {
    std::uint64_t batch_index = 0;
    std::vector<QueryOutcome> queries;
    rules::RuleSet ruleset;
    PathMap<PathStat> path_stats;
    std::vector<RuleStat> rule_stats;  ///< one per rule, in rule-set order

    double overall_accuracy() const noexcept;
    std::uint64_t total_triggers() const noexcept;
    const RuleStat* rule_stat(std::string_view id) const noexcept;
};

/// Throws EmptyBatch. Fired rules not present in `ruleset` are ignored.
DiagnosticsReport build_diagnostics(const std::vector<OutcomeRecord>& batch, const rules::RuleSet& ruleset,
                                    std::uint64_t batch_index = 0);

/// Deterministic plain-text rendering, sections (i)-(iv) in order. This is the
/// exact text an expert client receives.
std::string render_report(const DiagnosticsReport& report);

/// Line-delimited records: one summary, one per path, one per rule.
std::string report_records(const DiagnosticsReport& report);

}  // namespace pathrouter::evolution
