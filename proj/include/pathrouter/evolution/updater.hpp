#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pathrouter/evolution/diagnostics.hpp"
#include "pathrouter/router/router.hpp"
#include "pathrouter/rules/ruleset.hpp"

namespace pathrouter::evolution {

/// Rule-making expert: receives the serialized rule file and the rendered
/// diagnostics report, returns a complete replacement rule document.
class ExpertClient {
public:
    virtual ~ExpertClient() = default;
    virtual std::string propose(std::string_view rules_document, std::string_view report_text) = 0;
};

/// Asks the expert for a new rule set and validates it as a whole.
/// The result has version = ruleset.version + 1; rule ids absent from the
/// current set are marked as evolved. Throws ReportVersionMismatch,
/// ExpertClientError, or InvalidProposedRules (the caller keeps the old set).
rules::RuleSet update_rules_agent(const rules::RuleSet& ruleset, const DiagnosticsReport& report,
                                  ExpertClient& expert);

struct HeuristicConfig {
    std::uint64_t min_total_triggers = 10;  ///< below this the report is degenerate
    std::uint64_t min_triggers = 5;         ///< per-rule evidence threshold
    double band = 0.10;                     ///< margin around the batch accuracy
    int max_abs_delta = 5;
};

/// Deterministic fallback updater. For each rule with enough triggers:
/// accuracy >= batch + band strengthens it (|delta| + 1, capped), accuracy <=
/// batch - band weakens it (|delta| - 1); a rule whose delta reaches 0 is
/// removed. Never synthesizes rules. Throws DegenerateReport.
rules::RuleSet update_rules_heuristic(const rules::RuleSet& ruleset, const DiagnosticsReport& report,
                                      const HeuristicConfig& config = {});

enum class UpdateMode { Agent, Heuristic, Off };

std::string_view to_string(UpdateMode mode) noexcept;
std::optional<UpdateMode> parse_update_mode(std::string_view s) noexcept;

struct UpdateEvent {
    std::uint64_t batch_index = 0;
    std::uint64_t from_version = 0;
    std::uint64_t to_version = 0;
    bool accepted = false;
    std::string message;
    double batch_accuracy = 0.0;
    std::size_t rule_count = 0;
};

/// Batches graded outcomes and, every `batch_size` records, builds diagnostics,
/// runs the configured updater and swaps the router onto the result. Failed
/// updates leave the active rule set in place.
class UpdateLoop {
public:
    UpdateLoop(router::Router& router, UpdateMode mode, std::size_t batch_size, HeuristicConfig heuristic = {},
               ExpertClient* expert = nullptr);

    /// Returns true when this record closed a batch and an update was attempted.
    bool record(OutcomeRecord outcome);

    const std::vector<UpdateEvent>& history() const noexcept { return history_; }
    std::size_t updates_applied() const noexcept;
    /// Versions installed so far, starting with the initial one.
    std::vector<std::uint64_t> versions() const;

    /// Last diagnostics report built, if any.
    const std::optional<DiagnosticsReport>& last_report() const noexcept { return last_report_; }

private:
    void run_update();

    router::Router& router_;
    UpdateMode mode_;
    std::size_t batch_size_;
    HeuristicConfig heuristic_;
    ExpertClient* expert_;
    OutcomeLog buffer_;
    std::uint64_t batches_ = 0;
    std::uint64_t initial_version_;
    std::vector<UpdateEvent> history_;
    std::optional<DiagnosticsReport> last_report_;
};

}  // namespace pathrouter::evolution
