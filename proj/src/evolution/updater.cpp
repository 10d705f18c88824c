#include "pathrouter/evolution/updater.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>

#include "pathrouter/core/error.hpp"
#include "pathrouter/core/log.hpp"
#include "pathrouter/core/text.hpp"

namespace pathrouter::evolution {

rules::RuleSet update_rules_agent(const rules::RuleSet& ruleset, const DiagnosticsReport& report,
                                  ExpertClient& expert) {
    if (report.ruleset.version != ruleset.version) {
        throw Error(ErrorCode::ReportVersionMismatch, "report built for version " +
                                                          std::to_string(report.ruleset.version) + ", rule set is " +
                                                          std::to_string(ruleset.version));
    }
    std::string proposal;
    try {
        proposal = expert.propose(rules::serialize_rules(ruleset), render_report(report));
    } catch (const std::exception& e) {
        throw Error(ErrorCode::ExpertClientError, e.what());
    }

    rules::RuleSet next;
    try {
        next = rules::parse_rules(proposal);
    } catch (const Error& e) {
        throw Error(ErrorCode::InvalidProposedRules, e.what());
    }
    if (!(next.priority == ruleset.priority)) log::warn("expert proposal changes the tie-break priority order");

    std::set<std::string, std::less<>> known;
    for (const auto& r : ruleset.rules) known.insert(r.id);
    for (auto& r : next.rules)
        if (!known.contains(r.id)) r.origin = rules::RuleOrigin::Evolved;
    next.version = ruleset.version + 1;
    return next;
}

rules::RuleSet update_rules_heuristic(const rules::RuleSet& ruleset, const DiagnosticsReport& report,
                                      const HeuristicConfig& config) {
    if (report.queries.empty() || report.total_triggers() < config.min_total_triggers) {
        throw Error(ErrorCode::DegenerateReport, "report has " + std::to_string(report.total_triggers()) +
                                                     " rule triggers, need " +
                                                     std::to_string(config.min_total_triggers));
    }
    const double batch_accuracy = report.overall_accuracy();
    rules::RuleSet next = ruleset;
    next.rules.clear();
    for (const auto& rule : ruleset.rules) {
        rules::Rule r = rule;
        const RuleStat* stat = report.rule_stat(rule.id);
        if (stat && stat->trigger_count >= config.min_triggers) {
            const int sign = r.delta > 0 ? 1 : -1;
            int magnitude = std::abs(r.delta);
            if (stat->accuracy_when_triggered >= batch_accuracy + config.band) {
                if (magnitude < config.max_abs_delta) ++magnitude;
            } else if (stat->accuracy_when_triggered <= batch_accuracy - config.band) {
                --magnitude;
            }
            if (magnitude == 0) continue;
            r.delta = sign * magnitude;
        }
        next.rules.push_back(std::move(r));
    }
    next.version = ruleset.version + 1;
    return next;
}

std::string_view to_string(UpdateMode mode) noexcept {
    switch (mode) {
        case UpdateMode::Agent: return "agent";
        case UpdateMode::Heuristic: return "heuristic";
        case UpdateMode::Off: return "off";
    }
    return "?";
}

std::optional<UpdateMode> parse_update_mode(std::string_view s) noexcept {
    const auto v = text::to_lower(s);
    if (v == "agent") return UpdateMode::Agent;
    if (v == "heuristic") return UpdateMode::Heuristic;
    if (v == "off") return UpdateMode::Off;
    return std::nullopt;
}

UpdateLoop::UpdateLoop(router::Router& router, UpdateMode mode, std::size_t batch_size, HeuristicConfig heuristic,
                       ExpertClient* expert)
    : router_(router),
      mode_(mode),
      batch_size_(batch_size),
      heuristic_(heuristic),
      expert_(expert),
      initial_version_(router.ruleset()->version) {
    if (batch_size_ == 0) throw Error(ErrorCode::ConfigError, "batch size must be at least 1");
    if (mode_ == UpdateMode::Agent && expert_ == nullptr)
        throw Error(ErrorCode::ConfigError, "agent update mode needs an expert client");
}

bool UpdateLoop::record(OutcomeRecord outcome) {
    if (mode_ == UpdateMode::Off) return false;
    buffer_.append(std::move(outcome));
    if (buffer_.size() < batch_size_) return false;
    run_update();
    return true;
}

void UpdateLoop::run_update() {
    const auto batch = buffer_.drain();
    const auto current = router_.ruleset();
    UpdateEvent ev;
    ev.batch_index = batches_++;
    ev.from_version = current->version;
    ev.to_version = current->version;
    ev.rule_count = current->rules.size();
    try {
        auto report = build_diagnostics(batch, *current, ev.batch_index);
        ev.batch_accuracy = report.overall_accuracy();
        rules::RuleSet next = mode_ == UpdateMode::Agent ? update_rules_agent(*current, report, *expert_)
                                                         : update_rules_heuristic(*current, report, heuristic_);
        last_report_ = std::move(report);
        ev.to_version = next.version;
        ev.rule_count = next.rules.size();
        router_.swap_rules(std::make_shared<const rules::RuleSet>(std::move(next)));
        ev.accepted = true;
        ev.message = "updated";
    } catch (const Error& e) {
        ev.message = e.what();
        log::warn(std::string("rule update rejected, keeping version ") + std::to_string(current->version) + ": " +
                  e.what());
    }
    history_.push_back(std::move(ev));
}

std::size_t UpdateLoop::updates_applied() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(history_.begin(), history_.end(), [](const UpdateEvent& e) { return e.accepted; }));
}

std::vector<std::uint64_t> UpdateLoop::versions() const {
    std::vector<std::uint64_t> out{initial_version_};
    for (const auto& e : history_)
        if (e.accepted) out.push_back(e.to_version);
    return out;
}

}  // namespace pathrouter::evolution
