#include "pathrouter/evolution/diagnostics.hpp"

#include <cstdio>

#include "pathrouter/core/error.hpp"
#include "pathrouter/core/jsonl.hpp"
#include "pathrouter/harness/grading.hpp"

namespace pathrouter::evolution {

using Json = nlohmann::json;

namespace {

std::string fixed4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

double ratio(std::uint64_t num, std::uint64_t den) noexcept {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

Json scores_json(const rules::PathScores& s) {
    Json scores = Json::object();
    for (Path p : kAllPaths) scores[std::string(to_string(p))] = s[p];
    Json fired = Json::array();
    for (const auto& f : s.fired_rules)
        fired.push_back({{"rule_id", f.rule_id}, {"path", std::string(to_string(f.target_path))}, {"delta", f.delta}});
    return {{"scores", scores}, {"fired_rules", fired}};
}

Path path_field(const Json& j, const char* key) {
    const auto p = parse_path(j.at(key).get<std::string>());
    if (!p) throw Error(ErrorCode::SchemaError, std::string("unknown path in field ") + key);
    return *p;
}

}  // namespace

OutcomeRecord record_outcome(const router::RoutingDecision& decision, std::string predicted,
                             std::vector<std::string> golds, TokenCounts tokens, std::chrono::nanoseconds latency) {
    OutcomeRecord r;
    r.query_id = decision.query_id;
    r.query_text = decision.query_text;
    r.decision = decision;
    r.correct = !golds.empty() && harness::exact_match(predicted, golds);
    r.predicted_answer = std::move(predicted);
    r.gold_answers = std::move(golds);
    r.prompt_tokens = tokens.prompt;
    r.completion_tokens = tokens.completion;
    r.answer_latency = latency;
    return r;
}

Json to_json(const OutcomeRecord& r) {
    const auto& d = r.decision;
    Json decision = scores_json(d.scores);
    decision["chosen_path"] = std::string(to_string(d.chosen_path));
    decision["source"] = std::string(router::to_string(d.source));
    decision["ruleset_version"] = d.ruleset_version;
    if (d.cache_similarity) decision["cache_similarity"] = *d.cache_similarity;
    return {{"query_id", r.query_id},
            {"query_text", r.query_text},
            {"decision", decision},
            {"predicted_answer", r.predicted_answer},
            {"gold_answers", r.gold_answers},
            {"correct", r.correct},
            {"prompt_tokens", r.prompt_tokens},
            {"completion_tokens", r.completion_tokens}};
}

OutcomeRecord outcome_from_json(const Json& j) {
    try {
        OutcomeRecord r;
        r.query_id = j.at("query_id").get<std::string>();
        r.query_text = j.at("query_text").get<std::string>();
        const auto& d = j.at("decision");
        r.decision.query_id = r.query_id;
        r.decision.query_text = r.query_text;
        r.decision.chosen_path = path_field(d, "chosen_path");
        r.decision.source = d.value("source", std::string("scorer")) == "cache_hit" ? router::DecisionSource::CacheHit
                                                                                    : router::DecisionSource::Scorer;
        r.decision.ruleset_version = d.value("ruleset_version", std::uint64_t{0});
        if (d.contains("cache_similarity")) r.decision.cache_similarity = d.at("cache_similarity").get<double>();
        if (d.contains("scores")) {
            for (Path p : kAllPaths) r.decision.scores.scores[p] = d.at("scores").value(std::string(to_string(p)), 0);
        }
        for (const auto& f : d.value("fired_rules", Json::array())) {
            r.decision.scores.fired_rules.push_back(
                {f.at("rule_id").get<std::string>(), path_field(f, "path"), f.at("delta").get<int>()});
        }
        r.predicted_answer = j.value("predicted_answer", std::string());
        r.gold_answers = j.at("gold_answers").get<std::vector<std::string>>();
        r.correct = j.contains("correct") ? j.at("correct").get<bool>()
                                          : harness::exact_match(r.predicted_answer, r.gold_answers);
        r.prompt_tokens = j.value("prompt_tokens", std::uint64_t{0});
        r.completion_tokens = j.value("completion_tokens", std::uint64_t{0});
        return r;
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::SchemaError, std::string("outcome record: ") + e.what());
    }
}

std::vector<OutcomeRecord> load_outcomes(const std::string& file) {
    std::vector<OutcomeRecord> out;
    jsonl::for_each(file, [&](const Json& j, std::size_t line) {
        try {
            out.push_back(outcome_from_json(j));
        } catch (const Error& e) {
            throw Error(ErrorCode::SchemaError, "line " + std::to_string(line) + ": " + e.what());
        }
    });
    return out;
}

void OutcomeLog::append(OutcomeRecord record) {
    std::lock_guard lock(mutex_);
    records_.push_back(std::move(record));
}

std::size_t OutcomeLog::size() const {
    std::lock_guard lock(mutex_);
    return records_.size();
}

std::vector<OutcomeRecord> OutcomeLog::drain() {
    std::lock_guard lock(mutex_);
    std::vector<OutcomeRecord> out;
    out.swap(records_);
    return out;
}

double DiagnosticsReport::overall_accuracy() const noexcept {
    std::uint64_t correct = 0;
    for (const auto& q : queries) correct += q.correct ? 1 : 0;
    return ratio(correct, queries.size());
}

std::uint64_t DiagnosticsReport::total_triggers() const noexcept {
    std::uint64_t n = 0;
    for (const auto& r : rule_stats) n += r.trigger_count;
    return n;
}

const RuleStat* DiagnosticsReport::rule_stat(std::string_view id) const noexcept {
    for (const auto& r : rule_stats)
        if (r.rule_id == id) return &r;
    return nullptr;
}

DiagnosticsReport build_diagnostics(const std::vector<OutcomeRecord>& batch, const rules::RuleSet& ruleset,
                                    std::uint64_t batch_index) {
    if (batch.empty()) throw Error(ErrorCode::EmptyBatch, "diagnostics need at least one outcome");
    DiagnosticsReport rep;
    rep.batch_index = batch_index;
    rep.ruleset = ruleset;
    for (Path p : kAllPaths) rep.path_stats[p].path = p;
    for (const auto& rule : ruleset.rules) rep.rule_stats.push_back(RuleStat{rule.id, 0, 0, 0.0});

    for (const auto& o : batch) {
        const Path p = o.decision.chosen_path;
        rep.queries.push_back({o.query_text, p, o.correct});
        rep.path_stats[p].selected_count += 1;
        rep.path_stats[p].correct_count += o.correct ? 1 : 0;
        // A rule listed twice in fired_rules would be a scorer bug; count once.
        std::vector<bool> counted(rep.rule_stats.size(), false);
        for (const auto& f : o.decision.scores.fired_rules) {
            for (std::size_t i = 0; i < rep.rule_stats.size(); ++i) {
                if (rep.rule_stats[i].rule_id == f.rule_id && !counted[i]) {
                    counted[i] = true;
                    rep.rule_stats[i].trigger_count += 1;
                    rep.rule_stats[i].correct_when_triggered += o.correct ? 1 : 0;
                }
            }
        }
    }
    for (Path p : kAllPaths) {
        auto& s = rep.path_stats[p];
        s.accuracy = ratio(s.correct_count, s.selected_count);
    }
    for (auto& r : rep.rule_stats) r.accuracy_when_triggered = ratio(r.correct_when_triggered, r.trigger_count);
    return rep;
}

std::string render_report(const DiagnosticsReport& rep) {
    std::string out;
    out += "DIAGNOSTICS REPORT\n";
    out += "batch: " + std::to_string(rep.batch_index) + "\n";
    out += "ruleset_version: " + std::to_string(rep.ruleset.version) + "\n";
    out += "queries: " + std::to_string(rep.queries.size()) + "\n";
    out += "overall_accuracy: " + fixed4(rep.overall_accuracy()) + "\n\n";

    out += "(i) Queries\n";
    for (std::size_t i = 0; i < rep.queries.size(); ++i) {
        const auto& q = rep.queries[i];
        out += "  " + std::to_string(i + 1) + ". [" + std::string(to_string(q.chosen_path)) + "] " +
               (q.correct ? "correct" : "incorrect") + " | " + q.query_text + "\n";
    }
    out += "\n(ii) Current rule set\n";
    out += rules::serialize_rules(rep.ruleset);
    out += "\n(iii) Path-level statistics\n";
    for (Path p : kAllPaths) {
        const auto& s = rep.path_stats[p];
        out += "  " + std::string(to_string(p)) + ": selected=" + std::to_string(s.selected_count) +
               " correct=" + std::to_string(s.correct_count) + " accuracy=" + fixed4(s.accuracy) + "\n";
    }
    out += "\n(iv) Rule-level statistics\n";
    for (const auto& r : rep.rule_stats) {
        out += "  " + r.rule_id + ": triggered=" + std::to_string(r.trigger_count) +
               " correct=" + std::to_string(r.correct_when_triggered) +
               " accuracy=" + fixed4(r.accuracy_when_triggered) + "\n";
    }
    return out;
}

std::string report_records(const DiagnosticsReport& rep) {
    std::string out;
    out += jsonl::dump_line({{"record", "summary"},
                             {"batch", rep.batch_index},
                             {"ruleset_version", rep.ruleset.version},
                             {"queries", rep.queries.size()},
                             {"overall_accuracy", rep.overall_accuracy()}}) +
           "\n";
    for (Path p : kAllPaths) {
        const auto& s = rep.path_stats[p];
        out += jsonl::dump_line({{"record", "path"},
                                 {"path", std::string(to_string(p))},
                                 {"selected", s.selected_count},
                                 {"correct", s.correct_count},
                                 {"accuracy", s.accuracy}}) +
               "\n";
    }
    for (const auto& r : rep.rule_stats) {
        out += jsonl::dump_line({{"record", "rule"},
                                 {"rule_id", r.rule_id},
                                 {"triggered", r.trigger_count},
                                 {"correct", r.correct_when_triggered},
                                 {"accuracy", r.accuracy_when_triggered}}) +
               "\n";
    }
    return out;
}

}  // namespace pathrouter::evolution
