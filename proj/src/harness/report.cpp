#include "pathrouter/harness/report.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

#include "pathrouter/core/error.hpp"
#include "pathrouter/core/jsonl.hpp"
#include "pathrouter/evolution/diagnostics.hpp"

namespace pathrouter::harness {

namespace {

using Json = nlohmann::json;

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string tsv(std::initializer_list<std::string> cells) {
    std::string out;
    for (const auto& c : cells) {
        if (!out.empty()) out += '\t';
        out += c;
    }
    return out + "\n";
}

Json metrics_json(const EvalMetrics& m) {
    Json dist = Json::object();
    for (Path p : kAllPaths) dist[std::string(to_string(p))] = m.path_distribution[p];
    return {{"n", m.n},
            {"f1", m.f1},
            {"accuracy", m.accuracy},
            {"mean_prompt_tokens", m.mean_prompt_tokens},
            {"mean_completion_tokens", m.mean_completion_tokens},
            {"path_distribution", dist},
            {"degraded", m.degraded},
            {"errors", m.errors}};
}

Json paths_json(const std::vector<Path>& paths) {
    Json out = Json::array();
    for (Path p : paths) out.push_back(std::string(to_string(p)));
    return out;
}

}  // namespace

Json to_json(const cache::CacheStats& s) {
    return {{"hits", s.hits},           {"misses", s.misses},     {"lookups", s.lookups()},
            {"insertions", s.insertions}, {"evictions", s.evictions}, {"size", s.size},
            {"capacity", s.capacity},   {"dimension", s.dimension}};
}

Json summary_json(const ExperimentReport& rep) {
    const auto& c = rep.config;
    Json forced = Json::object();
    for (Path p : kAllPaths) forced[std::string(to_string(p))] = metrics_json(rep.forced_metrics[p]);
    Json j{{"strategy", std::string(to_string(c.strategy))},
           {"config",
            {{"tau", c.tau},
             {"batch_size", c.batch_size},
             {"update_mode", std::string(evolution::to_string(c.update_mode))},
             {"seed", c.seed},
             {"eval_n", c.eval_n},
             {"train_n", c.train_n},
             {"cache_capacity", c.cache_capacity},
             {"doc_k", c.retrieval.doc_k},
             {"table_k", c.retrieval.table_k},
             {"max_rows", c.retrieval.max_rows}}},
           {"answer_client", rep.answer_client},
           {"token_counter", rep.token_counter},
           {"accuracy_definition", "normalized exact match, max over gold answers"},
           {"eval_queries", rep.results.size()},
           {"train_queries", rep.train_n},
           {"metrics", metrics_json(rep.metrics)},
           {"forced_paths", forced},
           {"oracle_accuracy", rep.oracle.accuracy()},
           {"updates_attempted", rep.updates.size()},
           {"updates_applied", std::count_if(rep.updates.begin(), rep.updates.end(),
                                             [](const auto& u) { return u.accepted; })},
           {"final_rules_version", rep.final_rules ? rep.final_rules->version : 0}};
    if (rep.cache_stats) j["cache_stats"] = to_json(*rep.cache_stats);
    if (rep.cache_stats_total) j["cache_stats_total"] = to_json(*rep.cache_stats_total);
    return j;
}

std::vector<std::string> emit_report(const ExperimentReport& rep, const std::filesystem::path& dir) {
    if (rep.results.empty()) throw Error(ErrorCode::ConfigError, "nothing to report: the evaluation set is empty");
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::IOError, "cannot create " + dir.string() + ": " + ec.message());

    std::vector<std::string> written;
    auto put = [&](const std::string& name, const std::string& body) {
        jsonl::write_file(dir / name, body);
        written.push_back(name);
    };

    put("summary.json", summary_json(rep).dump(2) + "\n");

    std::string decisions;
    std::string timing_rows = tsv({"query_id", "chosen_path", "routing_ns", "generation_ns"});
    for (std::size_t i = 0; i < rep.results.size(); ++i) {
        const auto& r = rep.results[i];
        const auto* oracle = rep.oracle.find(r.record.query_id);
        Json row{{"query_id", r.record.query_id},
                 {"question", r.record.question},
                 {"category", r.record.category ? std::string(to_string(*r.record.category)) : std::string()},
                 {"chosen_path", std::string(to_string(r.chosen_path))},
                 {"answered_path", std::string(to_string(r.outcome.answered_path))},
                 {"answer", r.outcome.answer},
                 {"correct", r.outcome.correct},
                 {"f1", r.outcome.f1},
                 {"prompt_tokens", r.outcome.prompt_tokens},
                 {"completion_tokens", r.outcome.completion_tokens},
                 {"degraded", r.outcome.degraded}};
        if (r.decision) {
            Json scores = Json::object();
            for (Path p : kAllPaths) scores[std::string(to_string(p))] = r.decision->scores[p];
            Json fired = Json::array();
            for (const auto& f : r.decision->scores.fired_rules) fired.push_back(f.rule_id);
            row["source"] = std::string(router::to_string(r.decision->source));
            row["scores"] = scores;
            row["fired_rules"] = fired;
            row["ruleset_version"] = r.decision->ruleset_version;
            if (r.decision->cache_similarity) row["cache_similarity"] = *r.decision->cache_similarity;
            if (r.decision->degraded_cache) row["degraded_cache"] = true;
        } else {
            row["source"] = "fixed";
        }
        if (oracle) {
            row["oracle_path"] = std::string(to_string(oracle->oracle_path));
            row["oracle_correct_paths"] = paths_json(oracle->correct_paths);
        }
        const auto error = !r.error.empty() ? r.error : r.outcome.error;
        if (!error.empty()) row["error"] = error;
        decisions += jsonl::dump_line(row) + "\n";
        timing_rows += tsv({r.record.query_id, std::string(to_string(r.chosen_path)),
                            std::to_string(r.decision ? r.decision->routing_latency.count() : 0),
                            std::to_string(r.outcome.generation_latency.count())});
    }
    put("decisions.jsonl", decisions);

    std::string outcomes;
    for (const auto& o : rep.outcomes) outcomes += jsonl::dump_line(evolution::to_json(o)) + "\n";
    put("outcomes.jsonl", outcomes);

    std::string acc_tokens = tsv({"strategy", "accuracy", "f1", "mean_prompt_tokens"});
    constexpr std::pair<Strategy, Path> fixed[] = {
        {Strategy::Basic, Path::LLM}, {Strategy::Doc, Path::Doc}, {Strategy::Db, Path::DB}, {Strategy::Hybrid, Path::Hybrid}};
    for (const auto& [s, p] : fixed) {
        const auto& m = rep.forced_metrics[p];
        acc_tokens += tsv({std::string(to_string(s)), fmt(m.accuracy), fmt(m.f1), fmt(m.mean_prompt_tokens)});
    }
    if (!forced_path(rep.config.strategy)) {
        acc_tokens += tsv({std::string(to_string(rep.config.strategy)), fmt(rep.metrics.accuracy), fmt(rep.metrics.f1),
                           fmt(rep.metrics.mean_prompt_tokens)});
    }
    put("accuracy_vs_tokens.tsv", acc_tokens);

    PathMap<std::size_t> routed_n{}, routed_ok{}, oracle_n{};
    for (const auto& r : rep.results) {
        routed_n[r.chosen_path] += 1;
        routed_ok[r.chosen_path] += r.outcome.correct ? 1 : 0;
    }
    for (const auto& e : rep.oracle.entries) oracle_n[e.oracle_path] += 1;
    const auto n = static_cast<double>(rep.results.size());

    std::string util = tsv({"path", "forced_n", "forced_accuracy", "routed_n", "routed_accuracy"});
    std::string dist = tsv({"path", "routed_count", "routed_fraction", "oracle_count", "oracle_fraction"});
    for (Path p : kAllPaths) {
        const double routed_acc =
            routed_n[p] ? static_cast<double>(routed_ok[p]) / static_cast<double>(routed_n[p]) : 0.0;
        util += tsv({std::string(to_string(p)), std::to_string(rep.forced_metrics[p].n),
                     fmt(rep.forced_metrics[p].accuracy), std::to_string(routed_n[p]), fmt(routed_acc)});
        dist += tsv({std::string(to_string(p)), std::to_string(routed_n[p]), fmt(static_cast<double>(routed_n[p]) / n),
                     std::to_string(oracle_n[p]), fmt(static_cast<double>(oracle_n[p]) / n)});
    }
    put("path_utilization.tsv", util);
    put("path_distribution.tsv", dist);

    std::map<std::string, PathMap<std::size_t>> by_category;
    for (const auto& r : rep.results) {
        const auto cat = r.record.category ? std::string(to_string(*r.record.category)) : std::string("unlabeled");
        by_category[cat][r.chosen_path] += 1;
    }
    std::string cats = tsv({"category", "DB", "Doc", "Hybrid", "LLM"});
    for (const auto& [cat, counts] : by_category) {
        cats += tsv({cat, std::to_string(counts[Path::DB]), std::to_string(counts[Path::Doc]),
                     std::to_string(counts[Path::Hybrid]), std::to_string(counts[Path::LLM])});
    }
    put("category_paths.tsv", cats);

    std::string curve = tsv({"updates_applied", "ruleset_version", "rule_count", "eval_accuracy"});
    for (const auto& pt : rep.update_curve) {
        curve += tsv({std::to_string(pt.updates_applied), std::to_string(pt.version), std::to_string(pt.rule_count),
                      fmt(pt.eval_accuracy)});
    }
    put("rule_update_curve.tsv", curve);

    std::string updates;
    for (const auto& u : rep.updates) {
        updates += jsonl::dump_line({{"batch_index", u.batch_index},
                                     {"from_version", u.from_version},
                                     {"to_version", u.to_version},
                                     {"accepted", u.accepted},
                                     {"message", u.message},
                                     {"batch_accuracy", u.batch_accuracy},
                                     {"rule_count", u.rule_count}}) + "\n";
    }
    put("updates.jsonl", updates);

    if (rep.final_rules) put("final_rules.jsonl", rules::serialize_rules(*rep.final_rules));
    if (rep.cache) put("cache_snapshot.bin", rep.cache->snapshot());

    Json timing{{"mean_routing_time_ms", rep.metrics.mean_routing_time_ms}};
    put(std::string(kTimingPrefix) + "summary.json", timing.dump(2) + "\n");
    put(std::string(kTimingPrefix) + "accuracy_vs_routing_time.tsv",
        tsv({"strategy", "accuracy", "mean_routing_time_ms"}) +
            tsv({std::string(to_string(rep.config.strategy)), fmt(rep.metrics.accuracy),
                 fmt(rep.metrics.mean_routing_time_ms)}));
    put(std::string(kTimingPrefix) + "queries.tsv", timing_rows);

    std::sort(written.begin(), written.end());
    return written;
}

}  // namespace pathrouter::harness
