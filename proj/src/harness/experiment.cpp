#include "pathrouter/harness/experiment.hpp"

#include <cmath>

#include "pathrouter/core/error.hpp"
#include "pathrouter/core/log.hpp"
#include "pathrouter/evolution/diagnostics.hpp"
#include "pathrouter/harness/grading.hpp"
#include "pathrouter/qa/pipeline.hpp"

namespace pathrouter::harness {

namespace {

constexpr std::pair<Strategy, std::string_view> kStrategyNames[] = {
    {Strategy::Basic, "basic"},
    {Strategy::Doc, "doc"},
    {Strategy::Db, "db"},
    {Strategy::Hybrid, "hybrid"},
    {Strategy::RuleBasedStatic, "rule_based_static"},
    {Strategy::Route, "route"},
    {Strategy::RouteCached, "route_cached"},
    {Strategy::ScoreAgent, "score_agent"},
};

[[noreturn]] void config_error(const std::string& why) { throw Error(ErrorCode::ConfigError, why); }

PathOutcome answer_on(const qa::QaPipeline& pipe, const QARecord& rec, Path path) {
    PathOutcome out;
    try {
        const auto r = pipe.run(rec.query_id, rec.question, path);
        out.answer = r.record.answer_text;
        out.answered_path = r.record.path;
        out.prompt_tokens = r.prompt.token_count;
        out.completion_tokens = r.record.completion_tokens;
        out.degraded = r.degraded;
        out.generation_latency = r.record.generation_latency;
        out.correct = exact_match(out.answer, rec.gold_answers);
        out.f1 = token_f1(out.answer, rec.gold_answers);
    } catch (const std::exception& e) {
        out.error = e.what();
        log::warn("query " + rec.query_id + " on " + std::string(to_string(path)) + ": " + out.error);
    }
    return out;
}

double routed_accuracy(const rules::RuleSet& rs, const std::vector<QARecord>& eval,
                       const std::vector<PathMap<PathOutcome>>& forced, rules::Judge* judge) {
    std::size_t ok = 0;
    for (std::size_t i = 0; i < eval.size(); ++i) {
        try {
            const auto scores = rules::score_paths(eval[i].question, rs, judge);
            ok += forced[i][rules::select_path(scores.scores, rs.priority)].correct ? 1 : 0;
        } catch (const Error&) {
        }
    }
    return eval.empty() ? 0.0 : static_cast<double>(ok) / static_cast<double>(eval.size());
}

cache::CacheStats stats_delta(const cache::CacheStats& after, const cache::CacheStats& before) {
    auto d = after;
    d.hits -= before.hits;
    d.misses -= before.misses;
    d.insertions -= before.insertions;
    d.evictions -= before.evictions;
    return d;
}

}  // namespace

std::string_view to_string(Strategy s) noexcept {
    for (const auto& [k, name] : kStrategyNames)
        if (k == s) return name;
    return "route";
}

std::optional<Strategy> parse_strategy(std::string_view s) noexcept {
    for (const auto& [k, name] : kStrategyNames)
        if (name == s) return k;
    if (s == "ours") return Strategy::Route;
    if (s == "ours-c" || s == "ours_c") return Strategy::RouteCached;
    return std::nullopt;
}

std::optional<Path> forced_path(Strategy s) noexcept {
    switch (s) {
        case Strategy::Basic: return Path::LLM;
        case Strategy::Doc: return Path::Doc;
        case Strategy::Db: return Path::DB;
        case Strategy::Hybrid: return Path::Hybrid;
        default: return std::nullopt;
    }
}

void ExperimentConfig::validate() const {
    if (!(tau > 0.0 && tau <= 1.0)) config_error("tau must be in (0, 1]");
    if (update_mode != evolution::UpdateMode::Off && batch_size == 0) config_error("batch size must be at least 1");
    if (eval_n == 0) config_error("eval_n must be at least 1");
    if (cache_capacity == 0) config_error("cache capacity must be at least 1");
    if (retrieval.doc_k == 0 || retrieval.table_k == 0 || retrieval.max_rows == 0)
        config_error("retrieval k and row cap must be at least 1");
}

EvalMetrics summarize(const std::vector<QueryResult>& results) {
    EvalMetrics m;
    m.n = results.size();
    if (results.empty()) return m;
    std::size_t answered = 0;
    double f1 = 0, acc = 0, prompt = 0, completion = 0, routing = 0;
    PathMap<std::size_t> chosen{};
    for (const auto& r : results) {
        if (r.decision) routing += std::chrono::duration<double, std::milli>(r.decision->routing_latency).count();
        if (!r.error.empty() || !r.outcome.error.empty()) {
            ++m.errors;
            continue;
        }
        ++answered;
        f1 += r.outcome.f1;
        acc += r.outcome.correct ? 1.0 : 0.0;
        prompt += static_cast<double>(r.outcome.prompt_tokens);
        completion += static_cast<double>(r.outcome.completion_tokens);
        chosen[r.chosen_path] += 1;
        m.degraded += r.outcome.degraded ? 1 : 0;
    }
    const auto n = static_cast<double>(results.size());
    m.f1 = f1 / n;
    m.accuracy = acc / n;
    m.mean_routing_time_ms = routing / n;
    if (answered > 0) {
        m.mean_prompt_tokens = prompt / static_cast<double>(answered);
        m.mean_completion_tokens = completion / static_cast<double>(answered);
        for (Path p : kAllPaths) m.path_distribution[p] = static_cast<double>(chosen[p]) / static_cast<double>(answered);
    }
    return m;
}

ExperimentReport run_experiment(const ExperimentConfig& config, const ExperimentInputs& in) {
    config.validate();
    if (!in.dataset || !in.index || !in.answers) config_error("dataset, index and answer client are required");
    if (config.strategy == Strategy::ScoreAgent && !in.chooser) config_error("score_agent needs a live or scripted chooser");
    if (config.update_mode == evolution::UpdateMode::Agent && !in.expert)
        config_error("update mode agent needs an expert client");
    rules::validate(in.rules);

    ExperimentReport rep;
    rep.config = config;
    rep.answer_client = in.answers->name();

    const auto split = split_dataset(*in.dataset, config.seed, config.eval_n, config.train_n);
    if (split.eval.empty()) config_error("the evaluation set is empty");
    rep.train_n = split.train.size();
    const auto& eval = split.eval;

    const qa::QaPipeline pipe(*in.index, in.templates, *in.answers, config.retrieval, in.sql_client);

    // Every eval query on every path: oracle, forced-path rows, routed answers.
    rep.forced.resize(eval.size());
    PathAnswers per_path;
    for (std::size_t i = 0; i < eval.size(); ++i) {
        for (Path p : kAllPaths) {
            rep.forced[i][p] = answer_on(pipe, eval[i], p);
            per_path[{eval[i].query_id, p}] = rep.forced[i][p].error.empty() ? rep.forced[i][p].answer : std::string();
        }
    }
    rep.oracle = compute_oracle(per_path, eval, in.rules.priority);
    for (Path p : kAllPaths) {
        std::vector<QueryResult> rows(eval.size());
        for (std::size_t i = 0; i < eval.size(); ++i) {
            rows[i].record = eval[i];
            rows[i].chosen_path = p;
            rows[i].outcome = rep.forced[i][p];
        }
        rep.forced_metrics[p] = summarize(rows);
    }

    auto rules_ptr = std::make_shared<const rules::RuleSet>(in.rules);
    rep.results.resize(eval.size());
    for (std::size_t i = 0; i < eval.size(); ++i) rep.results[i].record = eval[i];

    if (const auto fixed = forced_path(config.strategy)) {
        for (std::size_t i = 0; i < eval.size(); ++i) {
            auto& r = rep.results[i];
            r.chosen_path = *fixed;
            r.outcome = rep.forced[i][*fixed];
            router::RoutingDecision d;
            d.query_id = router::query_id_for(eval[i].question);
            d.query_text = eval[i].question;
            d.chosen_path = *fixed;
            d.ruleset_version = in.rules.version;
            auto o = evolution::record_outcome(d, r.outcome.answer, eval[i].gold_answers,
                                               {r.outcome.prompt_tokens, r.outcome.completion_tokens});
            o.query_id = eval[i].query_id;
            rep.outcomes.push_back(std::move(o));
        }
        rep.final_rules = rules_ptr;
        rep.metrics = summarize(rep.results);
        return rep;
    }

    std::shared_ptr<router::PathScorer> scorer = config.strategy == Strategy::ScoreAgent
                                                     ? in.chooser
                                                     : std::make_shared<router::RuleScorer>(in.judge);
    std::shared_ptr<cache::EmbeddingProvider> provider;
    if (config.strategy == Strategy::RouteCached) {
        provider = in.embedder ? in.embedder : std::make_shared<cache::HashingEmbeddingProvider>();
        std::size_t dim = provider->dimension();
        if (dim == 0) {
            provider->raw_embed("dimension probe");
            dim = provider->dimension();
        }
        rep.cache = std::make_shared<cache::MetaCache>(dim, config.cache_capacity);
    }
    router::Router router(rules_ptr, router::RouterConfig{config.tau, true}, provider, rep.cache, scorer);

    const bool static_rules = config.strategy == Strategy::RuleBasedStatic || config.strategy == Strategy::ScoreAgent;
    const auto mode = static_rules ? evolution::UpdateMode::Off : config.update_mode;
    std::vector<std::shared_ptr<const rules::RuleSet>> versions{router.ruleset()};
    if (mode != evolution::UpdateMode::Off && !split.train.empty()) {
        evolution::UpdateLoop loop(router, mode, config.batch_size, config.heuristic, in.expert);
        for (const auto& rec : split.train) {
            router::RoutingDecision d;
            try {
                d = router.route(rec.question);
            } catch (const Error& e) {
                log::warn("training query " + rec.query_id + " not routed: " + e.what());
                continue;
            }
            const auto po = answer_on(pipe, rec, d.chosen_path);
            auto o = evolution::record_outcome(d, po.answer, rec.gold_answers, {po.prompt_tokens, po.completion_tokens},
                                               po.generation_latency);
            o.query_id = rec.query_id;
            if (loop.record(std::move(o)) && router.ruleset() != versions.back()) versions.push_back(router.ruleset());
        }
        rep.updates = loop.history();
    }
    if (config.strategy != Strategy::ScoreAgent) {
        for (std::size_t k = 0; k < versions.size(); ++k) {
            rep.update_curve.push_back({k, versions[k]->version, versions[k]->rules.size(),
                                        routed_accuracy(*versions[k], eval, rep.forced, in.judge)});
        }
    }

    const auto before = rep.cache ? rep.cache->stats() : cache::CacheStats{};
    for (std::size_t i = 0; i < eval.size(); ++i) {
        auto& r = rep.results[i];
        try {
            r.decision = router.route(eval[i].question);
        } catch (const Error& e) {
            r.error = e.what();
            r.chosen_path = in.rules.priority.head();
            continue;
        }
        r.chosen_path = r.decision->chosen_path;
        r.outcome = rep.forced[i][r.chosen_path];
        auto o = evolution::record_outcome(*r.decision, r.outcome.answer, eval[i].gold_answers,
                                           {r.outcome.prompt_tokens, r.outcome.completion_tokens},
                                           r.outcome.generation_latency);
        o.query_id = eval[i].query_id;
        rep.outcomes.push_back(std::move(o));
    }
    if (rep.cache) {
        rep.cache_stats_total = rep.cache->stats();
        rep.cache_stats = stats_delta(*rep.cache_stats_total, before);
    }
    rep.final_rules = router.ruleset();
    rep.metrics = summarize(rep.results);
    return rep;
}

}  // namespace pathrouter::harness
