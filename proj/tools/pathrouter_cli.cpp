// pathrouter command line: index building, experiment runs, offline rule
// evolution, cache inspection and synthetic fixture generation.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pathrouter/cache/meta_cache.hpp"
#include "pathrouter/core/error.hpp"
#include "pathrouter/core/jsonl.hpp"
#include "pathrouter/core/log.hpp"
#include "pathrouter/evolution/diagnostics.hpp"
#include "pathrouter/evolution/updater.hpp"
#include "pathrouter/harness/dataset.hpp"
#include "pathrouter/harness/experiment.hpp"
#include "pathrouter/harness/report.hpp"
#include "pathrouter/harness/synthetic.hpp"
#include "pathrouter/qa/http.hpp"
#include "pathrouter/retrieval/evidence.hpp"
#include "pathrouter/router/router.hpp"
#include "pathrouter/rules/ruleset.hpp"

namespace fs = std::filesystem;
using namespace pathrouter;

namespace {

struct IndexArgs {
    std::string docs;
    std::string tables;
    std::string out = "index.json";
    bool describe_with_llm = false;
};

struct RunArgs {
    std::string strategy = "route";
    std::string dataset;
    std::string rules;
    double tau = cache::MetaCache::kDefaultTau;
    std::size_t batch_size = 100;
    std::string update_mode = "off";
    std::uint64_t seed = 0;
    std::string out;
    std::string index;
    std::string docs;
    std::string tables;
    std::string replay;
    std::string templates;
    std::size_t eval_n = harness::kDefaultEvalN;
    std::size_t train_n = harness::kDefaultTrainN;
    std::size_t doc_k = 3;
    std::size_t table_k = 1;
    std::size_t max_rows = retrieval::kDefaultMaxRows;
    std::size_t cache_capacity = cache::MetaCache::kDefaultCapacity;
    std::string embedder = "hashing";
    bool llm_sql = false;
};

struct EvolveArgs {
    std::string outcomes;
    std::string rules;
    std::string mode = "heuristic";
    std::string out;
    std::string report;
};

struct SynthArgs {
    std::string out;
    std::string profile = "aligned";
    std::size_t per_category = 150;
    std::uint64_t seed = 0;
};

struct RouteArgs {
    std::string rules;
    std::string question;
};

std::unique_ptr<qa::HttpChatClient> live_chat() {
    const auto cfg = qa::EndpointConfig::from_env();
    if (!cfg) return nullptr;
    return std::make_unique<qa::HttpChatClient>(*cfg);
}

qa::HttpChatClient& require_live(std::unique_ptr<qa::HttpChatClient>& chat, const char* why) {
    if (!chat) chat = live_chat();
    if (!chat)
        throw Error(ErrorCode::ConfigError,
                    std::string(why) + " needs PATHROUTER_LLM_BASE_URL and PATHROUTER_LLM_MODEL to be set");
    return *chat;
}

int cmd_index(const IndexArgs& a) {
    std::unique_ptr<qa::HttpChatClient> chat;
    retrieval::DescriptionFn describe;
    if (a.describe_with_llm) {
        auto& c = require_live(chat, "--describe");
        describe = [&c](const retrieval::TableMeta& m) {
            return c.chat("Describe this table in one sentence for search.", m.metadata_text()).answer_text;
        };
    }
    const auto idx = retrieval::RetrievalIndex::build(a.docs, a.tables, describe);
    idx.save(a.out);
    std::cout << nlohmann::json{{"index", a.out},
                                {"documents", idx.docs.size()},
                                {"postings_bearing_documents", idx.docs.sparse().postings_bearing_documents()},
                                {"tables", idx.store.size()}}
                     .dump()
              << "\n";
    return 0;
}

int cmd_run(const RunArgs& a) {
    harness::ExperimentConfig cfg;
    const auto strategy = harness::parse_strategy(a.strategy);
    if (!strategy) throw Error(ErrorCode::ConfigError, "unknown strategy '" + a.strategy + "'");
    const auto mode = evolution::parse_update_mode(a.update_mode);
    if (!mode) throw Error(ErrorCode::ConfigError, "unknown update mode '" + a.update_mode + "'");
    cfg.strategy = *strategy;
    cfg.tau = a.tau;
    cfg.batch_size = a.batch_size;
    cfg.update_mode = *mode;
    cfg.seed = a.seed;
    cfg.eval_n = a.eval_n;
    cfg.train_n = a.train_n;
    cfg.cache_capacity = a.cache_capacity;
    cfg.retrieval = {a.doc_k, a.table_k, a.max_rows};

    retrieval::RetrievalIndex index;
    if (!a.index.empty()) {
        index = retrieval::RetrievalIndex::load(a.index);
    } else if (!a.docs.empty() && !a.tables.empty()) {
        index = retrieval::RetrievalIndex::build(a.docs, a.tables);
    } else {
        throw Error(ErrorCode::ConfigError, "give --index, or both --docs and --tables");
    }

    const auto dataset = harness::load_dataset(a.dataset);
    harness::validate_refs(dataset, index);

    std::unique_ptr<qa::HttpChatClient> chat;
    std::optional<qa::ReplayClient> replay;
    qa::AnswerClient* answers = nullptr;
    if (!a.replay.empty()) {
        replay = qa::ReplayClient::load(a.replay);
        answers = &*replay;
    } else {
        answers = &require_live(chat, "running without --replay");
    }

    harness::ExperimentInputs in;
    in.dataset = &dataset;
    in.index = &index;
    in.answers = answers;
    in.rules = a.rules.empty() ? rules::seed_rules() : rules::load_rules(a.rules);
    if (!a.templates.empty()) in.templates = qa::PromptTemplates::load(a.templates);

    std::unique_ptr<qa::ChatExpertClient> expert;
    std::unique_ptr<qa::ChatJudge> judge;
    if (cfg.update_mode == evolution::UpdateMode::Agent) {
        expert = std::make_unique<qa::ChatExpertClient>(require_live(chat, "--update-mode agent"));
        in.expert = expert.get();
    }
    const bool needs_judge = std::any_of(in.rules.rules.begin(), in.rules.rules.end(),
                                         [](const rules::Rule& r) { return r.condition.has_semantic(); });
    if (needs_judge) {
        judge = std::make_unique<qa::ChatJudge>(require_live(chat, "semantic rule conditions"));
        in.judge = judge.get();
    }
    if (cfg.strategy == harness::Strategy::ScoreAgent)
        in.chooser = std::make_shared<qa::ChatChooserScorer>(require_live(chat, "strategy score_agent"));
    if (a.embedder == "live") {
        const auto ecfg = qa::EndpointConfig::from_env(true);
        if (!ecfg) throw Error(ErrorCode::ConfigError, "--embedder live needs PATHROUTER_EMBED_MODEL and a base URL");
        in.embedder = std::make_shared<qa::HttpEmbeddingProvider>(*ecfg);
    } else if (a.embedder != "hashing") {
        throw Error(ErrorCode::ConfigError, "unknown embedder '" + a.embedder + "'");
    }
    if (a.llm_sql) in.sql_client = &require_live(chat, "--llm-sql");

    const auto report = harness::run_experiment(cfg, in);
    const auto files = harness::emit_report(report, a.out);
    auto summary = harness::summary_json(report);
    summary["files"] = files;
    std::cout << summary.dump(2) << "\n";
    return 0;
}

int cmd_evolve(const EvolveArgs& a) {
    const auto ruleset = rules::load_rules(a.rules);
    const auto outcomes = evolution::load_outcomes(a.outcomes);
    const auto report = evolution::build_diagnostics(outcomes, ruleset);
    if (!a.report.empty()) jsonl::write_file(a.report, evolution::render_report(report));

    const auto mode = evolution::parse_update_mode(a.mode);
    if (!mode || *mode == evolution::UpdateMode::Off)
        throw Error(ErrorCode::ConfigError, "evolve needs --mode heuristic or agent");
    rules::RuleSet next;
    std::unique_ptr<qa::HttpChatClient> chat;
    if (*mode == evolution::UpdateMode::Heuristic) {
        next = evolution::update_rules_heuristic(ruleset, report);
    } else {
        qa::ChatExpertClient expert(require_live(chat, "--mode agent"));
        next = evolution::update_rules_agent(ruleset, report, expert);
    }
    const auto doc = rules::serialize_rules(next);
    if (a.out.empty()) {
        std::cout << doc;
    } else {
        jsonl::write_file(a.out, doc);
    }
    std::cerr << "version " << ruleset.version << " -> " << next.version << ", " << ruleset.rules.size() << " -> "
              << next.rules.size() << " rules, batch accuracy " << report.overall_accuracy() << "\n";
    return 0;
}

int cmd_cache_stats(const std::string& snapshot) {
    const auto cache = cache::MetaCache::open(snapshot);
    std::cout << harness::to_json(cache->stats()).dump(2) << "\n";
    return 0;
}

int cmd_synth(const SynthArgs& a) {
    harness::FixtureConfig cfg;
    if (a.profile == "aligned") cfg.profile = harness::FixtureProfile::Aligned;
    else if (a.profile == "complementary") cfg.profile = harness::FixtureProfile::Complementary;
    else throw Error(ErrorCode::ConfigError, "unknown profile '" + a.profile + "'");
    cfg.per_category = a.per_category;
    cfg.seed = a.seed;
    const auto fx = harness::generate_fixture(cfg);
    harness::write_fixture(fx, a.out);
    std::cout << nlohmann::json{{"out", a.out},
                                {"queries", fx.dataset.size()},
                                {"documents", fx.corpus.size()},
                                {"tables", fx.tables.size()}}
                     .dump()
              << "\n";
    return 0;
}

int cmd_route(const RouteArgs& a) {
    auto rs = std::make_shared<const rules::RuleSet>(a.rules.empty() ? rules::seed_rules() : rules::load_rules(a.rules));
    router::Router r(rs, {});
    const auto d = r.route(a.question);
    nlohmann::json scores = nlohmann::json::object();
    for (Path p : kAllPaths) scores[std::string(to_string(p))] = d.scores[p];
    nlohmann::json fired = nlohmann::json::array();
    for (const auto& f : d.scores.fired_rules) fired.push_back(f.rule_id);
    std::cout << nlohmann::json{{"query_id", d.query_id},
                                {"chosen_path", std::string(to_string(d.chosen_path))},
                                {"scores", scores},
                                {"fired_rules", fired},
                                {"ruleset_version", d.ruleset_version}}
                     .dump()
              << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Rule-based path routing for retrieval-augmented question answering"};
    app.require_subcommand(1);

    IndexArgs ia;
    auto* index = app.add_subcommand("index", "Retrieval index commands");
    index->require_subcommand(1);
    auto* index_build = index->add_subcommand("build", "Build the passage and table index");
    index_build->add_option("--docs", ia.docs, "Line-delimited passages {doc_id, text}")->required()->check(CLI::ExistingFile);
    index_build->add_option("--tables", ia.tables, "Table manifest {table_id, path, description}")
        ->required()
        ->check(CLI::ExistingFile);
    index_build->add_option("--out", ia.out, "Index file to write")->capture_default_str();
    index_build->add_flag("--describe", ia.describe_with_llm, "Generate missing table descriptions with the live model");

    RunArgs ra;
    auto* run = app.add_subcommand("run", "Run one strategy over a dataset and write a report");
    run->add_option("--strategy", ra.strategy,
                    "basic | doc | db | hybrid | rule_based_static | route | route_cached | score_agent")
        ->capture_default_str();
    run->add_option("--dataset", ra.dataset, "Line-delimited QA records")->required()->check(CLI::ExistingFile);
    run->add_option("--rules", ra.rules, "Rule file (seed rules when omitted)")->check(CLI::ExistingFile);
    run->add_option("--tau", ra.tau, "Cache similarity threshold")->capture_default_str();
    run->add_option("--batch-size", ra.batch_size, "Outcomes per rule update")->capture_default_str();
    run->add_option("--update-mode", ra.update_mode, "agent | heuristic | off")->capture_default_str();
    run->add_option("--seed", ra.seed, "Split seed")->capture_default_str();
    run->add_option("--out", ra.out, "Report directory")->required();
    run->add_option("--index", ra.index, "Index file from `index build`")->check(CLI::ExistingFile);
    run->add_option("--docs", ra.docs, "Passages, when no --index is given")->check(CLI::ExistingFile);
    run->add_option("--tables", ra.tables, "Table manifest, when no --index is given")->check(CLI::ExistingFile);
    run->add_option("--replay", ra.replay, "Pre-computed answers; live client from the environment when omitted")
        ->check(CLI::ExistingFile);
    run->add_option("--templates", ra.templates, "Prompt templates (JSON)")->check(CLI::ExistingFile);
    run->add_option("--eval-n", ra.eval_n, "Evaluation queries")->capture_default_str();
    run->add_option("--train-n", ra.train_n, "Training queries")->capture_default_str();
    run->add_option("--doc-k", ra.doc_k, "Passages per query")->capture_default_str();
    run->add_option("--table-k", ra.table_k, "Tables per query")->capture_default_str();
    run->add_option("--max-rows", ra.max_rows, "Row cap per structured query")->capture_default_str();
    run->add_option("--cache-capacity", ra.cache_capacity, "Meta-cache entries")->capture_default_str();
    run->add_option("--embedder", ra.embedder, "hashing | live")->capture_default_str();
    run->add_flag("--llm-sql", ra.llm_sql, "Generate structured queries with the live model");

    EvolveArgs ea;
    auto* evolve = app.add_subcommand("evolve", "Update a rule file from graded outcomes");
    evolve->add_option("--outcomes", ea.outcomes, "outcomes.jsonl from a run")->required()->check(CLI::ExistingFile);
    evolve->add_option("--rules", ea.rules, "Current rule file")->required()->check(CLI::ExistingFile);
    evolve->add_option("--mode", ea.mode, "heuristic | agent")->capture_default_str();
    evolve->add_option("--out", ea.out, "New rule file (stdout when omitted)");
    evolve->add_option("--report", ea.report, "Write the diagnostics report text here");

    std::string snapshot;
    auto* cache_cmd = app.add_subcommand("cache", "Meta-cache commands");
    cache_cmd->require_subcommand(1);
    auto* cache_stats = cache_cmd->add_subcommand("stats", "Print counters of a cache snapshot");
    cache_stats->add_option("--snapshot", snapshot, "Snapshot file")->required()->check(CLI::ExistingFile);

    SynthArgs sa;
    auto* synth = app.add_subcommand("synth", "Write a synthetic dataset, corpus, tables and replay answers");
    synth->add_option("--out", sa.out, "Output directory")->required();
    synth->add_option("--profile", sa.profile, "aligned | complementary")->capture_default_str();
    synth->add_option("--per-category", sa.per_category, "Queries per category (aligned)")->capture_default_str();
    synth->add_option("--seed", sa.seed, "Generator seed")->capture_default_str();

    RouteArgs rta;
    auto* route = app.add_subcommand("route", "Route one question and print the decision");
    route->add_option("--rules", rta.rules, "Rule file (seed rules when omitted)")->check(CLI::ExistingFile);
    route->add_option("question", rta.question, "Question text")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (index_build->parsed()) return cmd_index(ia);
        if (run->parsed()) return cmd_run(ra);
        if (evolve->parsed()) return cmd_evolve(ea);
        if (cache_stats->parsed()) return cmd_cache_stats(snapshot);
        if (synth->parsed()) return cmd_synth(sa);
        if (route->parsed()) return cmd_route(rta);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
