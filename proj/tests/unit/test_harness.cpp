#include <gtest/gtest.h>

#include <filesystem>
#include <algorithm>
#include <map>
#include <set>

#include "pathrouter/core/error.hpp"
#include "pathrouter/core/jsonl.hpp"
#include "pathrouter/harness/dataset.hpp"
#include "pathrouter/harness/experiment.hpp"
#include "pathrouter/harness/grading.hpp"
#include "pathrouter/harness/oracle.hpp"
#include "pathrouter/harness/report.hpp"
#include "pathrouter/harness/synthetic.hpp"
#include "pathrouter/retrieval/evidence.hpp"

using namespace pathrouter;
using namespace pathrouter::harness;

namespace {

template <typename Fn>
ErrorCode code_of(Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorCode::IOError;
}

std::string ten_records() {
    std::string doc;
    for (int i = 0; i < 10; ++i) {
        doc += jsonl::dump_line({{"query_id", "q" + std::to_string(i)},
                                 {"question", "Question number " + std::to_string(i) + "?"},
                                 {"gold_answers", {"answer " + std::to_string(i)}}}) +
               "\n";
    }
    return doc;
}

QARecord rec(std::string id, std::string gold) {
    QARecord r;
    r.query_id = std::move(id);
    r.question = "q";
    r.gold_answers = {std::move(gold)};
    return r;
}

retrieval::RetrievalIndex index_of(const Fixture& fx) {
    retrieval::RetrievalIndex idx;
    idx.docs = retrieval::DocIndex::build(fx.corpus);
    idx.store = fx.table_store();
    idx.tables = retrieval::build_table_index(idx.store);
    return idx;
}

struct FixtureRun {
    Fixture fx;
    retrieval::RetrievalIndex idx;
    qa::ReplayClient replay;
    explicit FixtureRun(FixtureConfig cfg) : fx(generate_fixture(cfg)), idx(index_of(fx)), replay(fx.replay_client()) {}

    ExperimentReport run(ExperimentConfig cfg, rules::RuleSet rules = rules::seed_rules()) {
        ExperimentInputs in;
        in.dataset = &fx.dataset;
        in.index = &idx;
        in.answers = &replay;
        in.rules = std::move(rules);
        in.embedder = std::make_shared<cache::HashingEmbeddingProvider>();
        return run_experiment(cfg, in);
    }
};

}  // namespace

// ---- grading ----

TEST(Grading, Normalize) {
    EXPECT_EQ(normalize_answer("The 494 Million."), "494 million");
    EXPECT_EQ(normalize_answer(""), "");
    EXPECT_EQ(normalize_answer("A  net   income"), "net income");
}

TEST(Grading, TokenF1) {
    EXPECT_DOUBLE_EQ(token_f1("494 million", {"494 million"}), 1.0);
    EXPECT_DOUBLE_EQ(token_f1("2,763", {"494 million"}), 0.0);
    EXPECT_DOUBLE_EQ(token_f1("494", {"494 million"}), 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(token_f1("494", {"zero", "494"}), 1.0);
    EXPECT_DOUBLE_EQ(token_f1("", {"494"}), 0.0);
}

TEST(Grading, ExactMatch) {
    EXPECT_TRUE(exact_match("494 million", {"494 million"}));
    EXPECT_FALSE(exact_match("2,763", {"494 million"}));
    EXPECT_TRUE(exact_match("The 494 million", {"494 million"}));
    EXPECT_FALSE(exact_match("", {"494 million"}));
}

// ---- dataset ----

TEST(Dataset, ParsesTenRecords) {
    const auto recs = parse_dataset(ten_records());
    ASSERT_EQ(recs.size(), 10u);
    EXPECT_EQ(recs[3].query_id, "q3");
    EXPECT_EQ(recs[3].gold_answers, std::vector<std::string>{"answer 3"});
}

TEST(Dataset, MissingGoldIsSchemaError) {
    EXPECT_EQ(code_of([] { parse_dataset(R"({"query_id":"a","question":"x"})"); }), ErrorCode::SchemaError);
    EXPECT_EQ(code_of([] { parse_dataset(R"({"query_id":"a","question":"x","gold_answers":[]})"); }),
              ErrorCode::SchemaError);
    EXPECT_EQ(code_of([] {
                  parse_dataset("{\"query_id\":\"a\",\"question\":\"x\",\"gold_answers\":[\"1\"]}\n"
                                "{\"query_id\":\"a\",\"question\":\"y\",\"gold_answers\":[\"1\"]}\n");
              }),
              ErrorCode::SchemaError);
}

TEST(Dataset, FileLoaderAndFormats) {
    const auto file = std::filesystem::temp_directory_path() / "pathrouter_dataset_test.jsonl";
    jsonl::write_file(file, ten_records());
    EXPECT_EQ(load_dataset(file).size(), 10u);
    EXPECT_EQ(code_of([&] { load_dataset(file, "parquet"); }), ErrorCode::ConfigError);
    std::filesystem::remove(file);
}

TEST(Dataset, SeededSplitIsDeterministicAndDisjoint) {
    const auto recs = parse_dataset(ten_records());
    const auto a = split_dataset(recs, 7, 5, 3), b = split_dataset(recs, 7, 5, 3);
    ASSERT_EQ(a.eval.size(), 5u);
    ASSERT_EQ(a.train.size(), 3u);
    std::set<std::string> ids;
    for (std::size_t i = 0; i < 5; ++i) {
        EXPECT_EQ(a.eval[i].query_id, b.eval[i].query_id);
        ids.insert(a.eval[i].query_id);
    }
    for (const auto& r : a.train) EXPECT_FALSE(ids.count(r.query_id));
    // The eval split depends only on (seed, eval_n).
    const auto c = split_dataset(recs, 7, 5, 0);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(c.eval[i].query_id, a.eval[i].query_id);
    const auto perm = seeded_permutation(10, 7);
    EXPECT_EQ(std::set<std::size_t>(perm.begin(), perm.end()).size(), 10u);
}

TEST(Dataset, Categories) {
    for (auto c : {Category::Numeric, Category::HowWhy, Category::Definition, Category::FactPlusExplanation, Category::Other})
        EXPECT_EQ(parse_category(to_string(c)), c);
    EXPECT_EQ(aligned_path(Category::Numeric), Path::DB);
    EXPECT_EQ(aligned_path(Category::HowWhy), Path::Doc);
    EXPECT_EQ(aligned_path(Category::Definition), Path::LLM);
    EXPECT_EQ(aligned_path(Category::FactPlusExplanation), Path::Hybrid);
}

// ---- oracle ----

TEST(Oracle, Cases) {
    const std::vector<QARecord> recs = {rec("only_db", "x"), rec("none", "x"), rec("db_and_doc", "x")};
    PathAnswers ans;
    for (const auto& r : recs)
        for (Path p : kAllPaths) ans[{r.query_id, p}] = "wrong";
    ans[{"only_db", Path::DB}] = "x";
    ans[{"db_and_doc", Path::DB}] = "x";
    ans[{"db_and_doc", Path::Doc}] = "x";
    const auto o = compute_oracle(ans, recs);
    EXPECT_EQ(o.find("only_db")->oracle_path, Path::DB);
    EXPECT_FALSE(o.find("none")->answerable());
    EXPECT_EQ(o.find("db_and_doc")->oracle_path, Path::DB);
    EXPECT_EQ(o.find("db_and_doc")->correct_paths, (std::vector<Path>{Path::DB, Path::Doc}));
    EXPECT_DOUBLE_EQ(o.accuracy(), 2.0 / 3.0);

    const auto doc_first = PriorityOrder::from({Path::Doc, Path::DB, Path::Hybrid, Path::LLM});
    EXPECT_EQ(compute_oracle(ans, recs, *doc_first).find("db_and_doc")->oracle_path, Path::Doc);

    ans.erase({"none", Path::LLM});
    EXPECT_EQ(code_of([&] { compute_oracle(ans, recs); }), ErrorCode::MissingAnswer);
}

// ---- synthetic workload ----

TEST(Synthetic, WorkloadIsDistinctAndSeeded) {
    const auto w = generate_workload(100, 1);
    ASSERT_EQ(w.size(), 400u);
    std::set<std::string> qs;
    for (const auto& q : w) qs.insert(q.question);
    EXPECT_EQ(qs.size(), 400u);
    const auto again = generate_workload(100, 1);
    for (std::size_t i = 0; i < w.size(); ++i) EXPECT_EQ(w[i].question, again[i].question);
}

TEST(Synthetic, ComplementaryProfile) {
    const auto fx = generate_fixture({FixtureProfile::Complementary, 0, 0});
    EXPECT_EQ(fx.dataset.size(), 500u);
    EXPECT_EQ(fx.replay.size(), 2000u);
    const auto it = std::find_if(fx.dataset.begin(), fx.dataset.end(),
                                 [](const QARecord& r) { return r.question == kCaseStudyQuestion; });
    ASSERT_NE(it, fx.dataset.end());
    EXPECT_EQ(it->gold_answers, std::vector<std::string>{std::string(kCaseStudyGold)});
}

// ---- experiments ----

TEST(Experiment, BasicAccuracyIsFractionOfCorrectLlmAnswers) {
    FixtureRun r({FixtureProfile::Complementary, 0, 0});
    ExperimentConfig cfg;
    cfg.strategy = Strategy::Basic;
    cfg.train_n = 0;
    const auto rep = r.run(cfg);
    std::size_t ok = 0;
    for (const auto& q : rep.results) {
        const auto& a = r.replay.lookup(q.record.query_id, Path::LLM);
        ok += exact_match(a.answer_text, q.record.gold_answers) ? 1 : 0;
        EXPECT_EQ(q.chosen_path, Path::LLM);
    }
    EXPECT_DOUBLE_EQ(rep.metrics.accuracy, static_cast<double>(ok) / static_cast<double>(rep.results.size()));
    EXPECT_NEAR(rep.metrics.accuracy, 0.05, 1e-12);
}

TEST(Experiment, RouteOnAlignedWorkloadBeatsEverySinglePath) {
    FixtureRun r({FixtureProfile::Aligned, 25, 2});
    ExperimentConfig cfg;
    cfg.strategy = Strategy::Route;
    cfg.eval_n = 100;
    cfg.train_n = 0;
    const auto rep = r.run(cfg);
    for (Path p : kAllPaths) EXPECT_GE(rep.metrics.accuracy, rep.forced_metrics[p].accuracy);
    EXPECT_LE(rep.metrics.accuracy, rep.oracle.accuracy() + 1e-12);
    EXPECT_DOUBLE_EQ(rep.metrics.accuracy, 1.0);
}

TEST(Experiment, EmptyEvalIsConfigError) {
    FixtureRun r({FixtureProfile::Aligned, 5, 0});
    ExperimentConfig cfg;
    cfg.eval_n = 0;
    EXPECT_EQ(code_of([&] { r.run(cfg); }), ErrorCode::ConfigError);
    ExperimentReport empty;
    EXPECT_EQ(code_of([&] { emit_report(empty, std::filesystem::temp_directory_path() / "pathrouter_empty"); }),
              ErrorCode::ConfigError);
}

TEST(Experiment, CachedRunConservesLookups) {
    FixtureRun r({FixtureProfile::Aligned, 20, 3});
    ExperimentConfig cfg;
    cfg.strategy = Strategy::RouteCached;
    cfg.tau = 0.8;
    cfg.eval_n = 60;
    cfg.train_n = 0;
    const auto rep = r.run(cfg);
    ASSERT_TRUE(rep.cache_stats.has_value());
    EXPECT_EQ(rep.cache_stats->hits + rep.cache_stats->misses, 60u);
    const auto summary = summary_json(rep);
    EXPECT_EQ(summary["cache_stats"]["hits"].get<std::uint64_t>() + summary["cache_stats"]["misses"].get<std::uint64_t>(), 60u);
}

TEST(Experiment, RepeatedRunsEmitIdenticalReports) {
    const auto base = std::filesystem::temp_directory_path() / "pathrouter_det";
    std::filesystem::remove_all(base);
    std::vector<std::map<std::string, std::string>> contents(2);
    for (int i = 0; i < 2; ++i) {
        FixtureRun r({FixtureProfile::Aligned, 30, 5});
        ExperimentConfig cfg;
        cfg.strategy = Strategy::Route;
        cfg.update_mode = evolution::UpdateMode::Heuristic;
        cfg.batch_size = 10;
        cfg.eval_n = 80;
        cfg.train_n = 40;
        cfg.seed = 9;
        const auto dir = base / std::to_string(i);
        for (const auto& f : emit_report(r.run(cfg, poisoned_rules()), dir)) {
            const auto name = std::filesystem::path(f).filename().string();
            if (name.rfind(kTimingPrefix, 0) == 0) continue;
            contents[static_cast<std::size_t>(i)][name] = jsonl::read_file(dir / f);
        }
    }
    std::filesystem::remove_all(base);
    ASSERT_FALSE(contents[0].empty());
    EXPECT_EQ(contents[0], contents[1]);
}

TEST(Experiment, StrategyNames) {
    EXPECT_EQ(parse_strategy("ours"), Strategy::Route);
    EXPECT_EQ(parse_strategy("ours-c"), Strategy::RouteCached);
    EXPECT_EQ(parse_strategy("hybrid"), Strategy::Hybrid);
    EXPECT_FALSE(parse_strategy("magic").has_value());
    EXPECT_EQ(forced_path(Strategy::Db), Path::DB);
    EXPECT_FALSE(forced_path(Strategy::Route).has_value());
}
