// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "pathrouter/cache/embedding.hpp"
#include "pathrouter/cache/meta_cache.hpp"
#include "pathrouter/core/error.hpp"
#include "pathrouter/core/jsonl.hpp"
#include "pathrouter/core/text.hpp"
#include "pathrouter/harness/experiment.hpp"
#include "pathrouter/harness/grading.hpp"
#include "pathrouter/harness/report.hpp"
#include "pathrouter/harness/synthetic.hpp"
#include "pathrouter/qa/client.hpp"
#include "pathrouter/retrieval/bm25.hpp"
#include "pathrouter/retrieval/evidence.hpp"
#include "pathrouter/retrieval/structured_query.hpp"
#include "pathrouter/router/router.hpp"

namespace fs = std::filesystem;
using namespace pathrouter;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v, int digits = 4) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(digits);
    os << v;
    return os.str();
}

retrieval::RetrievalIndex index_of(const harness::Fixture& fx) {
    retrieval::RetrievalIndex idx;
    idx.docs = retrieval::DocIndex::build(fx.corpus);
    idx.store = fx.table_store();
    idx.tables = retrieval::build_table_index(idx.store);
    return idx;
}

harness::ExperimentReport run_fixture(const harness::Fixture& fx, const retrieval::RetrievalIndex& idx,
                                      const harness::ExperimentConfig& cfg, rules::RuleSet rules) {
    auto replay = fx.replay_client();
    harness::ExperimentInputs in;
    in.dataset = &fx.dataset;
    in.index = &idx;
    in.answers = &replay;
    in.rules = std::move(rules);
    in.embedder = std::make_shared<cache::HashingEmbeddingProvider>();
    return run_experiment(cfg, in);
}

// 1. Routing correctness on the 400-query synthetic workload.
Outcome routing_correctness() {
    const auto start = Clock::now();
    const auto workload = harness::generate_workload(100, 1);
    router::Router r(std::make_shared<const rules::RuleSet>(rules::seed_rules()), router::RouterConfig{});
    std::size_t ok = 0;
    for (const auto& q : workload) ok += r.route(q.question).chosen_path == harness::aligned_path(q.category) ? 1 : 0;
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    return {workload.size() == 400 && ok == workload.size() && secs < 5.0,
            std::to_string(ok) + "/" + std::to_string(workload.size()) + " aligned, " + fmt(secs, 3) + " s"};
}

// 2. Complementarity on the replay fixture.
Outcome complementarity() {
    const auto fx = harness::generate_fixture({harness::FixtureProfile::Complementary, 0, 0});
    const auto idx = index_of(fx);
    harness::ExperimentConfig cfg;
    cfg.strategy = harness::Strategy::Route;
    cfg.train_n = 0;
    const auto rep = run_fixture(fx, idx, cfg, rules::seed_rules());
    double best = 0;
    std::string singles;
    for (Path p : kAllPaths) {
        best = std::max(best, rep.forced_metrics[p].accuracy);
        singles += std::string(to_string(p)) + "=" + fmt(rep.forced_metrics[p].accuracy, 3) + " ";
    }
    const double routed = rep.metrics.accuracy, oracle = rep.oracle.accuracy();
    return {routed > best && routed <= oracle,
            singles + "routed=" + fmt(routed, 3) + " oracle=" + fmt(oracle, 3)};
}

class CountingScorer final : public router::PathScorer {
public:
    explicit CountingScorer(std::chrono::milliseconds delay) : delay_(delay) {}
    rules::PathScores score(std::string_view q, const rules::RuleSet& rs) override {
        if (delay_.count() > 0) std::this_thread::sleep_for(delay_);
        return rules::score_paths(q, rs);
    }

private:
    std::chrono::milliseconds delay_;
};

// 3. Cache replay at tau = 1.
Outcome cache_replay() {
    const auto workload = harness::generate_workload(125, 2);
    std::vector<std::string> qs;
    for (const auto& w : workload) qs.push_back(w.question);

    auto provider = std::make_shared<cache::HashingEmbeddingProvider>();
    auto make = [&](std::chrono::milliseconds delay) {
        auto c = std::make_shared<cache::MetaCache>(provider->dimension(), 10'000);
        return router::Router(std::make_shared<const rules::RuleSet>(rules::seed_rules()), router::RouterConfig{1.0, true},
                              provider, c, std::make_shared<CountingScorer>(delay));
    };

    router::Router plain = make(std::chrono::milliseconds(0));
    std::vector<router::RoutingDecision> first, second;
    for (const auto& q : qs) first.push_back(plain.route(q));
    const auto calls_after_first = plain.scorer_invocations();
    for (const auto& q : qs) second.push_back(plain.route(q));
    bool identical = true, all_hits = true;
    for (std::size_t i = 0; i < qs.size(); ++i) {
        identical = identical && first[i].chosen_path == second[i].chosen_path && first[i].scores == second[i].scores;
        all_hits = all_hits && second[i].source == router::DecisionSource::CacheHit;
    }
    const auto total_calls = plain.scorer_invocations();

    router::Router slow = make(std::chrono::milliseconds(10));
    double t1 = 0, t2 = 0;
    for (const auto& q : qs) t1 += std::chrono::duration<double>(slow.route(q).routing_latency).count();
    for (const auto& q : qs) t2 += std::chrono::duration<double>(slow.route(q).routing_latency).count();
    const double m1 = t1 / static_cast<double>(qs.size()) * 1e3, m2 = t2 / static_cast<double>(qs.size()) * 1e3;

    const bool pass = qs.size() == 500 && total_calls == 500 && calls_after_first == 500 && identical && all_hits &&
                      m2 <= 0.10 * m1;
    return {pass, "scorer calls " + std::to_string(total_calls) + " (second pass " +
                      std::to_string(total_calls - calls_after_first) + "), identical=" + (identical ? "yes" : "no") +
                      ", mean ms " + fmt(m1, 3) + " -> " + fmt(m2, 4)};
}

// 4. Cache maximality against a brute-force scan.
Outcome cache_maximality() {
    std::mt19937_64 rng(2024);
    std::normal_distribution<float> gauss(0.f, 1.f);
    std::uniform_real_distribution<double> taud(0.3, 1.0);
    const std::size_t dim = 32;
    auto random_vec = [&] {
        std::vector<float> v(dim);
        for (auto& x : v) x = gauss(rng);
        return v;
    };
    std::size_t probes = 0, agree = 0, hits = 0, bad_hits = 0;
    for (int round = 0; round < 10; ++round) {
        const std::size_t n = 100 * static_cast<std::size_t>(round + 1);
        cache::MetaCache c(dim, 1000);
        std::vector<cache::Embedding> stored;
        for (std::size_t i = 0; i < n; ++i) {
            stored.push_back(cache::Embedding::normalize(random_vec()));
            rules::PathScores s;
            s.scores[kAllPaths[i % 4]] = 1;
            c.insert(stored.back(), s, kAllPaths[i % 4]);
        }
        for (int p = 0; p < 100; ++p, ++probes) {
            // Half the probes are perturbed copies of stored entries so hits occur.
            std::vector<float> v = random_vec();
            if (p % 2 == 0) {
                const auto base = stored[static_cast<std::size_t>(p) % stored.size()].values();
                for (std::size_t k = 0; k < dim; ++k) v[k] = base[k] + 0.05f * v[k];
            }
            const auto z = cache::Embedding::normalize(std::move(v));
            const double tau = taud(rng);
            double best = -2;
            std::size_t best_i = 0;
            for (std::size_t i = 0; i < stored.size(); ++i) {
                const double s = cache::cosine(z, stored[i]);
                if (s > best) {
                    best = s;
                    best_i = i;
                }
            }
            const auto hit = c.lookup(z, tau);
            bool ok;
            if (hit) {
                ++hits;
                if (hit->similarity < tau) ++bad_hits;
                ok = hit->similarity >= tau && hit->entry.embedding == stored[best_i] &&
                     std::abs(hit->similarity - best) <= 1e-12;
            } else {
                ok = best < tau;
            }
            agree += ok ? 1 : 0;
        }
    }
    return {probes == 1000 && agree == probes && bad_hits == 0 && hits > 0,
            std::to_string(agree) + "/" + std::to_string(probes) + " agree with brute force, " + std::to_string(hits) +
                " hits, " + std::to_string(bad_hits) + " below tau"};
}

// 5. Rule-update improvement from a poisoned seed rule.
Outcome rule_update() {
    const auto fx = harness::generate_fixture({harness::FixtureProfile::Aligned, 150, 5});
    const auto idx = index_of(fx);
    auto run = [&](evolution::UpdateMode mode, std::size_t batch) {
        harness::ExperimentConfig cfg;
        cfg.strategy = harness::Strategy::Route;
        cfg.update_mode = mode;
        cfg.batch_size = batch;
        cfg.seed = 11;
        return run_fixture(fx, idx, cfg, harness::poisoned_rules());
    };
    const auto off = run(evolution::UpdateMode::Off, 100);
    const auto one = run(evolution::UpdateMode::Heuristic, 100);
    const double base = off.metrics.accuracy;

    // Accuracy after exactly one update, from the update curve.
    double after_first = -1;
    for (const auto& pt : one.update_curve)
        if (pt.updates_applied == 1) after_first = pt.eval_accuracy;
    const auto* poisoned_before = harness::poisoned_rules().find("numeric_to_doc");
    const auto* poisoned_after = one.final_rules->find("numeric_to_doc");
    const bool weakened = poisoned_after == nullptr || poisoned_after->delta < poisoned_before->delta;

    bool sweep_ok = true;
    std::string sweep = "off=" + fmt(base, 3);
    for (std::size_t b : {25u, 50u, 100u}) {
        const double acc = b == 100 ? one.metrics.accuracy : run(evolution::UpdateMode::Heuristic, b).metrics.accuracy;
        sweep += " b" + std::to_string(b) + "=" + fmt(acc, 3);
        sweep_ok = sweep_ok && acc >= base;
    }
    const bool pass = weakened && after_first >= base + 0.20 && sweep_ok;
    return {pass, "poisoned rule " + std::string(poisoned_after ? "down-weighted" : "removed") +
                      ", one update " + fmt(base, 3) + " -> " + fmt(after_first, 3) + "; " + sweep};
}

// 6. BM25 against an independent implementation.
Outcome bm25_oracle() {
    std::vector<std::pair<std::string, std::string>> docs = {
        {"d01", "net income rose in 2019"},
        {"d02", "net income fell in 2018"},
        {"d03", "interest rate swaps hedge floating rate debt"},
        {"d04", "cross currency swaps hedge foreign exchange risk"},
        {"d05", "goodwill is tested for impairment annually"},
        {"d06", "revenue growth was driven by new customers"},
        {"d07", "operating margin improved on lower costs"},
        {"d08", "net income rose in 2019"},  // duplicate text: exact tie with d01
        {"d09", "the board approved a dividend"},
        {"d10", "cash flow from operations increased"},
        {"d11", "debt covenants were met during the year"},
        {"d12", "swaps"},
        {"d13", "swaps swaps"},
        {"d14", "lease liabilities are measured at present value"},
        {"d15", "tax expense reflects a lower effective rate"},
        {"d16", "net debt decreased"},
        {"d17", "revenue revenue revenue income"},
        {"d18", "segment results by geography"},
        {"d19", "hedge accounting documentation requirements"},
        {"d20", "income taxes and deferred tax assets"},
    };
    // Reverse insertion order so tie-breaking cannot rely on position.
    std::reverse(docs.begin(), docs.end());
    const auto idx = retrieval::SparseIndex::build(docs);

    auto tokens = [](const std::string& s) {
        std::vector<std::string> out;
        std::string cur;
        for (char c : s + " ") {
            if (std::isalnum(static_cast<unsigned char>(c))) {
                cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
            } else if (!cur.empty()) {
                out.push_back(cur);
                cur.clear();
            }
        }
        return out;
    };
    std::vector<std::vector<std::string>> dt;
    double total = 0;
    for (const auto& d : docs) {
        dt.push_back(tokens(d.second));
        total += static_cast<double>(dt.back().size());
    }
    const double n = static_cast<double>(docs.size()), avg = total / n, k1 = 1.2, b = 0.75;

    const std::vector<std::string> queries = {"net income rose",   "swaps hedge",  "revenue income", "tax",
                                              "interest rate swaps", "zebra",      "net debt",       "income"};
    std::size_t checked = 0, mismatches = 0, ties = 0;
    for (const auto& q : queries) {
        const auto qt = tokens(q);
        const std::set<std::string> terms(qt.begin(), qt.end());
        std::vector<std::pair<std::string, double>> want;
        for (std::size_t i = 0; i < docs.size(); ++i) {
            double s = 0;
            bool any = false;
            for (const auto& t : terms) {
                const double tf = static_cast<double>(std::count(dt[i].begin(), dt[i].end(), t));
                if (tf == 0) continue;
                any = true;
                double df = 0;
                for (const auto& d : dt) df += std::find(d.begin(), d.end(), t) != d.end() ? 1 : 0;
                const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
                s += idf * tf * (k1 + 1) / (tf + k1 * (1 - b + b * static_cast<double>(dt[i].size()) / avg));
            }
            if (any) want.push_back({docs[i].first, s});
        }
        std::sort(want.begin(), want.end(), [](const auto& x, const auto& y) {
            return x.second != y.second ? x.second > y.second : x.first < y.first;
        });
        for (std::size_t i = 1; i < want.size(); ++i) ties += want[i].second == want[i - 1].second ? 1 : 0;
        const auto got = idx.search(q, docs.size());
        if (got.size() != want.size()) {
            ++mismatches;
            continue;
        }
        for (std::size_t i = 0; i < got.size(); ++i, ++checked) {
            if (idx.id(got[i].doc) != want[i].first || std::abs(got[i].score - want[i].second) > 1e-9) ++mismatches;
        }
    }
    return {mismatches == 0 && ties > 0 && checked > 0,
            std::to_string(checked) + " ranked scores checked over " + std::to_string(queries.size()) + " queries, " +
                std::to_string(ties) + " ties, " + std::to_string(mismatches) + " mismatches"};
}

// 7. Metric oracles (hand-computed).
Outcome metric_oracles() {
    struct Case {
        std::string pred;
        std::vector<std::string> golds;
        double f1;
        bool em;
    };
    const std::vector<Case> cases = {
        {"494 million", {"494 million"}, 1.0, true},
        {"2,763", {"494 million"}, 0.0, false},
        {"494", {"494 million"}, 2.0 / 3.0, false},
        {"The 494 million", {"494 million"}, 1.0, true},
        {"", {"494 million"}, 0.0, false},
        {"net income rose", {"net income fell"}, 2.0 / 3.0, false},
        {"4.5%", {"4.5 %"}, 1.0, true},                // punctuation deleted: both become "45"
        {"an increase of 5", {"increase 5"}, 0.8, false},  // P = 2/3, R = 1
        {"million 494", {"494 million"}, 1.0, false},
        {"a b c d", {"x", "b c"}, 0.8, false},  // best gold "b c": P = 2/3, R = 1
    };
    std::size_t ok = 0;
    std::string first_bad;
    for (const auto& c : cases) {
        const double f1 = harness::token_f1(c.pred, c.golds);
        const bool em = harness::exact_match(c.pred, c.golds);
        if (std::abs(f1 - c.f1) < 1e-12 && em == c.em) ++ok;
        else if (first_bad.empty()) first_bad = " first mismatch: '" + c.pred + "' f1=" + fmt(f1) + " em=" + (em ? "1" : "0");
    }
    return {ok == cases.size(), std::to_string(ok) + "/" + std::to_string(cases.size()) + " cases" + first_bad};
}

// 8. Token-cost ordering.
Outcome token_ordering(const fs::path& work) {
    const auto fx = harness::generate_fixture({harness::FixtureProfile::Complementary, 0, 0});
    const auto idx = index_of(fx);
    harness::ExperimentConfig cfg;
    cfg.strategy = harness::Strategy::Route;
    cfg.train_n = 0;
    const auto rep = run_fixture(fx, idx, cfg, rules::seed_rules());
    std::size_t ok = 0;
    for (const auto& f : rep.forced) {
        ok += f[Path::Hybrid].prompt_tokens >= std::max(f[Path::Doc].prompt_tokens, f[Path::DB].prompt_tokens) ? 1 : 0;
    }
    const auto dir = work / "tokens";
    harness::emit_report(rep, dir);
    std::ifstream in(dir / "accuracy_vs_tokens.tsv");
    std::string line, top;
    double top_tokens = -1;
    std::getline(in, line);  // header
    std::string table;
    while (std::getline(in, line)) {
        std::vector<std::string> cols;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, '\t')) cols.push_back(cell);
        if (cols.size() < 4) continue;
        const double t = std::stod(cols[3]);
        table += cols[0] + "=" + fmt(t, 1) + " ";
        if (t > top_tokens) {
            top_tokens = t;
            top = cols[0];
        }
    }
    return {ok == rep.forced.size() && !rep.forced.empty() && top == "hybrid",
            std::to_string(ok) + "/" + std::to_string(rep.forced.size()) + " queries ordered; mean tokens " + table};
}

// 9. Determinism of two CLI runs.
Outcome determinism(const fs::path& work) {
    const std::string cli = PATHROUTER_CLI;
    const auto data = work / "det_data";
    auto sh = [](const std::string& cmd) { return std::system((cmd + " > /dev/null 2>&1").c_str()); };
    if (sh(cli + " synth --out " + data.string() + " --profile aligned --per-category 150 --seed 4") != 0)
        return {false, "synth command failed"};
    std::vector<std::map<std::string, std::string>> files(2);
    for (int i = 0; i < 2; ++i) {
        const auto out = work / ("det_run" + std::to_string(i));
        fs::remove_all(out);
        const std::string cmd = cli + " run --strategy route_cached --dataset " + (data / "dataset.jsonl").string() +
                                " --docs " + (data / "corpus.jsonl").string() + " --tables " +
                                (data / "tables" / "manifest.jsonl").string() + " --replay " +
                                (data / "replay.jsonl").string() + " --rules " +
                                (data / "poisoned_rules.jsonl").string() +
                                " --tau 0.9 --batch-size 25 --update-mode heuristic --seed 3 --out " + out.string();
        if (sh(cmd) != 0) return {false, "run command failed: " + cmd};
        for (const auto& e : fs::directory_iterator(out)) {
            const auto name = e.path().filename().string();
            if (name.rfind(harness::kTimingPrefix, 0) == 0) continue;
            files[static_cast<std::size_t>(i)][name] = jsonl::read_file(e.path());
        }
    }
    std::size_t same = 0;
    std::string differing;
    for (const auto& [name, body] : files[0]) {
        const auto it = files[1].find(name);
        if (it != files[1].end() && it->second == body) ++same;
        else differing += " " + name;
    }
    const bool pass = !files[0].empty() && files[0].size() == files[1].size() && same == files[0].size();
    return {pass, std::to_string(same) + "/" + std::to_string(files[0].size()) + " report files byte-identical" +
                      (differing.empty() ? "" : "; differ:" + differing)};
}

class FixedClient final : public qa::AnswerClient {
public:
    std::string reply;
    qa::Completion complete(const qa::Prompt&) override { return {reply, 1}; }
    std::string name() const override { return "fixed"; }
};

// 10. Write proposals never reach the store.
Outcome safety() {
    const auto fx = harness::generate_fixture({harness::FixtureProfile::Aligned, 5, 0});
    const auto store = fx.table_store();
    const auto before = store.content_hash();
    const auto meta = retrieval::describe_table(*store.find("financials"));

    const std::vector<std::string> writes = {
        "INSERT INTO financials VALUES ('x', 2019, 'revenue', 1)",
        "UPDATE financials SET value_musd = 0",
        "DELETE FROM financials",
        "DROP TABLE financials",
        "ALTER TABLE financials ADD COLUMN x",
        "CREATE TABLE t (a)",
        "REPLACE INTO financials VALUES (1)",
        "TRUNCATE TABLE financials",
        "SELECT * FROM financials; DELETE FROM financials",
        "SELECT * FROM financials; DROP TABLE financials",
        "SELECT * INTO backup FROM financials",
        "ATTACH DATABASE 'x' AS y",
        "PRAGMA writable_schema = 1",
        "SELECT * FROM financials WHERE year = 2019 -- ; DELETE FROM financials",
        "SELECT * FROM financials /* DROP */ WHERE year = 2019",
        "WITH x AS (DELETE FROM financials) SELECT * FROM x",
        "UPSERT financials",
        "MERGE INTO financials USING t",
        "GRANT ALL ON financials TO public",
        "VACUUM",
    };
    std::mt19937_64 rng(10);
    auto mutate = [&](std::string s) {
        // Random case flips and whitespace padding.
        std::uniform_int_distribution<int> coin(0, 1);
        for (auto& ch : s)
            if (std::isalpha(static_cast<unsigned char>(ch)) && coin(rng))
                ch = static_cast<char>(std::isupper(static_cast<unsigned char>(ch)) ? std::tolower(ch) : std::toupper(ch));
        std::string pad(static_cast<std::size_t>(coin(rng) * 3), ' ');
        std::string nl = coin(rng) ? "\n" : "\t";
        for (std::size_t pos = s.find(' '); pos != std::string::npos && coin(rng); pos = s.find(' ', pos + 2))
            s.replace(pos, 1, nl);
        return pad + s + pad + (coin(rng) ? ";" : "");
    };

    std::size_t rejected = 0, total = 0;
    FixedClient client;
    for (int i = 0; i < 100; ++i, ++total) {
        const std::string sql = mutate(writes[static_cast<std::size_t>(i) % writes.size()]);
        bool blocked_exec = false, blocked_gen = false;
        try {
            retrieval::execute_structured_query(sql, store);
        } catch (const Error& e) {
            blocked_exec = e.code() == ErrorCode::UnsafeStatement;
        }
        client.reply = sql;
        try {
            retrieval::generate_structured_query("What was revenue in 2019?", meta, &client);
        } catch (const Error& e) {
            blocked_gen = e.code() == ErrorCode::UnsafeStatement;
        }
        rejected += blocked_exec && blocked_gen ? 1 : 0;
    }
    const auto after = store.content_hash();
    return {rejected == total && before == after,
            std::to_string(rejected) + "/" + std::to_string(total) + " rejected, store hash " +
                (before == after ? "unchanged" : "CHANGED")};
}

}  // namespace

int main(int argc, char** argv) {
    const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "pathrouter_acceptance";
    fs::create_directories(work);

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"routing correctness on 400-query workload", routing_correctness},
        {"routed accuracy above best single path and within oracle", complementarity},
        {"cache replay at tau 1.0", cache_replay},
        {"cache lookup maximality", cache_maximality},
        {"rule update improvement from poisoned rule", rule_update},
        {"BM25 oracle equivalence", bm25_oracle},
        {"metric oracles", metric_oracles},
        {"token cost ordering", [&] { return token_ordering(work); }},
        {"determinism of repeated runs", [&] { return determinism(work); }},
        {"write proposals rejected", safety},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += o.pass ? 0 : 1;
        std::cout << "criterion " << (i + 1) << ": " << (o.pass ? "PASS" : "FAIL") << " - " << criteria[i].first
                  << " (" << o.detail << ")" << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
