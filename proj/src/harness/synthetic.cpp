#include "pathrouter/harness/synthetic.hpp"

#include <array>
#include <functional>
#include <set>

#include "pathrouter/core/error.hpp"
#include "pathrouter/core/jsonl.hpp"
#include "pathrouter/core/text.hpp"

namespace pathrouter::harness {

namespace {

const std::array<std::string, 3> kCompanies{"Acme Corp", "Globex", "Initech"};
const std::array<std::string, 5> kSegments{"retail", "wholesale", "services", "Europe", "Asia"};
const std::array<std::string, 6> kMetrics{"net income",  "revenue",      "operating expenses",
                                          "cash flow",   "gross profit", "interest expense"};
const std::array<std::string, 6> kConcepts{"goodwill",     "deferred revenue", "hedge accounting",
                                           "amortization", "working capital",  "impairment"};
const std::array<std::string, 3> kRisks{"currency risk", "credit risk", "liquidity risk"};
constexpr int kFirstYear = 2015;
constexpr int kYears = 8;

const std::array<std::pair<std::string_view, std::string_view>, 9> kDefinitions{{
    {"goodwill", "excess of purchase price over identifiable net assets"},
    {"deferred revenue", "payments received before goods or services are delivered"},
    {"hedge accounting", "matching the timing of hedge and hedged item gains and losses"},
    {"amortization", "systematic allocation of an intangible asset cost over its life"},
    {"working capital", "current assets minus current liabilities"},
    {"impairment", "a write down when carrying value exceeds recoverable value"},
    {"currency risk", "exposure to exchange rate movements"},
    {"credit risk", "exposure to counterparty default"},
    {"liquidity risk", "inability to meet obligations as they fall due"},
}};

std::vector<std::string> topics() {
    std::vector<std::string> t(kConcepts.begin(), kConcepts.end());
    t.insert(t.end(), kRisks.begin(), kRisks.end());
    return t;
}

std::string fill(std::string tpl, const std::vector<std::pair<std::string, std::string>>& vars) {
    for (const auto& [k, v] : vars) {
        const auto key = "{" + k + "}";
        for (auto pos = tpl.find(key); pos != std::string::npos; pos = tpl.find(key, pos + v.size()))
            tpl.replace(pos, key.size(), v);
    }
    return tpl;
}

/// Slot values behind one generated question.
struct Slots {
    std::size_t company = 0;
    std::size_t metric = 0;
    int year = kFirstYear;
    std::string topic;
};

struct Candidate {
    std::string question;
    Slots slots;
};

std::vector<Candidate> candidates(Category c) {
    std::vector<Candidate> out;
    auto add = [&](std::string q, Slots s) { out.push_back({std::move(q), std::move(s)}); };
    switch (c) {
        case Category::Numeric:
            for (std::size_t m = 0; m < kMetrics.size(); ++m)
                for (std::size_t co = 0; co < kCompanies.size(); ++co)
                    for (int y = kFirstYear; y < kFirstYear + kYears; ++y) {
                        const std::vector<std::pair<std::string, std::string>> v{
                            {"metric", kMetrics[m]}, {"company", kCompanies[co]}, {"year", std::to_string(y)},
                            {"year2", std::to_string(y + 1)}};
                        const Slots s{co, m, y, {}};
                        add(fill("What was the total {metric} of {company} in {year}?", v), s);
                        add(fill("How much {metric} did {company} report in {year}?", v), s);
                        if (y + 1 < kFirstYear + kYears)
                            add(fill("Calculate the average {metric} of {company} for {year} and {year2}.", v), s);
                        for (const auto& seg : kSegments) {
                            auto vs = v;
                            vs.emplace_back("segment", seg);
                            add(fill("What percentage of {company} {metric} came from the {segment} segment in {year}?", vs), s);
                        }
                    }
            break;
        case Category::HowWhy:
            for (std::size_t co = 0; co < kCompanies.size(); ++co)
                for (const auto& seg : kSegments) {
                    for (const auto& r : kRisks) {
                        const std::vector<std::pair<std::string, std::string>> v{
                            {"company", kCompanies[co]}, {"segment", seg}, {"risk", r}};
                        add(fill("How does {company} manage {risk} in its {segment} business?", v), {co, 0, 0, r});
                        add(fill("Why is {risk} a concern for {company} in the {segment} segment?", v), {co, 0, 0, r});
                    }
                    for (const auto& k : kConcepts) {
                        const std::vector<std::pair<std::string, std::string>> v{
                            {"company", kCompanies[co]}, {"segment", seg}, {"concept", k}};
                        add(fill("Why did {company} revise its {concept} policy for the {segment} segment?", v), {co, 0, 0, k});
                        add(fill("How did {company} account for {concept} in the {segment} segment?", v), {co, 0, 0, k});
                    }
                }
            break;
        case Category::Definition:
            for (const auto& t : topics()) {
                add(fill("What is {topic}?", {{"topic", t}}), {0, 0, 0, t});
                for (std::size_t co = 0; co < kCompanies.size(); ++co) {
                    const std::vector<std::pair<std::string, std::string>> v{{"topic", t}, {"company", kCompanies[co]}};
                    add(fill("What does {topic} mean for {company}?", v), {co, 0, 0, t});
                    add(fill("What is the meaning of {topic} in {company} filings?", v), {co, 0, 0, t});
                    for (const auto& seg : kSegments) {
                        auto vs = v;
                        vs.emplace_back("segment", seg);
                        add(fill("Define {topic} in the context of {company} {segment} reporting.", vs), {co, 0, 0, t});
                    }
                }
            }
            break;
        case Category::FactPlusExplanation:
            for (std::size_t m = 0; m < kMetrics.size(); ++m)
                for (std::size_t co = 0; co < kCompanies.size(); ++co)
                    for (int y = kFirstYear; y < kFirstYear + kYears; ++y) {
                        const std::vector<std::pair<std::string, std::string>> v{
                            {"metric", kMetrics[m]}, {"company", kCompanies[co]}, {"year", std::to_string(y)}};
                        const Slots s{co, m, y, {}};
                        add(fill("What was the {metric} of {company} in {year} and why did it change?", v), s);
                        add(fill("Explain the change in {company} {metric} during {year}.", v), s);
                        add(fill("Why did the {metric} of {company} reach its {year} level?", v), s);
                    }
            break;
        case Category::Other:
            break;
    }
    return out;
}

/// Distinct draws from a category, in seeded order.
std::vector<Candidate> draw(Category c, std::size_t n, std::uint64_t seed) {
    const auto all = candidates(c);
    if (n > all.size())
        throw Error(ErrorCode::ConfigError, "cannot generate " + std::to_string(n) + " distinct " +
                                                std::string(to_string(c)) + " questions (at most " +
                                                std::to_string(all.size()) + ")");
    const auto perm = seeded_permutation(all.size(), seed ^ (0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(c) + 1)));
    std::vector<Candidate> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(all[perm[i]]);
    return out;
}

constexpr Category kCategories[] = {Category::Numeric, Category::HowWhy, Category::Definition,
                                    Category::FactPlusExplanation};

int metric_value(std::size_t company, std::size_t metric, int year) {
    const auto h = text::fnv1a64(kCompanies[company] + "|" + kMetrics[metric] + "|" + std::to_string(year));
    return 120 + static_cast<int>(h % 4800);
}

std::string definition_of(const std::string& topic) {
    for (const auto& [t, d] : kDefinitions)
        if (t == topic) return std::string(d);
    return "not defined";
}

struct Answers {
    std::string gold;
    PathMap<std::string> by_path;
};

/// Gold answer and the four per-path answers; `ok` marks the paths that
/// answer correctly.
Answers answers_for(Category c, const Slots& s, const PathMap<bool>& ok) {
    Answers a;
    std::string wrong;
    switch (c) {
        case Category::Numeric: {
            const int v = metric_value(s.company, s.metric, s.year);
            a.gold = std::to_string(v) + " million";
            wrong = std::to_string(v + 11) + " million";
            break;
        }
        case Category::HowWhy:
            a.gold = "through centralized review of " + s.topic + " by the treasury committee";
            wrong = "not disclosed in the filings";
            break;
        case Category::Definition:
            a.gold = definition_of(s.topic);
            wrong = "a measure of reported revenue";
            break;
        case Category::FactPlusExplanation: {
            const int v = metric_value(s.company, s.metric, s.year);
            a.gold = std::to_string(v) + " million due to higher volumes";
            wrong = std::to_string(v + 11) + " million due to lower prices";
            break;
        }
        case Category::Other:
            a.gold = "unknown";
            wrong = "none";
            break;
    }
    for (Path p : kAllPaths) a.by_path[p] = ok[p] ? a.gold : wrong;
    return a;
}

/// Correct-path pattern for the i-th query of a category under the
/// complementary profile (200 numeric, 125 how/why, 75 definition, 100
/// fact-with-explanation).
PathMap<bool> complementary_pattern(Category c, std::size_t i) {
    PathMap<bool> ok{};
    switch (c) {
        case Category::Numeric:
            ok[Path::DB] = i < 60;
            ok[Path::Hybrid] = i < 45;
            break;
        case Category::HowWhy:
            ok[Path::Doc] = i < 35;
            ok[Path::Hybrid] = i < 30;
            ok[Path::LLM] = i < 8;
            break;
        case Category::Definition:
            ok[Path::LLM] = i < 17;
            break;
        case Category::FactPlusExplanation:
            ok[Path::Hybrid] = i < 20;
            ok[Path::DB] = i < 15;
            ok[Path::Doc] = i < 15;
            break;
        case Category::Other:
            break;
    }
    return ok;
}

std::vector<retrieval::Table> fixture_tables() {
    std::vector<retrieval::Table> tables;

    retrieval::Table fin;
    fin.id = "financials";
    fin.columns = {{"company", retrieval::ColumnType::Text},
                   {"year", retrieval::ColumnType::Integer},
                   {"metric", retrieval::ColumnType::Text},
                   {"value_musd", retrieval::ColumnType::Integer}};
    for (std::size_t co = 0; co < kCompanies.size(); ++co)
        for (int y = kFirstYear; y < kFirstYear + kYears; ++y)
            for (std::size_t m = 0; m < kMetrics.size(); ++m)
                fin.rows.push_back({kCompanies[co], std::to_string(y), kMetrics[m], std::to_string(metric_value(co, m, y))});
    fin.description =
        "Annual financial statement figures in millions of dollars for Acme Corp, Globex and Initech: net income, "
        "revenue, operating expenses, cash flow, gross profit and interest expense by year.";
    tables.push_back(std::move(fin));

    retrieval::Table pol;
    pol.id = "accounting_policies";
    pol.columns = {{"company", retrieval::ColumnType::Text},
                   {"topic", retrieval::ColumnType::Text},
                   {"status", retrieval::ColumnType::Text}};
    const auto ts = topics();
    for (std::size_t co = 0; co < kCompanies.size(); ++co)
        for (std::size_t t = 0; t < ts.size(); ++t)
            pol.rows.push_back({kCompanies[co], ts[t], (co + t) % 3 == 0 ? "revised" : "unchanged"});
    pol.description =
        "Accounting policy and risk disclosure status per company: goodwill, deferred revenue, hedge accounting, "
        "amortization, working capital, impairment, currency risk, credit risk and liquidity risk.";
    tables.push_back(std::move(pol));

    retrieval::Table der;
    der.id = "derivatives";
    der.columns = {{"item", retrieval::ColumnType::Text},
                   {"year", retrieval::ColumnType::Integer},
                   {"carrying_amount", retrieval::ColumnType::Text},
                   {"unit", retrieval::ColumnType::Text}};
    der.rows = {{"interest rate swaps", "2018", "512", "million"},
                {"interest rate swaps", "2019", "494", "million"},
                {"cross-currency swaps", "2018", "2,540", "million"},
                {"cross-currency swaps", "2019", "2,763", "million"},
                {"commodity futures", "2018", "88", "million"},
                {"commodity futures", "2019", "97", "million"}};
    der.description =
        "Carrying amount of derivative instruments such as interest rate swaps, cross-currency swaps and commodity "
        "futures.";
    tables.push_back(std::move(der));
    return tables;
}

std::vector<std::pair<std::string, std::string>> fixture_corpus() {
    std::vector<std::pair<std::string, std::string>> docs;
    auto add = [&](std::string body) {
        char id[16];
        std::snprintf(id, sizeof id, "d%03zu", docs.size() + 1);
        docs.emplace_back(id, std::move(body));
    };
    for (const auto& co : kCompanies) {
        for (const auto& t : topics()) {
            add(co + " discloses its approach to " + t + " in the notes to the financial statements. The treasury "
                "committee reviews " + t + " for the retail, wholesale and services segments in Europe and Asia.");
        }
        for (const auto& m : kMetrics) {
            add("The annual report of " + co + " discusses " + m + " and the drivers behind changes in " + m +
                " from year to year, including volumes, prices and segment mix.");
        }
    }
    add("Derivative instruments include interest rate swaps and cross-currency swaps. In 2019 the carrying amount of "
        "cross-currency swaps was 2,763 million.");
    add("Interest rate swaps convert floating rate debt to fixed rate debt and are carried at fair value.");
    return docs;
}

}  // namespace

std::vector<WorkloadQuery> generate_workload(std::size_t per_category, std::uint64_t seed) {
    std::vector<WorkloadQuery> all;
    for (Category c : kCategories)
        for (auto& cand : draw(c, per_category, seed)) all.push_back({std::move(cand.question), c});
    const auto perm = seeded_permutation(all.size(), seed);
    std::vector<WorkloadQuery> out;
    out.reserve(all.size());
    for (auto i : perm) out.push_back(all[i]);
    return out;
}

Fixture generate_fixture(const FixtureConfig& config) {
    struct Item {
        std::string question;
        Category category;
        Answers answers;
        std::vector<std::string> table_refs;
    };
    std::vector<Item> items;
    const bool complementary = config.profile == FixtureProfile::Complementary;
    for (Category c : kCategories) {
        std::size_t n = config.per_category;
        if (complementary) {
            n = c == Category::Numeric ? 200 : c == Category::HowWhy ? 125 : c == Category::Definition ? 75 : 100;
        }
        if (n == 0) continue;
        const auto drawn = draw(c, n, config.seed);
        for (std::size_t i = 0; i < drawn.size(); ++i) {
            PathMap<bool> ok{};
            if (complementary) ok = complementary_pattern(c, i);
            else ok[aligned_path(c)] = true;
            Item it{drawn[i].question, c, answers_for(c, drawn[i].slots, ok), {}};
            if (c == Category::Numeric || c == Category::FactPlusExplanation) it.table_refs = {"financials"};
            // The case study takes a numeric slot that is correct on DB only.
            const std::size_t case_slot = complementary ? 59 : 0;
            if (c == Category::Numeric && i == case_slot) {
                it.question = std::string(kCaseStudyQuestion);
                it.answers.gold = std::string(kCaseStudyGold);
                for (Path p : kAllPaths) it.answers.by_path[p] = "3,257 million";
                it.answers.by_path[Path::DB] = std::string(kCaseStudyGold);
                it.answers.by_path[Path::Hybrid] = std::string(kCaseStudyHybridAnswer);
                it.table_refs = {"derivatives"};
            }
            items.push_back(std::move(it));
        }
    }

    Fixture fx;
    fx.tables = fixture_tables();
    fx.corpus = fixture_corpus();
    const auto perm = seeded_permutation(items.size(), config.seed);
    for (std::size_t k = 0; k < perm.size(); ++k) {
        const auto& it = items[perm[k]];
        char id[16];
        std::snprintf(id, sizeof id, "q%04zu", k + 1);
        QARecord r;
        r.query_id = id;
        r.question = it.question;
        r.gold_answers = {it.answers.gold};
        r.table_refs = it.table_refs;
        r.category = it.category;
        fx.dataset.push_back(r);
        for (Path p : kAllPaths) {
            const auto& a = it.answers.by_path[p];
            fx.replay.push_back({r.query_id, p, {a, 0, static_cast<std::uint64_t>(qa::count_tokens(a))}});
        }
    }
    return fx;
}

qa::ReplayClient Fixture::replay_client() const {
    qa::ReplayClient c;
    for (const auto& r : replay) c.add(r.query_id, r.path, r.answer);
    return c;
}

retrieval::TableStore Fixture::table_store() const {
    retrieval::TableStore s;
    for (const auto& t : tables) s.add(t);
    return s;
}

rules::RuleSet poisoned_rules() {
    auto rs = rules::seed_rules();
    for (auto& r : rs.rules) {
        if (r.target_path == Path::DB) {
            r.id = "numeric_to_doc";
            r.description = "numeric questions read passages";
            r.target_path = Path::Doc;
            r.delta = 1;
        }
    }
    rules::validate(rs);
    return rs;
}

namespace {

std::string csv_cell(const std::string& v) {
    if (v.find_first_of(",\"\n\r") == std::string::npos) return v;
    std::string out = "\"";
    for (char c : v) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

void write_fixture(const Fixture& fx, const std::filesystem::path& dir) {
    std::string dataset;
    for (const auto& r : fx.dataset) dataset += jsonl::dump_line(to_json(r)) + "\n";
    jsonl::write_file(dir / "dataset.jsonl", dataset);

    std::string corpus;
    for (const auto& [id, body] : fx.corpus) corpus += jsonl::dump_line({{"doc_id", id}, {"text", body}}) + "\n";
    jsonl::write_file(dir / "corpus.jsonl", corpus);

    std::string replay;
    for (const auto& r : fx.replay) {
        replay += jsonl::dump_line({{"query_id", r.query_id},
                                    {"path", std::string(to_string(r.path))},
                                    {"answer_text", r.answer.answer_text},
                                    {"prompt_tokens", r.answer.prompt_tokens},
                                    {"completion_tokens", r.answer.completion_tokens}}) + "\n";
    }
    jsonl::write_file(dir / "replay.jsonl", replay);

    std::string manifest;
    for (const auto& t : fx.tables) {
        std::string body;
        for (std::size_t i = 0; i < t.columns.size(); ++i) body += (i ? "," : "") + csv_cell(t.columns[i].name);
        body += "\n";
        for (const auto& row : t.rows) {
            for (std::size_t i = 0; i < row.size(); ++i) body += (i ? "," : "") + csv_cell(row[i]);
            body += "\n";
        }
        jsonl::write_file(dir / "tables" / (t.id + ".csv"), body);
        manifest += jsonl::dump_line({{"table_id", t.id}, {"path", t.id + ".csv"}, {"description", t.description}}) + "\n";
    }
    jsonl::write_file(dir / "tables" / "manifest.jsonl", manifest);

    jsonl::write_file(dir / "seed_rules.jsonl", rules::serialize_rules(rules::seed_rules()));
    jsonl::write_file(dir / "poisoned_rules.jsonl", rules::serialize_rules(poisoned_rules()));
}

}  // namespace pathrouter::harness
