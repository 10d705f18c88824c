#include <gtest/gtest.h>

#include <httplib.h>

#include <thread>

#include "pathrouter/core/error.hpp"
#include "pathrouter/core/jsonl.hpp"
#include "pathrouter/qa/client.hpp"
#include "pathrouter/qa/http.hpp"
#include "pathrouter/qa/pipeline.hpp"
#include "pathrouter/qa/prompt.hpp"
#include "pathrouter/retrieval/evidence.hpp"

using namespace pathrouter;
using namespace pathrouter::qa;

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

constexpr const char* kCase = "What is the 2019 carrying amount of interest rate swaps?";

retrieval::RetrievalIndex case_index() {
    retrieval::RetrievalIndex idx;
    idx.docs = retrieval::DocIndex::build(
        {{"d1", "The company uses interest rate swaps to hedge floating rate debt; carrying amounts are in note 12."},
         {"d2", "Cross-currency swaps hedge foreign currency exposure of subsidiaries."},
         {"d3", "Goodwill is tested for impairment annually."}});
    auto t = retrieval::parse_delimited("derivatives",
                                        "instrument,year,carrying_amount\n"
                                        "interest rate swaps,2019,494\n"
                                        "interest rate swaps,2018,420\n"
                                        "cross-currency swaps,2019,\"2,763\"\n");
    t.description = "Carrying amounts of derivative instruments such as swaps";
    idx.store.add(std::move(t));
    idx.tables = retrieval::build_table_index(idx.store);
    return idx;
}

Prompt prompt_for(Path p, const retrieval::RetrievalIndex& idx, const char* q = kCase) {
    return build_prompt("q1", q, retrieval::gather_evidence(p, q, idx), PromptTemplates::defaults());
}

}  // namespace

// ---- prompts ----

TEST(Prompt, LlmPathHasQuestionOnly) {
    const auto idx = case_index();
    const auto p = prompt_for(Path::LLM, idx);
    EXPECT_EQ(p.path, Path::LLM);
    EXPECT_NE(p.user_text.find(kCase), std::string::npos);
    EXPECT_EQ(p.user_text.find("494"), std::string::npos);
    EXPECT_EQ(p.user_text.find(kImmutabilityInstruction), std::string::npos);
    EXPECT_EQ(p.token_count, count_tokens(p.system_text) + count_tokens(p.user_text));
}

TEST(Prompt, DbPathCarriesFactsAndInstruction) {
    const auto idx = case_index();
    const auto p = prompt_for(Path::DB, idx);
    EXPECT_NE(p.user_text.find("494"), std::string::npos);
    EXPECT_NE(p.user_text.find(kImmutabilityInstruction), std::string::npos);
    EXPECT_LT(p.user_text.find(kImmutabilityInstruction), p.user_text.find("494"));
}

TEST(Prompt, HybridIsTheLargest) {
    const auto idx = case_index();
    const auto llm = prompt_for(Path::LLM, idx), doc = prompt_for(Path::Doc, idx), db = prompt_for(Path::DB, idx),
               hyb = prompt_for(Path::Hybrid, idx);
    EXPECT_GE(hyb.token_count, std::max(doc.token_count, db.token_count));
    EXPECT_GT(doc.token_count, llm.token_count);
    EXPECT_GT(db.token_count, llm.token_count);
}

TEST(Prompt, EvidenceMustFitPath) {
    const auto idx = case_index();
    auto bundle = retrieval::gather_evidence(Path::Hybrid, kCase, idx);
    ASSERT_FALSE(bundle.facts.empty());
    bundle.path = Path::Doc;
    EXPECT_EQ(code_of([&] { build_prompt("q", kCase, bundle, PromptTemplates::defaults()); }), ErrorCode::SchemaError);
    bundle.path = Path::LLM;
    EXPECT_EQ(code_of([&] { build_prompt("q", kCase, bundle, PromptTemplates::defaults()); }), ErrorCode::SchemaError);
}

TEST(Prompt, BracesInQuestionAreNotReexpanded) {
    retrieval::EvidenceBundle b;
    b.path = Path::LLM;
    const auto p = build_prompt("q", "What is {passages}?", b, PromptTemplates::defaults());
    EXPECT_NE(p.user_text.find("What is {passages}?"), std::string::npos);
}

TEST(Prompt, TemplatesValidateAndRoundTrip) {
    const auto def = PromptTemplates::defaults();
    EXPECT_NO_THROW(def.validate());
    const auto back = PromptTemplates::from_json(def.to_json());
    EXPECT_EQ(back.to_json(), def.to_json());
    auto broken = def;
    broken.user[Path::DB] = "Question: {question}\nAnswer:";
    EXPECT_EQ(code_of([&] { broken.validate(); }), ErrorCode::TemplateMissing);
}

TEST(Prompt, ShippedAssetEqualsDefaults) {
    const auto shipped = PromptTemplates::load(std::string(PATHROUTER_SOURCE_DIR) + "/assets/prompts.json");
    EXPECT_EQ(shipped.to_json(), PromptTemplates::defaults().to_json());
}

// ---- clients ----

TEST(Replay, CaseStudyAnswers) {
    const auto c = ReplayClient::parse(
        "{\"query_id\":\"q1\",\"path\":\"DB\",\"answer_text\":\"494 million\",\"prompt_tokens\":10,\"completion_tokens\":2}\n"
        "{\"query_id\":\"q1\",\"path\":\"Hybrid\",\"answer_text\":\"2,763\",\"prompt_tokens\":20,\"completion_tokens\":1}\n");
    auto client = c;
    Prompt p;
    p.query_id = "q1";
    p.path = Path::DB;
    EXPECT_EQ(client.complete(p).answer_text, "494 million");
    p.path = Path::Hybrid;
    EXPECT_EQ(client.complete(p).answer_text, "2,763");
    p.path = Path::Doc;
    EXPECT_EQ(code_of([&] { client.complete(p); }), ErrorCode::MissingFixture);
}

TEST(Scripted, FirstMatchWinsAndEmptyTableFails) {
    ScriptedClient empty;
    Prompt p;
    p.user_text = "anything";
    EXPECT_EQ(code_of([&] { empty.complete(p); }), ErrorCode::ClientError);
    ScriptedClient s({{"swaps", "494 million"}, {".*", "unknown"}});
    p.user_text = "interest rate swaps";
    EXPECT_EQ(s.complete(p).answer_text, "494 million");
    p.user_text = "goodwill";
    EXPECT_EQ(s.complete(p).answer_text, "unknown");
    EXPECT_EQ(s.calls(), 2u);
}

TEST(Answer, WrapsForeignExceptions) {
    class Boom final : public AnswerClient {
    public:
        Completion complete(const Prompt&) override { throw std::runtime_error("socket closed"); }
        std::string name() const override { return "boom"; }
    } boom;
    EXPECT_EQ(code_of([&] { answer(Prompt{}, boom); }), ErrorCode::ClientError);
}

TEST(Tokens, WhitespaceCounts) {
    EXPECT_EQ(count_tokens(""), 0u);
    EXPECT_EQ(count_tokens("net income 2019"), 3u);
    EXPECT_EQ(count_tokens("  a\tb\n c  "), 3u);
    const std::string a = "How much was", b = "the net income?";
    EXPECT_EQ(count_tokens(a + " " + b), count_tokens(a) + count_tokens(b));
    EXPECT_EQ(WhitespaceTokenCounter{}.count("x y"), 2u);
}

// ---- pipeline ----

TEST(Pipeline, EndToEndReplayAndFallback) {
    const auto idx = case_index();
    ReplayClient replay;
    replay.add("q1", Path::DB, {"494 million", 0, 2});
    replay.add("q1", Path::Hybrid, {"2,763", 0, 1});
    replay.add("q2", Path::LLM, {"unknown", 0, 1});
    QaPipeline pipe(idx, PromptTemplates::defaults(), replay);
    const auto db = pipe.run("q1", kCase, Path::DB);
    EXPECT_EQ(db.record.answer_text, "494 million");
    EXPECT_EQ(db.record.path, Path::DB);
    EXPECT_EQ(db.record.prompt_tokens, db.prompt.token_count);
    EXPECT_FALSE(db.degraded);
    EXPECT_EQ(pipe.run("q1", kCase, Path::Hybrid).record.answer_text, "2,763");

    // No table matches: the DB request is answered on the LLM path and flagged.
    const auto fb = pipe.run("q2", "zebra giraffe", Path::DB);
    EXPECT_TRUE(fb.degraded);
    EXPECT_EQ(fb.requested_path, Path::DB);
    EXPECT_EQ(fb.record.path, Path::LLM);
    EXPECT_EQ(fb.record.answer_text, "unknown");
}

TEST(Pipeline, ThrottledClientCapsConcurrency) {
    class Slow final : public AnswerClient {
    public:
        std::atomic<int> in_flight{0}, peak{0};
        Completion complete(const Prompt&) override {
            const int now = ++in_flight;
            int prev = peak.load();
            while (now > prev && !peak.compare_exchange_weak(prev, now)) {
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(5));
            --in_flight;
            return {"ok", 1};
        }
        std::string name() const override { return "slow"; }
    } slow;
    ThrottledClient throttled(slow, 2);
    std::vector<std::thread> ts;
    for (int i = 0; i < 8; ++i) ts.emplace_back([&] { throttled.complete(Prompt{}); });
    for (auto& t : ts) t.join();
    EXPECT_LE(slow.peak.load(), 2);
}

// ---- HTTP clients against a local server ----

namespace {

struct LocalServer {
    httplib::Server server;
    int port = 0;
    std::thread thread;
    std::string last_auth;
    nlohmann::json last_body;

    LocalServer() {
        server.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
            last_auth = req.get_header_value("Authorization");
            last_body = nlohmann::json::parse(req.body);
            const std::string user = last_body["messages"][1]["content"];
            std::string reply = "494 million";
            if (user.find("Reply yes or no") != std::string::npos) reply = "Yes.";
            if (user.find("Current rule file") != std::string::npos) reply = "```\n{\"record\":\"header\"}\n```";
            if (user.rfind("Question: pick", 0) == 0) reply = "Hybrid";
            nlohmann::json out{{"choices", {{{"message", {{"role", "assistant"}, {"content", reply}}}}}},
                               {"usage", {{"completion_tokens", 7}}}};
            res.set_content(out.dump(), "application/json");
        });
        server.Post("/v1/embeddings", [](const httplib::Request&, httplib::Response& res) {
            nlohmann::json out{{"data", {{{"embedding", {3.0, 4.0, 0.0}}}}}};
            res.set_content(out.dump(), "application/json");
        });
        server.Post("/v1/broken/chat/completions", [](const httplib::Request&, httplib::Response& res) {
            res.status = 500;
            res.set_content("nope", "text/plain");
        });
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~LocalServer() {
        server.stop();
        thread.join();
    }
    EndpointConfig endpoint(const std::string& prefix = "/v1") const {
        EndpointConfig c;
        c.base_url = "http://127.0.0.1:" + std::to_string(port) + prefix;
        c.model = "test-model";
        c.api_key = "secret";
        c.timeout = std::chrono::seconds(5);
        return c;
    }
};

}  // namespace

TEST(Http, ChatClientParsesCompletion) {
    LocalServer srv;
    HttpChatClient chat(srv.endpoint());
    Prompt p;
    p.system_text = "sys";
    p.user_text = "Question: what?";
    const auto c = chat.complete(p);
    EXPECT_EQ(c.answer_text, "494 million");
    EXPECT_EQ(c.completion_tokens, 7u);
    EXPECT_EQ(srv.last_auth, "Bearer secret");
    EXPECT_EQ(srv.last_body["model"], "test-model");
    EXPECT_EQ(srv.last_body["messages"][0]["content"], "sys");
}

TEST(Http, ErrorsBecomeClientError) {
    LocalServer srv;
    HttpChatClient broken(srv.endpoint("/v1/broken"));
    EXPECT_EQ(code_of([&] { broken.chat("s", "u"); }), ErrorCode::ClientError);
    EndpointConfig dead = srv.endpoint();
    dead.base_url = "http://127.0.0.1:1/v1";
    dead.timeout = std::chrono::seconds(1);
    HttpChatClient unreachable(dead);
    EXPECT_EQ(code_of([&] { unreachable.chat("s", "u"); }), ErrorCode::ClientError);
    EndpointConfig bad = srv.endpoint();
    bad.base_url = "no-scheme";
    EXPECT_EQ(code_of([&] { HttpChatClient{bad}; }), ErrorCode::ConfigError);
}

TEST(Http, EmbeddingProviderFixesDimension) {
    LocalServer srv;
    HttpEmbeddingProvider p(srv.endpoint());
    EXPECT_EQ(p.dimension(), 0u);
    const auto v = p.raw_embed("x");
    EXPECT_EQ(v, (std::vector<float>{3, 4, 0}));
    EXPECT_EQ(p.dimension(), 3u);
}

TEST(Http, JudgeExpertAndChooser) {
    LocalServer srv;
    HttpChatClient chat(srv.endpoint());
    ChatJudge judge(chat);
    EXPECT_TRUE(judge.holds("q", "asks about swaps"));
    ChatExpertClient expert(chat);
    EXPECT_EQ(expert.propose("rules", "report"), "{\"record\":\"header\"}");
    ChatChooserScorer chooser(chat);
    const auto s = chooser.score("pick a path", rules::seed_rules());
    EXPECT_EQ(s[Path::Hybrid], 1);
    EXPECT_EQ(s.replay(), s.scores);
}

TEST(Http, ParsePathChoiceAndFences) {
    EXPECT_EQ(parse_path_choice("I would use the Database."), Path::DB);
    EXPECT_EQ(parse_path_choice("doc"), Path::Doc);
    EXPECT_FALSE(parse_path_choice("not sure").has_value());
    EXPECT_EQ(strip_code_fence("```sql\nSELECT 1\n```"), "SELECT 1");
    EXPECT_EQ(strip_code_fence(" plain "), "plain");
}
