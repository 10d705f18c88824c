#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <map>
#include <random>
#include <thread>

#include "pathrouter/cache/embedding.hpp"
#include "pathrouter/cache/meta_cache.hpp"
#include "pathrouter/core/error.hpp"

using namespace pathrouter;
using namespace pathrouter::cache;

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

class ZeroProvider final : public EmbeddingProvider {
public:
    std::size_t dimension() const noexcept override { return 4; }
    std::vector<float> raw_embed(std::string_view) override { return {0, 0, 0, 0}; }
    std::string name() const override { return "zero"; }
};

class ShortProvider final : public EmbeddingProvider {
public:
    std::size_t dimension() const noexcept override { return 4; }
    std::vector<float> raw_embed(std::string_view) override { return {1, 0}; }
    std::string name() const override { return "short"; }
};

class ThrowingProvider final : public EmbeddingProvider {
public:
    std::size_t dimension() const noexcept override { return 4; }
    std::vector<float> raw_embed(std::string_view) override { throw std::runtime_error("down"); }
    std::string name() const override { return "throwing"; }
};

// Independent feature-hash oracle: FNV-1a 64 per lowercase alphanumeric run.
std::map<std::size_t, double> oracle_counts(const std::string& text, std::size_t dim) {
    std::map<std::size_t, double> counts;
    std::string tok;
    auto flush = [&] {
        if (tok.empty()) return;
        std::uint64_t h = 14695981039346656037ULL;
        for (unsigned char c : tok) {
            h ^= c;
            h *= 1099511628211ULL;
        }
        counts[h % dim] += 1.0;
        tok.clear();
    };
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c))) tok += static_cast<char>(std::tolower(c));
        else flush();
    }
    flush();
    return counts;
}

double oracle_cosine(const std::string& a, const std::string& b, std::size_t dim) {
    auto ca = oracle_counts(a, dim), cb = oracle_counts(b, dim);
    double dot = 0, na = 0, nb = 0;
    for (auto& [k, v] : ca) {
        na += v * v;
        if (cb.count(k)) dot += v * cb[k];
    }
    for (auto& [k, v] : cb) nb += v * v;
    return dot / std::sqrt(na * nb);
}

Embedding vec4(float a, float b, float c, float d) { return Embedding::normalize({a, b, c, d}); }

rules::PathScores scores_for(Path p, int v = 3) {
    rules::PathScores s;
    s.scores[p] = v;
    s.fired_rules.push_back({"r", p, v});
    return s;
}

Embedding random_unit(std::mt19937_64& rng, std::size_t dim) {
    std::normal_distribution<float> n(0.f, 1.f);
    std::vector<float> v(dim);
    for (auto& x : v) x = n(rng);
    return Embedding::normalize(std::move(v));
}

}  // namespace

TEST(Embed, DeterministicProviderGivesIdenticalVectors) {
    HashingEmbeddingProvider p;
    const auto a = embed("net income 2019", p);
    const auto b = embed("net income 2019", p);
    EXPECT_EQ(a, b);
    EXPECT_EQ(cosine(a, b), 1.0);
    EXPECT_EQ(a.dimension(), 256u);
}

TEST(Embed, ZeroVectorCannotBeNormalized) {
    ZeroProvider p;
    EXPECT_EQ(code_of([&] { embed("x", p); }), ErrorCode::NormalizationError);
    EXPECT_EQ(code_of([] { Embedding::normalize({0, 0}); }), ErrorCode::NormalizationError);
    EXPECT_EQ(code_of([] { Embedding::normalize({NAN, 1}); }), ErrorCode::NormalizationError);
    EXPECT_EQ(code_of([] { Embedding::from_unit({0.5f, 0.5f}); }), ErrorCode::NormalizationError);
}

TEST(Embed, ProviderFailuresMapToErrors) {
    HashingEmbeddingProvider hp;
    EXPECT_EQ(code_of([&] { embed("  ", hp); }), ErrorCode::EmptyQuery);
    ShortProvider sp;
    EXPECT_EQ(code_of([&] { embed("x", sp); }), ErrorCode::DimensionMismatch);
    ThrowingProvider tp;
    EXPECT_EQ(code_of([&] { embed("x", tp); }), ErrorCode::ProviderError);
}

TEST(Embed, ParaphraseCosineMatchesHashOracle) {
    HashingEmbeddingProvider p;
    const std::string a = "net income 2019", b = "net income for 2019";
    const double expected = oracle_cosine(a, b, 256);
    EXPECT_GE(expected, 0.7);
    EXPECT_NEAR(cosine(embed(a, p), embed(b, p)), expected, 1e-6);
    // A few more pairs against the same oracle.
    for (auto [x, y] : std::vector<std::pair<std::string, std::string>>{
             {"What was Q4 net income?", "How much was the net income in the fourth quarter?"},
             {"How much was the net income in Q4?", "How much was the net income in the fourth quarter?"},
             {"define goodwill", "why did revenue fall"}}) {
        EXPECT_NEAR(cosine(embed(x, p), embed(y, p)), oracle_cosine(x, y, 256), 1e-6) << x << " | " << y;
    }
}

TEST(Embed, BucketOfMatchesOracle) {
    HashingEmbeddingProvider p(256);
    EXPECT_EQ(oracle_counts("income", 256).begin()->first, p.bucket_of("income"));
}

TEST(Cosine, SelfOrthogonalAntipodal) {
    const auto z = vec4(0.3f, -0.2f, 0.9f, 0.1f);
    EXPECT_DOUBLE_EQ(cosine(z, z), 1.0);
    EXPECT_DOUBLE_EQ(cosine(vec4(1, 0, 0, 0), vec4(0, 1, 0, 0)), 0.0);
    EXPECT_NEAR(cosine(z, vec4(-0.3f, 0.2f, -0.9f, -0.1f)), -1.0, 1e-12);
    EXPECT_EQ(code_of([&] { cosine(z, Embedding::normalize({1, 0})); }), ErrorCode::DimensionMismatch);
}

TEST(Lookup, DuplicateHitsAtTauOne) {
    MetaCache c(4, 10);
    const auto z = vec4(1, 2, 3, 4);
    EXPECT_FALSE(c.lookup(z, 1.0).has_value());
    c.insert(z, scores_for(Path::DB), Path::DB);
    const auto hit = c.lookup(z, 1.0);
    ASSERT_TRUE(hit.has_value());
    EXPECT_EQ(hit->similarity, 1.0);
    EXPECT_EQ(hit->entry.chosen_path, Path::DB);
    EXPECT_EQ(c.stats().hits, 1u);
    EXPECT_EQ(c.stats().misses, 1u);
}

TEST(Lookup, PicksHigherOfTwoCandidates) {
    // z = e1; a at cosine 0.83, b at cosine 0.91 (checked by hand: first coordinate of a unit vector).
    const auto z = vec4(1, 0, 0, 0);
    const auto a = vec4(0.83f, std::sqrt(1.f - 0.83f * 0.83f), 0, 0);
    const auto b = vec4(0.91f, 0, std::sqrt(1.f - 0.91f * 0.91f), 0);
    EXPECT_NEAR(cosine(z, a), 0.83, 1e-6);
    EXPECT_NEAR(cosine(z, b), 0.91, 1e-6);
    MetaCache c(4, 10);
    c.insert(a, scores_for(Path::Doc), Path::Doc);
    c.insert(b, scores_for(Path::Hybrid), Path::Hybrid);
    const auto hit = c.lookup(z, 0.9);
    ASSERT_TRUE(hit.has_value());
    EXPECT_EQ(hit->entry.chosen_path, Path::Hybrid);
    EXPECT_NEAR(hit->similarity, 0.91, 1e-6);
    EXPECT_FALSE(c.lookup(z, 0.95).has_value());
}

TEST(Insert, FirstInsert) {
    MetaCache c(4, 2);
    c.insert(vec4(1, 0, 0, 0), scores_for(Path::DB), Path::DB);
    EXPECT_EQ(c.size(), 1u);
    EXPECT_EQ(c.stats().evictions, 0u);
}

TEST(Insert, CapacityTwoEvictsFirstInserted) {
    MetaCache c(4, 2);
    const auto a = vec4(1, 0, 0, 0), b = vec4(0, 1, 0, 0), d = vec4(0, 0, 1, 0);
    c.insert(a, scores_for(Path::DB), Path::DB);
    c.insert(b, scores_for(Path::Doc), Path::Doc);
    c.insert(d, scores_for(Path::LLM), Path::LLM);
    EXPECT_EQ(c.size(), 2u);
    EXPECT_EQ(c.stats().evictions, 1u);
    EXPECT_FALSE(c.lookup(a, 1.0).has_value());
    EXPECT_TRUE(c.lookup(b, 1.0).has_value());
    EXPECT_TRUE(c.lookup(d, 1.0).has_value());
}

TEST(Insert, EvictionIsLeastRecentlyHit) {
    MetaCache c(4, 2);
    const auto a = vec4(1, 0, 0, 0), b = vec4(0, 1, 0, 0), d = vec4(0, 0, 1, 0);
    c.insert(a, scores_for(Path::DB), Path::DB);
    c.insert(b, scores_for(Path::Doc), Path::Doc);
    ASSERT_TRUE(c.lookup(a, 1.0).has_value());  // a now more recently hit than b
    c.insert(d, scores_for(Path::LLM), Path::LLM);
    EXPECT_TRUE(c.lookup(a, 1.0).has_value());
    EXPECT_FALSE(c.lookup(b, 1.0).has_value());
}

TEST(Insert, IdenticalEmbeddingUpsertsInPlace) {
    MetaCache c(4, 5);
    const auto a = vec4(1, 1, 0, 0);
    c.insert(a, scores_for(Path::DB), Path::DB);
    c.insert(a, scores_for(Path::Doc), Path::Doc);
    EXPECT_EQ(c.size(), 1u);
    EXPECT_EQ(c.lookup(a, 1.0)->entry.chosen_path, Path::Doc);
}

TEST(Insert, DimensionMismatchRejected) {
    MetaCache c(4, 5);
    EXPECT_EQ(code_of([&] { c.insert(Embedding::normalize({1, 0}), scores_for(Path::DB), Path::DB); }),
              ErrorCode::DimensionMismatch);
    EXPECT_EQ(code_of([&] { c.lookup(Embedding::normalize({1, 0}), 0.5); }), ErrorCode::DimensionMismatch);
}

TEST(Invalidate, ClearsEntriesKeepsCounters) {
    MetaCache c(4, 5);
    c.invalidate_all();  // no-op on empty
    EXPECT_EQ(c.size(), 0u);
    const auto a = vec4(1, 1, 0, 0);
    c.insert(a, scores_for(Path::DB), Path::DB);
    c.insert(vec4(0, 1, 1, 0), scores_for(Path::DB), Path::DB);
    c.invalidate_all();
    EXPECT_EQ(c.size(), 0u);
    EXPECT_FALSE(c.lookup(a, 0.5).has_value());
    EXPECT_EQ(c.stats().insertions, 2u);
}

TEST(Snapshot, RoundTripPreservesEntriesAndCounters) {
    MetaCache c(4, 8);
    std::mt19937_64 rng(5);
    for (int i = 0; i < 6; ++i) c.insert(random_unit(rng, 4), scores_for(kAllPaths[i % 4], i + 1), kAllPaths[i % 4]);
    const auto probe = c.entries()[2].embedding;
    ASSERT_TRUE(c.lookup(probe, 1.0).has_value());

    const auto file = std::filesystem::temp_directory_path() / "pathrouter_cache_test.bin";
    c.save(file);
    const auto back = MetaCache::open(file);
    std::filesystem::remove(file);
    EXPECT_EQ(back->dimension(), 4u);
    EXPECT_EQ(back->capacity(), 8u);
    const auto e1 = c.entries(), e2 = back->entries();
    ASSERT_EQ(e1.size(), e2.size());
    for (std::size_t i = 0; i < e1.size(); ++i) {
        EXPECT_EQ(e1[i].embedding, e2[i].embedding);
        EXPECT_EQ(e1[i].scores.scores, e2[i].scores.scores);
        EXPECT_EQ(e1[i].chosen_path, e2[i].chosen_path);
        EXPECT_EQ(e1[i].insert_seq, e2[i].insert_seq);
        EXPECT_EQ(e1[i].last_hit_seq, e2[i].last_hit_seq);
    }
    EXPECT_EQ(back->stats().hits, c.stats().hits);
    EXPECT_EQ(back->snapshot(), c.snapshot());
}

TEST(Snapshot, RejectsDimensionMismatchAndGarbage) {
    MetaCache c4(4, 8), c8(8, 8);
    c4.insert(vec4(1, 0, 0, 0), scores_for(Path::DB), Path::DB);
    EXPECT_EQ(code_of([&] { c8.restore(c4.snapshot()); }), ErrorCode::DimensionMismatch);
    EXPECT_EQ(code_of([&] { c8.restore("not a snapshot"); }), ErrorCode::SnapshotError);
    std::string truncated = c4.snapshot();
    truncated.resize(truncated.size() - 3);
    MetaCache other(4, 8);
    EXPECT_EQ(code_of([&] { other.restore(truncated); }), ErrorCode::SnapshotError);
}

TEST(Properties, MaximalityAndHitCorrectnessFuzz) {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<std::size_t> sz(0, 300);
    std::uniform_real_distribution<double> taud(0.05, 1.0);
    const std::size_t dim = 16;
    for (int round = 0; round < 20; ++round) {
        MetaCache c(dim, 1000);
        std::vector<Embedding> stored;
        const std::size_t n = sz(rng);
        for (std::size_t i = 0; i < n; ++i) {
            stored.push_back(random_unit(rng, dim));
            c.insert(stored.back(), scores_for(Path::DB), Path::DB);
        }
        for (int probe = 0; probe < 50; ++probe) {
            const auto z = (probe % 5 == 0 && !stored.empty()) ? stored[probe % stored.size()] : random_unit(rng, dim);
            const double tau = taud(rng);
            double best = -2;
            for (const auto& s : stored) best = std::max(best, cosine(z, s));
            const auto hit = c.lookup(z, tau);
            if (hit) {
                EXPECT_GE(hit->similarity, tau);
                EXPECT_NEAR(hit->similarity, best, 1e-9);
            } else {
                EXPECT_LT(best, tau);
            }
        }
    }
}

TEST(Properties, CapacityHoldsUnderConcurrency) {
    MetaCache c(8, 16);
    std::vector<std::thread> threads;
    for (int t = 0; t < 4; ++t) {
        threads.emplace_back([&c, t] {
            std::mt19937_64 rng(static_cast<std::uint64_t>(t));
            for (int i = 0; i < 500; ++i) {
                const auto z = random_unit(rng, 8);
                if (i % 2) c.insert(z, scores_for(Path::Doc), Path::Doc);
                else c.lookup(z, 0.5);
                EXPECT_LE(c.size(), 16u);
            }
        });
    }
    for (auto& th : threads) th.join();
    const auto s = c.stats();
    EXPECT_LE(s.size, 16u);
    EXPECT_EQ(s.lookups(), 1000u);
    EXPECT_EQ(s.insertions, 1000u);
    EXPECT_EQ(s.evictions, s.insertions - s.size);
}
