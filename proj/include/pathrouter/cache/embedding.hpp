#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pathrouter::cache {

/// Unit-norm query embedding. The only ways to build one normalize or verify
/// the norm, so every instance satisfies | ||v|| - 1 | <= kNormTolerance.
class Embedding {
public:
    static constexpr double kNormTolerance = 1e-6;

    Embedding() = default;

    /// L2-normalizes `raw`. Throws NormalizationError on zero/non-finite input.
    static Embedding normalize(std::vector<float> raw);
    /// Accepts an already unit-norm vector; throws NormalizationError otherwise.
    static Embedding from_unit(std::vector<float> unit);

    std::size_t dimension() const noexcept { return values_.size(); }
    std::span<const float> values() const noexcept { return values_; }
    /// Squared norm under the active dot kernel (used as the cosine denominator).
    double self_dot() const noexcept { return self_dot_; }

    bool operator==(const Embedding& o) const noexcept { return values_ == o.values_; }

private:
    explicit Embedding(std::vector<float> v);
    std::vector<float> values_;
    double self_dot_ = 0.0;
};

/// Source of raw (not necessarily normalized) embedding vectors.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::size_t dimension() const noexcept = 0;
    virtual std::vector<float> raw_embed(std::string_view text) = 0;
    virtual std::string name() const = 0;
};

/// Deterministic test provider: tokenize, hash each token (FNV-1a 64) into
/// `dimension` buckets, accumulate counts. No model dependency.
class HashingEmbeddingProvider final : public EmbeddingProvider {
public:
    static constexpr std::size_t kDefaultDimension = 256;
    explicit HashingEmbeddingProvider(std::size_t dimension = kDefaultDimension);

    std::size_t dimension() const noexcept override { return dimension_; }
    std::vector<float> raw_embed(std::string_view text) override;
    std::string name() const override;

    std::size_t bucket_of(std::string_view token) const noexcept;

private:
    std::size_t dimension_;
};

/// Blank text -> EmptyQuery; provider failures -> ProviderError; wrong vector
/// length -> DimensionMismatch; zero vector -> NormalizationError.
Embedding embed(std::string_view text, EmbeddingProvider& provider);

/// dot(a,b) / sqrt(dot(a,a) * dot(b,b)), clamped to [-1, 1]. Exactly 1.0 for
/// bitwise-identical inputs. Throws DimensionMismatch.
double cosine(const Embedding& a, const Embedding& b);

}  // namespace pathrouter::cache
