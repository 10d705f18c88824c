#include "pathrouter/cache/embedding.hpp"

#include <cmath>

#include "pathrouter/core/error.hpp"
#include "pathrouter/core/text.hpp"
#include "pathrouter/simd/dot.hpp"

namespace pathrouter::cache {

Embedding::Embedding(std::vector<float> v)
    : values_(std::move(v)), self_dot_(simd::active().dot(values_.data(), values_.data(), values_.size())) {}

Embedding Embedding::normalize(std::vector<float> raw) {
    double sq = 0.0;
    for (float x : raw) {
        if (!std::isfinite(x)) throw Error(ErrorCode::NormalizationError, "embedding has a non-finite component");
        sq += static_cast<double>(x) * x;
    }
    if (raw.empty() || sq == 0.0) throw Error(ErrorCode::NormalizationError, "cannot normalize a zero vector");
    const double inv = 1.0 / std::sqrt(sq);
    for (float& x : raw) x = static_cast<float>(x * inv);
    return Embedding(std::move(raw));
}

Embedding Embedding::from_unit(std::vector<float> unit) {
    double sq = 0.0;
    for (float x : unit) {
        if (!std::isfinite(x)) throw Error(ErrorCode::NormalizationError, "embedding has a non-finite component");
        sq += static_cast<double>(x) * x;
    }
    if (std::abs(std::sqrt(sq) - 1.0) > kNormTolerance)
        throw Error(ErrorCode::NormalizationError, "vector is not unit-norm");
    return Embedding(std::move(unit));
}

HashingEmbeddingProvider::HashingEmbeddingProvider(std::size_t dimension) : dimension_(dimension) {
    if (dimension_ == 0) throw Error(ErrorCode::ConfigError, "embedding dimension must be positive");
}

std::size_t HashingEmbeddingProvider::bucket_of(std::string_view token) const noexcept {
    return static_cast<std::size_t>(text::fnv1a64(token) % dimension_);
}

std::vector<float> HashingEmbeddingProvider::raw_embed(std::string_view text_in) {
    std::vector<float> v(dimension_, 0.0f);
    for (const auto& tok : text::tokenize(text_in)) v[bucket_of(tok)] += 1.0f;
    return v;
}

std::string HashingEmbeddingProvider::name() const { return "hashing-" + std::to_string(dimension_); }

Embedding embed(std::string_view text_in, EmbeddingProvider& provider) {
    if (text::trim(text_in).empty()) throw Error(ErrorCode::EmptyQuery, "cannot embed blank text");
    std::vector<float> raw;
    try {
        raw = provider.raw_embed(text_in);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ProviderError) throw;
        throw Error(ErrorCode::ProviderError, e.what());
    } catch (const std::exception& e) {
        throw Error(ErrorCode::ProviderError, e.what());
    }
    if (raw.size() != provider.dimension()) {
        throw Error(ErrorCode::DimensionMismatch, "provider returned " + std::to_string(raw.size()) +
                                                      " components, expected " + std::to_string(provider.dimension()));
    }
    return Embedding::normalize(std::move(raw));
}

double cosine(const Embedding& a, const Embedding& b) {
    if (a.dimension() != b.dimension()) {
        throw Error(ErrorCode::DimensionMismatch,
                    std::to_string(a.dimension()) + " vs " + std::to_string(b.dimension()));
    }
    const double d = simd::active().dot(a.values().data(), b.values().data(), a.dimension());
    const double c = d / std::sqrt(a.self_dot() * b.self_dot());
    return c > 1.0 ? 1.0 : (c < -1.0 ? -1.0 : c);
}

}  // namespace pathrouter::cache
