#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace pathrouter::retrieval {

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

struct ScoredDoc {
    std::size_t doc = 0;  ///< position in the index
    double score = 0.0;
};

/// Inverted index with Okapi BM25 scoring:
///   idf(t)  = ln(1 + (N - df + 0.5) / (df + 0.5))
///   w(t, d) = idf(t) * tf * (k1 + 1) / (tf + k1 * (1 - b + b * |d| / avgdl))
/// summed over the distinct query terms. Documents without any query term
/// are never returned. Ties are broken by doc id (ascending).
class SparseIndex {
public:
    SparseIndex() = default;

    /// Throws DuplicateDocId on repeated ids.
    static SparseIndex build(const std::vector<std::pair<std::string, std::string>>& docs, Bm25Params params = {});

    std::vector<ScoredDoc> search(std::string_view query, std::size_t k) const;

    std::size_t size() const noexcept { return ids_.size(); }
    const std::string& id(std::size_t doc) const { return ids_.at(doc); }
    const std::string& text(std::size_t doc) const { return texts_.at(doc); }
    std::uint32_t length(std::size_t doc) const { return lengths_.at(doc); }
    double average_length() const noexcept { return avg_length_; }
    std::size_t document_frequency(const std::string& term) const noexcept;
    /// Documents holding at least one posting.
    std::size_t postings_bearing_documents() const noexcept;
    const Bm25Params& params() const noexcept { return params_; }

    nlohmann::json to_json() const;
    static SparseIndex from_json(const nlohmann::json& j);

private:
    struct Posting {
        std::uint32_t doc;
        std::uint32_t tf;
    };
    void finalize();

    Bm25Params params_;
    std::vector<std::string> ids_;
    std::vector<std::string> texts_;
    std::vector<std::uint32_t> lengths_;
    std::unordered_map<std::string, std::vector<Posting>> postings_;
    double avg_length_ = 0.0;
};

}  // namespace pathrouter::retrieval
