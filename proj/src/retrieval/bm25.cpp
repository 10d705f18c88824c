#include "pathrouter/retrieval/bm25.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "pathrouter/core/error.hpp"
#include "pathrouter/core/text.hpp"

namespace pathrouter::retrieval {

SparseIndex SparseIndex::build(const std::vector<std::pair<std::string, std::string>>& docs, Bm25Params params) {
    SparseIndex idx;
    idx.params_ = params;
    std::set<std::string, std::less<>> seen;
    for (const auto& [id, body] : docs) {
        if (!seen.insert(id).second) throw Error(ErrorCode::DuplicateDocId, "document id '" + id + "' repeats");
        const auto doc = static_cast<std::uint32_t>(idx.ids_.size());
        const auto tokens = text::tokenize(body);
        std::map<std::string, std::uint32_t> tf;
        for (const auto& t : tokens) ++tf[t];
        for (const auto& [term, count] : tf) idx.postings_[term].push_back({doc, count});
        idx.ids_.push_back(id);
        idx.texts_.push_back(body);
        idx.lengths_.push_back(static_cast<std::uint32_t>(tokens.size()));
    }
    idx.finalize();
    return idx;
}

void SparseIndex::finalize() {
    double total = 0.0;
    for (auto l : lengths_) total += l;
    avg_length_ = lengths_.empty() ? 0.0 : total / static_cast<double>(lengths_.size());
}

std::size_t SparseIndex::document_frequency(const std::string& term) const noexcept {
    const auto it = postings_.find(term);
    return it == postings_.end() ? 0 : it->second.size();
}

std::size_t SparseIndex::postings_bearing_documents() const noexcept {
    return static_cast<std::size_t>(std::count_if(lengths_.begin(), lengths_.end(), [](auto l) { return l > 0; }));
}

std::vector<ScoredDoc> SparseIndex::search(std::string_view query, std::size_t k) const {
    if (k == 0) throw Error(ErrorCode::ConfigError, "k must be at least 1");
    std::vector<ScoredDoc> out;
    if (ids_.empty()) return out;

    auto tokens = text::tokenize(query);
    std::sort(tokens.begin(), tokens.end());
    tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());

    const double n = static_cast<double>(ids_.size());
    std::vector<double> acc(ids_.size(), 0.0);
    std::vector<bool> touched(ids_.size(), false);
    for (const auto& term : tokens) {
        const auto it = postings_.find(term);
        if (it == postings_.end()) continue;
        const double df = static_cast<double>(it->second.size());
        const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
        for (const auto& p : it->second) {
            const double tf = p.tf;
            const double norm = params_.k1 * (1.0 - params_.b + params_.b * lengths_[p.doc] / avg_length_);
            acc[p.doc] += idf * tf * (params_.k1 + 1.0) / (tf + norm);
            touched[p.doc] = true;
        }
    }
    for (std::size_t d = 0; d < acc.size(); ++d)
        if (touched[d]) out.push_back({d, acc[d]});

    auto better = [this](const ScoredDoc& a, const ScoredDoc& b) {
        if (a.score != b.score) return a.score > b.score;
        return ids_[a.doc] < ids_[b.doc];
    };
    if (out.size() > k) {
        std::partial_sort(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(k), out.end(), better);
        out.resize(k);
    } else {
        std::sort(out.begin(), out.end(), better);
    }
    return out;
}

nlohmann::json SparseIndex::to_json() const {
    nlohmann::json docs = nlohmann::json::array();
    for (std::size_t i = 0; i < ids_.size(); ++i) docs.push_back({{"id", ids_[i]}, {"text", texts_[i]}});
    // Postings are derived from the texts; the lengths and document
    // frequencies are stored so a loaded index can be checked against them.
    nlohmann::json df = nlohmann::json::object();
    std::map<std::string, std::size_t> ordered;
    for (const auto& [term, list] : postings_) ordered.emplace(term, list.size());
    for (const auto& [term, count] : ordered) df[term] = count;
    return {{"k1", params_.k1}, {"b", params_.b}, {"documents", docs}, {"lengths", lengths_}, {"df", df}};
}

SparseIndex SparseIndex::from_json(const nlohmann::json& j) {
    try {
        Bm25Params params{j.at("k1").get<double>(), j.at("b").get<double>()};
        std::vector<std::pair<std::string, std::string>> docs;
        for (const auto& d : j.at("documents")) docs.emplace_back(d.at("id").get<std::string>(), d.at("text").get<std::string>());
        SparseIndex idx = build(docs, params);
        if (j.contains("lengths") && j.at("lengths").get<std::vector<std::uint32_t>>() != idx.lengths_)
            throw Error(ErrorCode::SchemaError, "stored document lengths do not match the texts");
        if (j.contains("df")) {
            for (const auto& [term, count] : j.at("df").items()) {
                if (idx.document_frequency(term) != count.get<std::size_t>())
                    throw Error(ErrorCode::SchemaError, "stored document frequency differs for '" + term + "'");
            }
        }
        return idx;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::SchemaError, std::string("index file: ") + e.what());
    }
}

}  // namespace pathrouter::retrieval
