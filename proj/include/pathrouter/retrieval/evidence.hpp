#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "pathrouter/core/path.hpp"
#include "pathrouter/qa/client.hpp"
#include "pathrouter/retrieval/bm25.hpp"
#include "pathrouter/retrieval/structured_query.hpp"
#include "pathrouter/retrieval/table_index.hpp"
#include "pathrouter/retrieval/table_store.hpp"

namespace pathrouter::retrieval {

struct Passage {
    std::string doc_id;
    std::string text;
    double retrieval_score = 0.0;
};

/// Passage index. Built once, read-only afterwards.
class DocIndex {
public:
    DocIndex() = default;
    /// Throws DuplicateDocId.
    static DocIndex build(const std::vector<std::pair<std::string, std::string>>& corpus, Bm25Params params = {});
    std::vector<Passage> search(std::string_view query, std::size_t k) const;
    const SparseIndex& sparse() const noexcept { return sparse_; }
    std::size_t size() const noexcept { return sparse_.size(); }
    nlohmann::json to_json() const { return sparse_.to_json(); }
    static DocIndex from_json(const nlohmann::json& j);

private:
    SparseIndex sparse_;
};

/// Line-delimited {"doc_id","text"}. Empty text is SchemaError.
std::vector<std::pair<std::string, std::string>> load_corpus(const std::filesystem::path& file);

/// k = 0 is ConfigError; an empty result is allowed.
std::vector<Passage> retrieve_docs(const DocIndex& index, std::string_view query, std::size_t k);

nlohmann::json table_to_json(const Table& table);
Table table_from_json(const nlohmann::json& j);

/// Everything retrieval needs at run time: passages, the relational store
/// and the table-metadata index. Serialized as one JSON document.
struct RetrievalIndex {
    DocIndex docs;
    TableStore store;
    TableIndex tables;

    static RetrievalIndex build(const std::filesystem::path& corpus, const std::filesystem::path& manifest,
                                const DescriptionFn& describe = {});
    nlohmann::json to_json() const;
    static RetrievalIndex from_json(const nlohmann::json& j);
    void save(const std::filesystem::path& file) const;
    static RetrievalIndex load(const std::filesystem::path& file);
};

struct RetrievalConfig {
    std::size_t doc_k = 3;
    std::size_t table_k = 1;
    std::size_t max_rows = kDefaultMaxRows;
};

/// Context for one query. Doc never carries facts, DB never carries
/// passages, LLM carries neither.
struct EvidenceBundle {
    Path path = Path::LLM;
    std::vector<Passage> passages;
    std::vector<FactRecord> facts;
    std::vector<std::string> statements;  ///< structured queries that produced `facts`
    bool degraded = false;
    std::string degraded_reason;
};

/// Doc: top doc_k passages. DB: top table_k tables, one generated query each.
/// Hybrid: both; a DB failure leaves the passages and sets `degraded`.
/// Under DB, an empty table retrieval is NoTableFound and other errors
/// propagate. `sql_client` is optional (template fallback without it).
EvidenceBundle gather_evidence(Path path, std::string_view query, const RetrievalIndex& index,
                               const RetrievalConfig& config = {}, qa::AnswerClient* sql_client = nullptr);

}  // namespace pathrouter::retrieval
