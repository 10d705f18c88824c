#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "pathrouter/retrieval/bm25.hpp"
#include "pathrouter/retrieval/table_store.hpp"

namespace pathrouter::retrieval {

struct TableMeta {
    std::string table_id;
    std::vector<Column> schema;
    /// Per column (schema order): up to kTopValues most frequent values,
    /// by count descending then value ascending.
    std::vector<std::pair<std::string, std::vector<std::string>>> high_freq_values;
    std::string description;

    static constexpr std::size_t kTopValues = 5;

    /// Text indexed for table retrieval: id, column names and types,
    /// frequent values, description.
    std::string metadata_text() const;
    const std::vector<std::string>* values_for(std::string_view column) const noexcept;

    nlohmann::json to_json() const;
    static TableMeta from_json(const nlohmann::json& j);
};

TableMeta describe_table(const Table& table);

/// Generates a description for tables the manifest leaves undescribed.
using DescriptionFn = std::function<std::string(const TableMeta&)>;

class TableIndex {
public:
    TableIndex() = default;
    TableIndex(std::vector<TableMeta> metas, Bm25Params params = {});

    std::vector<TableMeta> search(std::string_view query, std::size_t k) const;

    const std::vector<TableMeta>& metas() const noexcept { return metas_; }
    const SparseIndex& sparse() const noexcept { return sparse_; }

    nlohmann::json to_json() const;
    static TableIndex from_json(const nlohmann::json& j);

private:
    std::vector<TableMeta> metas_;
    SparseIndex sparse_;
};

/// Computes TableMeta per table and indexes the metadata text with BM25.
/// Tables without a description get one from `describe` when provided.
TableIndex build_table_index(const TableStore& store, const DescriptionFn& describe = {});

std::vector<TableMeta> retrieve_tables(const TableIndex& index, std::string_view query, std::size_t k);

}  // namespace pathrouter::retrieval
