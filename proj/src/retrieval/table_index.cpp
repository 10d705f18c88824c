#include "pathrouter/retrieval/table_index.hpp"

#include <algorithm>
#include <map>

#include "pathrouter/core/error.hpp"

namespace pathrouter::retrieval {

std::string TableMeta::metadata_text() const {
    std::string out = table_id;
    for (const auto& c : schema) out += " " + c.name + " " + std::string(to_string(c.type));
    for (const auto& [column, values] : high_freq_values)
        for (const auto& v : values) out += " " + v;
    if (!description.empty()) out += " " + description;
    return out;
}

const std::vector<std::string>* TableMeta::values_for(std::string_view column) const noexcept {
    for (const auto& [c, v] : high_freq_values)
        if (c == column) return &v;
    return nullptr;
}

nlohmann::json TableMeta::to_json() const {
    nlohmann::json schema_json = nlohmann::json::array();
    for (const auto& c : schema) schema_json.push_back({{"name", c.name}, {"type", std::string(to_string(c.type))}});
    nlohmann::json hf = nlohmann::json::array();
    for (const auto& [c, v] : high_freq_values) hf.push_back({{"column", c}, {"values", v}});
    return {{"table_id", table_id}, {"schema", schema_json}, {"high_freq_values", hf}, {"description", description}};
}

TableMeta TableMeta::from_json(const nlohmann::json& j) {
    TableMeta m;
    m.table_id = j.at("table_id").get<std::string>();
    for (const auto& c : j.at("schema")) {
        const auto t = c.at("type").get<std::string>();
        m.schema.push_back({c.at("name").get<std::string>(),
                            t == "integer" ? ColumnType::Integer : (t == "real" ? ColumnType::Real : ColumnType::Text)});
    }
    for (const auto& h : j.at("high_freq_values"))
        m.high_freq_values.emplace_back(h.at("column").get<std::string>(), h.at("values").get<std::vector<std::string>>());
    m.description = j.value("description", std::string());
    return m;
}

TableMeta describe_table(const Table& table) {
    if (table.columns.empty()) throw Error(ErrorCode::HeaderlessTable, "table '" + table.id + "' has no columns");
    TableMeta m;
    m.table_id = table.id;
    m.schema = table.columns;
    m.description = table.description;
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        std::map<std::string, std::size_t> counts;
        for (const auto& row : table.rows)
            if (!row[c].empty()) ++counts[row[c]];
        std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
        std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
        std::vector<std::string> top;
        for (std::size_t i = 0; i < ranked.size() && i < TableMeta::kTopValues; ++i) top.push_back(ranked[i].first);
        m.high_freq_values.emplace_back(table.columns[c].name, std::move(top));
    }
    return m;
}

TableIndex::TableIndex(std::vector<TableMeta> metas, Bm25Params params) : metas_(std::move(metas)) {
    std::vector<std::pair<std::string, std::string>> docs;
    for (const auto& m : metas_) docs.emplace_back(m.table_id, m.metadata_text());
    sparse_ = SparseIndex::build(docs, params);
}

std::vector<TableMeta> TableIndex::search(std::string_view query, std::size_t k) const {
    std::vector<TableMeta> out;
    for (const auto& hit : sparse_.search(query, k)) out.push_back(metas_[hit.doc]);
    return out;
}

nlohmann::json TableIndex::to_json() const {
    nlohmann::json metas = nlohmann::json::array();
    for (const auto& m : metas_) metas.push_back(m.to_json());
    return {{"tables", metas}, {"k1", sparse_.params().k1}, {"b", sparse_.params().b}};
}

TableIndex TableIndex::from_json(const nlohmann::json& j) {
    try {
        std::vector<TableMeta> metas;
        for (const auto& m : j.at("tables")) metas.push_back(TableMeta::from_json(m));
        return TableIndex(std::move(metas), Bm25Params{j.value("k1", 1.2), j.value("b", 0.75)});
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::SchemaError, std::string("table index: ") + e.what());
    }
}

TableIndex build_table_index(const TableStore& store, const DescriptionFn& describe) {
    std::vector<TableMeta> metas;
    for (const auto& [id, table] : store.tables()) {
        TableMeta m = describe_table(table);
        if (m.description.empty() && describe) m.description = describe(m);
        metas.push_back(std::move(m));
    }
    return TableIndex(std::move(metas));
}

std::vector<TableMeta> retrieve_tables(const TableIndex& index, std::string_view query, std::size_t k) {
    return index.search(query, k);
}

}  // namespace pathrouter::retrieval
