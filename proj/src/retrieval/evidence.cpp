#include "pathrouter/retrieval/evidence.hpp"

#include "pathrouter/core/error.hpp"
#include "pathrouter/core/jsonl.hpp"
#include "pathrouter/core/log.hpp"
#include "pathrouter/core/text.hpp"

namespace pathrouter::retrieval {

DocIndex DocIndex::build(const std::vector<std::pair<std::string, std::string>>& corpus, Bm25Params params) {
    DocIndex out;
    out.sparse_ = SparseIndex::build(corpus, params);
    return out;
}

std::vector<Passage> DocIndex::search(std::string_view query, std::size_t k) const {
    std::vector<Passage> out;
    for (const auto& hit : sparse_.search(query, k))
        out.push_back({sparse_.id(hit.doc), sparse_.text(hit.doc), hit.score});
    return out;
}

DocIndex DocIndex::from_json(const nlohmann::json& j) {
    DocIndex out;
    out.sparse_ = SparseIndex::from_json(j);
    return out;
}

std::vector<std::pair<std::string, std::string>> load_corpus(const std::filesystem::path& file) {
    std::vector<std::pair<std::string, std::string>> docs;
    jsonl::for_each(file, [&](const nlohmann::json& rec, std::size_t line) {
        if (!rec.is_object() || !rec.contains("doc_id") || !rec.contains("text") || !rec.at("doc_id").is_string() ||
            !rec.at("text").is_string())
            throw Error(ErrorCode::SchemaError, "corpus line " + std::to_string(line) + ": needs string doc_id and text");
        auto body = rec.at("text").get<std::string>();
        if (text::trim(body).empty())
            throw Error(ErrorCode::SchemaError, "corpus line " + std::to_string(line) + ": empty text");
        docs.emplace_back(rec.at("doc_id").get<std::string>(), std::move(body));
    });
    return docs;
}

std::vector<Passage> retrieve_docs(const DocIndex& index, std::string_view query, std::size_t k) {
    if (k == 0) throw Error(ErrorCode::ConfigError, "passage k must be at least 1");
    return index.search(query, k);
}

nlohmann::json table_to_json(const Table& t) {
    nlohmann::json cols = nlohmann::json::array();
    for (const auto& c : t.columns) cols.push_back({{"name", c.name}, {"type", std::string(to_string(c.type))}});
    return {{"table_id", t.id}, {"columns", cols}, {"rows", t.rows}, {"description", t.description}};
}

Table table_from_json(const nlohmann::json& j) {
    try {
        Table t;
        t.id = j.at("table_id").get<std::string>();
        for (const auto& c : j.at("columns")) {
            const auto type = c.at("type").get<std::string>();
            ColumnType ct = ColumnType::Text;
            if (type == "integer") ct = ColumnType::Integer;
            else if (type == "real") ct = ColumnType::Real;
            else if (type != "text") throw Error(ErrorCode::SchemaError, "unknown column type '" + type + "'");
            t.columns.push_back({c.at("name").get<std::string>(), ct});
        }
        t.rows = j.at("rows").get<std::vector<std::vector<std::string>>>();
        t.description = j.value("description", std::string());
        for (const auto& r : t.rows)
            if (r.size() != t.columns.size()) throw Error(ErrorCode::SchemaError, "ragged row in table '" + t.id + "'");
        return t;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::SchemaError, std::string("table record: ") + e.what());
    }
}

RetrievalIndex RetrievalIndex::build(const std::filesystem::path& corpus, const std::filesystem::path& manifest,
                                     const DescriptionFn& describe) {
    RetrievalIndex out;
    out.docs = DocIndex::build(load_corpus(corpus));
    out.store = TableStore::load_manifest(manifest);
    out.tables = build_table_index(out.store, describe);
    return out;
}

nlohmann::json RetrievalIndex::to_json() const {
    nlohmann::json tables = nlohmann::json::array();
    for (const auto& [id, t] : store.tables()) tables.push_back(table_to_json(t));
    return {{"format", "pathrouter-index"},
            {"version", 1},
            {"docs", docs.to_json()},
            {"store", tables},
            {"table_index", this->tables.to_json()}};
}

RetrievalIndex RetrievalIndex::from_json(const nlohmann::json& j) {
    if (j.value("format", std::string()) != "pathrouter-index" || j.value("version", 0) != 1)
        throw Error(ErrorCode::SchemaError, "not a version 1 index file");
    RetrievalIndex out;
    try {
        out.docs = DocIndex::from_json(j.at("docs"));
        for (const auto& t : j.at("store")) out.store.add(table_from_json(t));
        out.tables = TableIndex::from_json(j.at("table_index"));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::SchemaError, std::string("index file: ") + e.what());
    }
    return out;
}

void RetrievalIndex::save(const std::filesystem::path& file) const { jsonl::write_file(file, to_json().dump() + "\n"); }

RetrievalIndex RetrievalIndex::load(const std::filesystem::path& file) {
    const auto body = jsonl::read_file(file);
    try {
        return from_json(nlohmann::json::parse(body));
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::SchemaError, file.string() + ": " + e.what());
    }
}

namespace {

void add_facts(EvidenceBundle& b, std::string_view query, const RetrievalIndex& index, const RetrievalConfig& cfg,
               qa::AnswerClient* client) {
    const auto tables = retrieve_tables(index.tables, query, cfg.table_k);
    if (tables.empty()) throw Error(ErrorCode::NoTableFound, "no table matches the query");
    for (const auto& meta : tables) {
        auto sql = generate_structured_query(query, meta, client, cfg.max_rows);
        b.facts.push_back(execute_structured_query(sql, index.store, cfg.max_rows));
        b.statements.push_back(std::move(sql));
    }
}

}  // namespace

EvidenceBundle gather_evidence(Path path, std::string_view query, const RetrievalIndex& index,
                               const RetrievalConfig& cfg, qa::AnswerClient* sql_client) {
    if (cfg.doc_k == 0 || cfg.table_k == 0) throw Error(ErrorCode::ConfigError, "retrieval k must be at least 1");
    EvidenceBundle b;
    b.path = path;
    switch (path) {
        case Path::LLM:
            break;
        case Path::Doc:
            b.passages = retrieve_docs(index.docs, query, cfg.doc_k);
            break;
        case Path::DB:
            add_facts(b, query, index, cfg, sql_client);
            break;
        case Path::Hybrid:
            b.passages = retrieve_docs(index.docs, query, cfg.doc_k);
            try {
                add_facts(b, query, index, cfg, sql_client);
            } catch (const Error& e) {
                b.facts.clear();
                b.statements.clear();
                b.degraded = true;
                b.degraded_reason = e.what();
                log::debug("hybrid evidence without facts: " + b.degraded_reason);
            }
            break;
    }
    return b;
}

}  // namespace pathrouter::retrieval
