#include "pathrouter/retrieval/table_store.hpp"

#include <charconv>
#include <cstdlib>

#include "pathrouter/core/error.hpp"
#include "pathrouter/core/jsonl.hpp"
#include "pathrouter/core/text.hpp"

namespace pathrouter::retrieval {

std::string_view to_string(ColumnType t) noexcept {
    switch (t) {
        case ColumnType::Integer: return "integer";
        case ColumnType::Real: return "real";
        case ColumnType::Text: return "text";
    }
    return "?";
}

std::optional<std::size_t> Table::column_index(std::string_view name) const noexcept {
    const auto lowered = text::to_lower(name);
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (text::to_lower(columns[i].name) == lowered) return i;
    return std::nullopt;
}

namespace {

std::vector<std::vector<std::string>> split_records(std::string_view s, char delim) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool row_has_content = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < s.size() && s[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
            continue;
        }
        if (c == '"') {
            quoted = true;
            row_has_content = true;
        } else if (c == delim) {
            row.push_back(std::move(field));
            field.clear();
            row_has_content = true;
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < s.size() && s[i + 1] == '\n') ++i;
            if (row_has_content || !field.empty()) {
                row.push_back(std::move(field));
                records.push_back(std::move(row));
            }
            row.clear();
            field.clear();
            row_has_content = false;
        } else {
            field.push_back(c);
            row_has_content = true;
        }
    }
    if (quoted) throw Error(ErrorCode::SchemaError, "unterminated quoted field");
    if (row_has_content || !field.empty()) {
        row.push_back(std::move(field));
        records.push_back(std::move(row));
    }
    return records;
}

bool is_integer(std::string_view v) {
    v = text::trim(v);
    if (v.empty()) return false;
    long long out = 0;
    const auto* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data() + (v.front() == '+' ? 1 : 0), end, out);
    return ec == std::errc() && ptr == end;
}

bool is_real(std::string_view v) {
    const std::string s(text::trim(v));
    if (s.empty()) return false;
    char* end = nullptr;
    std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size();
}

}  // namespace

Table parse_delimited(std::string id, std::string_view contents, char delimiter) {
    auto records = split_records(contents, delimiter);
    if (records.empty()) throw Error(ErrorCode::HeaderlessTable, "table '" + id + "' has no header row");
    Table t;
    t.id = std::move(id);
    for (auto& name : records.front()) {
        const auto trimmed = std::string(text::trim(name));
        if (trimmed.empty()) throw Error(ErrorCode::HeaderlessTable, "table '" + t.id + "' has an empty column name");
        t.columns.push_back({trimmed, ColumnType::Text});
    }
    for (std::size_t r = 1; r < records.size(); ++r) {
        if (records[r].size() != t.columns.size()) {
            throw Error(ErrorCode::SchemaError, "table '" + t.id + "' row " + std::to_string(r) + " has " +
                                                    std::to_string(records[r].size()) + " fields, header has " +
                                                    std::to_string(t.columns.size()));
        }
        t.rows.push_back(std::move(records[r]));
    }
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
        bool all_int = !t.rows.empty();
        bool all_real = !t.rows.empty();
        for (const auto& row : t.rows) {
            all_int = all_int && is_integer(row[c]);
            all_real = all_real && is_real(row[c]);
        }
        t.columns[c].type = all_int ? ColumnType::Integer : (all_real ? ColumnType::Real : ColumnType::Text);
    }
    return t;
}

TableStore TableStore::load_manifest(const std::filesystem::path& manifest) {
    TableStore store;
    const auto base = manifest.parent_path();
    jsonl::for_each(manifest, [&](const nlohmann::json& rec, std::size_t line) {
        if (!rec.contains("table_id") || !rec.contains("path"))
            throw Error(ErrorCode::SchemaError, "manifest line " + std::to_string(line) + ": needs table_id and path");
        std::filesystem::path file = rec.at("path").get<std::string>();
        if (file.is_relative()) file = base / file;
        const auto delim = rec.value("delimiter", std::string(","));
        Table t = parse_delimited(rec.at("table_id").get<std::string>(), jsonl::read_file(file),
                                  delim.empty() ? ',' : delim.front());
        t.description = rec.value("description", std::string());
        store.add(std::move(t));
    });
    return store;
}

void TableStore::add(Table table) {
    if (table.columns.empty()) throw Error(ErrorCode::HeaderlessTable, "table '" + table.id + "' has no columns");
    const auto id = table.id;
    if (!tables_.emplace(id, std::move(table)).second)
        throw Error(ErrorCode::SchemaError, "table id '" + id + "' repeats");
}

const Table* TableStore::find(std::string_view id) const noexcept {
    const auto it = tables_.find(id);
    return it == tables_.end() ? nullptr : &it->second;
}

std::uint64_t TableStore::content_hash() const {
    std::string canon;
    for (const auto& [id, t] : tables_) {
        canon += "T\x1f" + id + "\x1f" + t.description + "\n";
        for (const auto& c : t.columns) canon += c.name + "\x1f" + std::string(to_string(c.type)) + "\x1e";
        canon += "\n";
        for (const auto& row : t.rows) {
            for (const auto& v : row) canon += v + "\x1f";
            canon += "\n";
        }
    }
    return text::fnv1a64(canon);
}

}  // namespace pathrouter::retrieval
