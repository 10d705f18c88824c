#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pathrouter::retrieval {

enum class ColumnType { Integer, Real, Text };

std::string_view to_string(ColumnType t) noexcept;

struct Column {
    std::string name;
    ColumnType type = ColumnType::Text;

    bool operator==(const Column&) const = default;
};

/// In-memory relational table. Values keep their source spelling so fact
/// renderings reproduce the file verbatim; typed comparison happens at query
/// time.
struct Table {
    std::string id;
    std::vector<Column> columns;
    std::vector<std::vector<std::string>> rows;
    std::string description;

    std::optional<std::size_t> column_index(std::string_view name) const noexcept;
};

/// Parses delimited text with a header row (RFC 4180 quoting). Column types
/// are inferred: all-integer, all-numeric, else text. Throws HeaderlessTable
/// or SchemaError (ragged rows).
Table parse_delimited(std::string id, std::string_view contents, char delimiter = ',');

/// Immutable after load; every query path is const.
class TableStore {
public:
    TableStore() = default;

    /// Manifest: line-delimited {"table_id","path","description"?}; relative
    /// paths resolve against the manifest's directory.
    static TableStore load_manifest(const std::filesystem::path& manifest);

    void add(Table table);  ///< build-time only; throws SchemaError on id reuse

    const Table* find(std::string_view id) const noexcept;
    const std::map<std::string, Table, std::less<>>& tables() const noexcept { return tables_; }
    std::size_t size() const noexcept { return tables_.size(); }

    /// FNV-1a over a canonical dump of every table; changes iff contents change.
    std::uint64_t content_hash() const;

private:
    std::map<std::string, Table, std::less<>> tables_;
};

}  // namespace pathrouter::retrieval
