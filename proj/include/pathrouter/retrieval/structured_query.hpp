#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pathrouter/qa/client.hpp"
#include "pathrouter/retrieval/table_index.hpp"
#include "pathrouter/retrieval/table_store.hpp"

namespace pathrouter::retrieval {

// Structured-query dialect: one read-only single-table statement
//
//   SELECT * | col [, col]* FROM table
//     [WHERE col op literal [AND col op literal]*] [LIMIT n] [;]
//
// with op in { =, !=, <>, <, <=, >, >= }. Anything else, including comments,
// a second statement or any write/DDL keyword, is UnsafeStatement.

enum class CompareOp { Eq, Ne, Lt, Le, Gt, Ge };

struct Literal {
    std::string text;
    bool is_number = false;
};

struct Predicate {
    std::string column;
    CompareOp op = CompareOp::Eq;
    Literal value;
};

struct SelectStatement {
    std::string table;
    std::vector<std::string> projection;  ///< empty means *
    std::vector<Predicate> where;
    std::optional<std::size_t> limit;
};

inline constexpr std::size_t kDefaultMaxRows = 50;

/// Throws Error(UnsafeStatement) for anything outside the dialect.
SelectStatement parse_select(std::string_view sql);

/// Canonical text; parse_select(to_sql(s)) reproduces s.
std::string to_sql(const SelectStatement& stmt);

/// Throws UnknownTable / UnknownColumn.
void check_columns(const SelectStatement& stmt, const std::vector<Column>& schema, std::string_view table_id);

/// Builds one statement for the question against `table`.
/// With a client: prompts it with schema + frequent values + question,
/// strips code fences and validates the reply. Without: filters on every
/// column whose frequent value appears verbatim (as tokens) in the question,
/// else selects all rows; both capped by `row_limit`.
std::string generate_structured_query(std::string_view question, const TableMeta& table,
                                      qa::AnswerClient* client = nullptr, std::size_t row_limit = kDefaultMaxRows);

struct FactRecord {
    std::string table_id;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    std::size_t matched_rows = 0;  ///< before the row cap
    bool truncated = false;
    std::string rendered;
};

/// Header line "c1 | c2", then one pipe-delimited line per row; "(no rows)"
/// when empty and a truncation marker when the row cap cut the result.
std::string render_facts(const std::vector<std::string>& columns, const std::vector<std::vector<std::string>>& rows,
                         bool truncated = false, std::size_t matched_rows = 0);

/// Parses, validates and runs `sql` against the store. The store is only
/// read. Throws UnsafeStatement, UnknownTable, UnknownColumn, ExecutionError.
FactRecord execute_structured_query(std::string_view sql, const TableStore& store,
                                    std::size_t max_rows = kDefaultMaxRows);
FactRecord execute_structured_query(const SelectStatement& stmt, const TableStore& store,
                                    std::size_t max_rows = kDefaultMaxRows);

}  // namespace pathrouter::retrieval
