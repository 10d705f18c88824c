#include "pathrouter/retrieval/structured_query.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <set>

#include "pathrouter/core/error.hpp"
#include "pathrouter/core/text.hpp"

namespace pathrouter::retrieval {

namespace {

enum class TokKind { Ident, Number, String, Symbol, End };

struct Tok {
    TokKind kind;
    std::string text;
};

const std::set<std::string, std::less<>>& forbidden_words() {
    static const std::set<std::string, std::less<>> words{
        "insert", "update",   "delete", "drop",   "alter",  "create",   "replace", "truncate", "attach",
        "detach", "pragma",   "grant",  "revoke", "merge",  "upsert",   "vacuum",  "reindex",  "exec",
        "execute", "call",    "into",   "set",    "begin",  "commit",   "rollback", "savepoint", "load",
        "copy",   "rename",   "analyze", "lock",  "unlock", "handler",  "do",      "union",    "join"};
    return words;
}

[[noreturn]] void unsafe(const std::string& why) { throw Error(ErrorCode::UnsafeStatement, why); }

std::vector<Tok> lex(std::string_view s) {
    std::vector<Tok> out;
    std::size_t i = 0;
    while (i < s.size()) {
        const char c = s[i];
        const auto uc = static_cast<unsigned char>(c);
        if (std::isspace(uc)) {
            ++i;
        } else if (c == '-' && i + 1 < s.size() && s[i + 1] == '-') {
            unsafe("comments are not allowed");
        } else if (c == '/' && i + 1 < s.size() && s[i + 1] == '*') {
            unsafe("comments are not allowed");
        } else if (c == '#') {
            unsafe("comments are not allowed");
        } else if (std::isalpha(uc) || c == '_') {
            std::string word;
            while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_')) word.push_back(s[i++]);
            out.push_back({TokKind::Ident, word});
        } else if (c == '"' || c == '`') {
            const char close = c;
            std::string word;
            ++i;
            while (i < s.size() && s[i] != close) word.push_back(s[i++]);
            if (i >= s.size()) unsafe("unterminated quoted identifier");
            ++i;
            if (word.empty()) unsafe("empty quoted identifier");
            out.push_back({TokKind::Ident, word});
        } else if (std::isdigit(uc) || ((c == '-' || c == '.') && i + 1 < s.size() &&
                                         std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
            std::string num(1, c);
            ++i;
            while (i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '.')) num.push_back(s[i++]);
            char* end = nullptr;
            std::strtod(num.c_str(), &end);
            if (end != num.c_str() + num.size()) unsafe("malformed number '" + num + "'");
            if (i < s.size() && (std::isalpha(static_cast<unsigned char>(s[i])) || s[i] == '_'))
                unsafe("malformed number '" + num + "'");
            out.push_back({TokKind::Number, num});
        } else if (c == '\'') {
            std::string lit;
            ++i;
            bool closed = false;
            while (i < s.size()) {
                if (s[i] == '\'') {
                    if (i + 1 < s.size() && s[i + 1] == '\'') {
                        lit.push_back('\'');
                        i += 2;
                        continue;
                    }
                    ++i;
                    closed = true;
                    break;
                }
                lit.push_back(s[i++]);
            }
            if (!closed) unsafe("unterminated string literal");
            out.push_back({TokKind::String, lit});
        } else {
            static constexpr std::string_view two[] = {"!=", "<>", "<=", ">="};
            bool matched = false;
            for (auto op : two) {
                if (s.substr(i, 2) == op) {
                    out.push_back({TokKind::Symbol, std::string(op)});
                    i += 2;
                    matched = true;
                    break;
                }
            }
            if (matched) continue;
            if (std::string_view("*,;=<>").find(c) == std::string_view::npos)
                unsafe(std::string("unexpected character '") + c + "'");
            out.push_back({TokKind::Symbol, std::string(1, c)});
            ++i;
        }
    }
    out.push_back({TokKind::End, ""});
    return out;
}

class Parser {
public:
    explicit Parser(std::vector<Tok> toks) : toks_(std::move(toks)) {}

    SelectStatement parse() {
        SelectStatement st;
        expect_keyword("select");
        if (peek_symbol("*")) {
            ++pos_;
        } else {
            st.projection.push_back(ident("column"));
            while (peek_symbol(",")) {
                ++pos_;
                st.projection.push_back(ident("column"));
            }
        }
        expect_keyword("from");
        st.table = ident("table");
        if (peek_keyword("where")) {
            ++pos_;
            st.where.push_back(predicate());
            while (peek_keyword("and")) {
                ++pos_;
                st.where.push_back(predicate());
            }
        }
        if (peek_keyword("limit")) {
            ++pos_;
            const Tok& t = next();
            if (t.kind != TokKind::Number || t.text.find_first_not_of("0123456789") != std::string::npos)
                unsafe("LIMIT needs a non-negative integer");
            st.limit = static_cast<std::size_t>(std::stoull(t.text));
        }
        if (peek_symbol(";")) ++pos_;
        if (toks_[pos_].kind != TokKind::End) unsafe("only a single statement is allowed");
        return st;
    }

private:
    const Tok& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
    bool peek_symbol(std::string_view s) const { return toks_[pos_].kind == TokKind::Symbol && toks_[pos_].text == s; }
    bool peek_keyword(std::string_view k) const {
        return toks_[pos_].kind == TokKind::Ident && text::to_lower(toks_[pos_].text) == k;
    }
    void expect_keyword(std::string_view k) {
        if (!peek_keyword(k)) unsafe("expected " + text::to_lower(std::string(k)) + " near '" + toks_[pos_].text + "'");
        ++pos_;
    }
    std::string ident(std::string_view what) {
        const Tok& t = next();
        if (t.kind != TokKind::Ident) unsafe("expected " + std::string(what) + " name near '" + t.text + "'");
        static const std::set<std::string, std::less<>> reserved{"select", "from", "where", "and", "or", "limit", "not"};
        if (reserved.contains(text::to_lower(t.text))) unsafe("reserved word used as " + std::string(what));
        return t.text;
    }
    Predicate predicate() {
        Predicate p;
        p.column = ident("column");
        const Tok& op = next();
        if (op.kind != TokKind::Symbol) unsafe("expected comparison operator");
        if (op.text == "=") p.op = CompareOp::Eq;
        else if (op.text == "!=" || op.text == "<>") p.op = CompareOp::Ne;
        else if (op.text == "<") p.op = CompareOp::Lt;
        else if (op.text == "<=") p.op = CompareOp::Le;
        else if (op.text == ">") p.op = CompareOp::Gt;
        else if (op.text == ">=") p.op = CompareOp::Ge;
        else unsafe("unsupported operator '" + op.text + "'");
        const Tok& v = next();
        if (v.kind == TokKind::Number) p.value = {v.text, true};
        else if (v.kind == TokKind::String) p.value = {v.text, false};
        else unsafe("expected a literal value");
        return p;
    }

    std::vector<Tok> toks_;
    std::size_t pos_ = 0;
};

std::string_view op_text(CompareOp op) {
    switch (op) {
        case CompareOp::Eq: return "=";
        case CompareOp::Ne: return "!=";
        case CompareOp::Lt: return "<";
        case CompareOp::Le: return "<=";
        case CompareOp::Gt: return ">";
        case CompareOp::Ge: return ">=";
    }
    return "=";
}

std::string quote_ident(const std::string& name) {
    const bool plain = !name.empty() && (std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_') &&
                       std::all_of(name.begin(), name.end(),
                                   [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
    return plain ? name : "\"" + name + "\"";
}

std::string quote_literal(const Literal& l) {
    if (l.is_number) return l.text;
    std::string out = "'";
    for (char c : l.text) {
        if (c == '\'') out.push_back('\'');
        out.push_back(c);
    }
    return out + "'";
}

std::optional<double> as_number(std::string_view v) {
    const std::string s(text::trim(v));
    if (s.empty()) return std::nullopt;
    char* end = nullptr;
    const double d = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) return std::nullopt;
    return d;
}

template <typename T>
bool compare(const T& a, CompareOp op, const T& b) {
    switch (op) {
        case CompareOp::Eq: return a == b;
        case CompareOp::Ne: return !(a == b);
        case CompareOp::Lt: return a < b;
        case CompareOp::Le: return a < b || a == b;
        case CompareOp::Gt: return b < a;
        case CompareOp::Ge: return b < a || a == b;
    }
    return false;
}

bool matches(const std::string& cell, ColumnType type, const Predicate& p) {
    if (type != ColumnType::Text) {
        const auto lhs = as_number(cell);
        const auto rhs = as_number(p.value.text);
        if (lhs && rhs) return compare(*lhs, p.op, *rhs);
    }
    return compare(text::to_lower(cell), p.op, text::to_lower(p.value.text));
}

std::string strip_fences(std::string_view reply) {
    std::string s(text::trim(reply));
    if (s.rfind("```", 0) == 0) {
        const auto nl = s.find('\n');
        s = nl == std::string::npos ? std::string() : s.substr(nl + 1);
        const auto close = s.rfind("```");
        if (close != std::string::npos) s = s.substr(0, close);
    }
    return std::string(text::trim(s));
}

}  // namespace

SelectStatement parse_select(std::string_view sql) {
    const auto trimmed = text::trim(sql);
    if (trimmed.empty()) unsafe("empty statement");
    auto toks = lex(trimmed);
    for (const auto& t : toks) {
        if (t.kind == TokKind::Ident && forbidden_words().contains(text::to_lower(t.text)))
            unsafe("statement contains forbidden keyword '" + t.text + "'");
    }
    return Parser(std::move(toks)).parse();
}

std::string to_sql(const SelectStatement& st) {
    std::string out = "SELECT ";
    if (st.projection.empty()) {
        out += "*";
    } else {
        for (std::size_t i = 0; i < st.projection.size(); ++i) {
            if (i) out += ", ";
            out += quote_ident(st.projection[i]);
        }
    }
    out += " FROM " + quote_ident(st.table);
    for (std::size_t i = 0; i < st.where.size(); ++i) {
        out += i ? " AND " : " WHERE ";
        out += quote_ident(st.where[i].column) + " " + std::string(op_text(st.where[i].op)) + " " +
               quote_literal(st.where[i].value);
    }
    if (st.limit) out += " LIMIT " + std::to_string(*st.limit);
    return out;
}

void check_columns(const SelectStatement& st, const std::vector<Column>& schema, std::string_view table_id) {
    if (text::to_lower(st.table) != text::to_lower(table_id))
        throw Error(ErrorCode::UnknownTable, "statement targets '" + st.table + "', expected '" + std::string(table_id) + "'");
    auto known = [&](const std::string& name) {
        const auto lowered = text::to_lower(name);
        return std::any_of(schema.begin(), schema.end(), [&](const Column& c) { return text::to_lower(c.name) == lowered; });
    };
    for (const auto& c : st.projection)
        if (!known(c)) throw Error(ErrorCode::UnknownColumn, "column '" + c + "' is not in " + std::string(table_id));
    for (const auto& p : st.where)
        if (!known(p.column)) throw Error(ErrorCode::UnknownColumn, "column '" + p.column + "' is not in " + std::string(table_id));
}

std::string generate_structured_query(std::string_view question, const TableMeta& table, qa::AnswerClient* client,
                                      std::size_t row_limit) {
    if (table.schema.empty()) throw Error(ErrorCode::HeaderlessTable, "table '" + table.table_id + "' has no columns");

    if (client != nullptr) {
        qa::Prompt prompt;
        prompt.path = Path::DB;
        prompt.system_text =
            "Write one read-only SQL SELECT statement over a single table. Use only the listed columns. "
            "Reply with the statement only.";
        std::string user = "Table: " + table.table_id + "\nColumns:";
        for (const auto& c : table.schema) user += " " + c.name + " (" + std::string(to_string(c.type)) + ")";
        user += "\nFrequent values:";
        for (const auto& [col, values] : table.high_freq_values) {
            user += "\n  " + col + ":";
            for (const auto& v : values) user += " " + v + ";";
        }
        user += "\nQuestion: " + std::string(question);
        prompt.user_text = std::move(user);
        prompt.token_count = qa::count_tokens(prompt.system_text) + qa::count_tokens(prompt.user_text);
        const auto reply = qa::answer(prompt, *client);
        SelectStatement st = parse_select(strip_fences(reply.answer_text));
        check_columns(st, table.schema, table.table_id);
        if (!st.limit || *st.limit > row_limit) st.limit = row_limit;
        return to_sql(st);
    }

    SelectStatement st;
    st.table = table.table_id;
    const auto q_tokens = text::tokenize(question);
    for (const auto& col : table.schema) {
        const auto* values = table.values_for(col.name);
        if (!values) continue;
        for (const auto& v : *values) {
            const auto v_tokens = text::tokenize(v);
            if (!v_tokens.empty() && text::contains_sequence(q_tokens, v_tokens)) {
                const bool numeric = col.type != ColumnType::Text && as_number(v).has_value();
                st.where.push_back({col.name, CompareOp::Eq, Literal{v, numeric}});
                break;
            }
        }
    }
    st.limit = row_limit;
    return to_sql(st);
}

std::string render_facts(const std::vector<std::string>& columns, const std::vector<std::vector<std::string>>& rows,
                         bool truncated, std::size_t matched_rows) {
    auto line = [](const std::vector<std::string>& cells) {
        std::string out;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += " | ";
            out += cells[i];
        }
        return out;
    };
    std::string out = line(columns) + "\n";
    if (rows.empty()) return out + "(no rows)\n";
    for (const auto& r : rows) out += line(r) + "\n";
    if (truncated) {
        out += "(truncated: " + std::to_string(matched_rows) + " rows matched, showing " + std::to_string(rows.size()) +
               ")\n";
    }
    return out;
}

FactRecord execute_structured_query(const SelectStatement& st, const TableStore& store, std::size_t max_rows) {
    const Table* table = store.find(st.table);
    if (!table) {
        for (const auto& [id, t] : store.tables())
            if (text::to_lower(id) == text::to_lower(st.table)) table = &t;
    }
    if (!table) throw Error(ErrorCode::UnknownTable, "no table named '" + st.table + "'");
    check_columns(st, table->columns, table->id);

    std::vector<std::size_t> proj;
    if (st.projection.empty()) {
        for (std::size_t i = 0; i < table->columns.size(); ++i) proj.push_back(i);
    } else {
        for (const auto& c : st.projection) proj.push_back(*table->column_index(c));
    }
    std::vector<std::pair<std::size_t, const Predicate*>> filters;
    for (const auto& p : st.where) filters.emplace_back(*table->column_index(p.column), &p);

    FactRecord fr;
    fr.table_id = table->id;
    for (auto i : proj) fr.columns.push_back(table->columns[i].name);

    const std::size_t wanted = st.limit.value_or(static_cast<std::size_t>(-1));
    for (const auto& row : table->rows) {
        if (row.size() != table->columns.size()) throw Error(ErrorCode::ExecutionError, "ragged row in " + table->id);
        const bool keep = std::all_of(filters.begin(), filters.end(), [&](const auto& f) {
            return matches(row[f.first], table->columns[f.first].type, *f.second);
        });
        if (!keep) continue;
        if (fr.matched_rows >= wanted) break;
        ++fr.matched_rows;
        if (fr.rows.size() < max_rows) {
            std::vector<std::string> out;
            for (auto i : proj) out.push_back(row[i]);
            fr.rows.push_back(std::move(out));
        }
    }
    fr.truncated = fr.matched_rows > fr.rows.size();
    fr.rendered = render_facts(fr.columns, fr.rows, fr.truncated, fr.matched_rows);
    return fr;
}

FactRecord execute_structured_query(std::string_view sql, const TableStore& store, std::size_t max_rows) {
    return execute_structured_query(parse_select(sql), store, max_rows);
}

}  // namespace pathrouter::retrieval
