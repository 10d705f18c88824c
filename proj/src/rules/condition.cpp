#include "pathrouter/rules/condition.hpp"

#include <cctype>

#include "pathrouter/core/error.hpp"
#include "pathrouter/core/text.hpp"

namespace pathrouter::rules {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// --- s-expression reader ----------------------------------------------------

struct SExpr {
    bool is_list = false;
    bool quoted = false;  // atom came from a "string"
    std::string atom;
    std::vector<SExpr> items;
};

class Reader {
public:
    Reader(std::string_view src, std::size_t line) : src_(src), line_(line) {}

    SExpr read_top() {
        SExpr e = read(0);
        skip_ws();
        if (pos_ != src_.size()) fail("trailing characters after condition");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& why) const {
        throw ParseError(line_, "condition: " + why + " at offset " + std::to_string(pos_));
    }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    SExpr read(std::size_t nesting) {
        if (nesting > 64) fail("nesting too deep");
        skip_ws();
        if (pos_ >= src_.size()) fail("unexpected end of input");
        const char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            SExpr list;
            list.is_list = true;
            for (;;) {
                skip_ws();
                if (pos_ >= src_.size()) fail("unterminated list");
                if (src_[pos_] == ')') {
                    ++pos_;
                    return list;
                }
                list.items.push_back(read(nesting + 1));
            }
        }
        if (c == ')') fail("unexpected ')'");
        if (c == '"') return read_string();
        SExpr atom;
        while (pos_ < src_.size()) {
            const char a = src_[pos_];
            if (std::isspace(static_cast<unsigned char>(a)) || a == '(' || a == ')' || a == '"') break;
            atom.atom.push_back(a);
            ++pos_;
        }
        return atom;
    }

    SExpr read_string() {
        ++pos_;  // opening quote
        SExpr s;
        s.quoted = true;
        while (pos_ < src_.size()) {
            const char c = src_[pos_++];
            if (c == '"') return s;
            if (c == '\\') {
                if (pos_ >= src_.size()) break;
                const char e = src_[pos_++];
                if (e != '"' && e != '\\') fail("unsupported escape");
                s.atom.push_back(e);
            } else {
                s.atom.push_back(c);
            }
        }
        fail("unterminated string");
    }

    std::string_view src_;
    std::size_t line_;
    std::size_t pos_ = 0;
};

ConditionExpr build(const SExpr& e, std::size_t line) {
    auto fail = [line](const std::string& why) -> ParseError { return ParseError(line, "condition: " + why); };
    if (!e.is_list) throw fail("expected a list, got '" + e.atom + "'");
    if (e.items.empty() || e.items[0].is_list || e.items[0].quoted) throw fail("list must start with an operator");
    const std::string op = text::to_lower(e.items[0].atom);
    const std::size_t argc = e.items.size() - 1;

    auto strings = [&]() {
        std::vector<std::string> out;
        for (std::size_t i = 1; i < e.items.size(); ++i) {
            if (!e.items[i].quoted) throw fail("'" + op + "' expects quoted strings");
            out.push_back(e.items[i].atom);
        }
        return out;
    };
    auto children = [&]() {
        std::vector<ConditionExpr> out;
        for (std::size_t i = 1; i < e.items.size(); ++i) out.push_back(build(e.items[i], line));
        return out;
    };

    if (op == "kw") {
        if (argc == 0) throw fail("'kw' needs at least one keyword");
        auto kws = strings();
        for (const auto& k : kws)
            if (text::tokenize(k).empty()) throw fail("keyword '" + k + "' has no alphanumeric content");
        return ConditionExpr::keyword_any(std::move(kws));
    }
    if (op == "re") {
        if (argc != 1) throw fail("'re' takes exactly one pattern");
        try {
            return ConditionExpr::pattern(strings().front());
        } catch (const std::regex_error& err) {
            throw fail(std::string("invalid pattern: ") + err.what());
        }
    }
    if (op == "flag") {
        if (argc != 1 || e.items[1].is_list || e.items[1].quoted) throw fail("'flag' takes one bare flag name");
        const auto& name = e.items[1].atom;
        if (!is_known_flag(name)) throw fail("unknown feature flag '" + name + "'");
        return ConditionExpr::flag(name);
    }
    if (op == "sem") {
        if (argc != 1) throw fail("'sem' takes exactly one description");
        auto s = strings().front();
        if (text::trim(s).empty()) throw fail("'sem' description is empty");
        return ConditionExpr::semantic(std::move(s));
    }
    if (op == "and" || op == "or") {
        if (argc == 0) throw fail("'" + op + "' needs at least one operand");
        return op == "and" ? ConditionExpr::all_of(children()) : ConditionExpr::any_of(children());
    }
    if (op == "not") {
        if (argc != 1) throw fail("'not' takes exactly one operand");
        return ConditionExpr::negate(build(e.items[1], line));
    }
    throw fail("unknown operator '" + op + "'");
}

void quote(std::string& out, std::string_view s) {
    out.push_back('"');
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    out.push_back('"');
}

void write(std::string& out, const ConditionExpr& c) {
    std::visit(overloaded{
                   [&](const KeywordAny& k) {
                       out += "(kw";
                       for (const auto& w : k.keywords) {
                           out.push_back(' ');
                           quote(out, w);
                       }
                       out.push_back(')');
                   },
                   [&](const PatternMatch& p) {
                       out += "(re ";
                       quote(out, p.pattern);
                       out.push_back(')');
                   },
                   [&](const FeatureFlag& f) { out += "(flag " + f.name + ")"; },
                   [&](const SemanticPredicate& s) {
                       out += "(sem ";
                       quote(out, s.description);
                       out.push_back(')');
                   },
                   [&](const AllOf& a) {
                       out += "(and";
                       for (const auto& t : a.terms) {
                           out.push_back(' ');
                           write(out, t);
                       }
                       out.push_back(')');
                   },
                   [&](const AnyOf& a) {
                       out += "(or";
                       for (const auto& t : a.terms) {
                           out.push_back(' ');
                           write(out, t);
                       }
                       out.push_back(')');
                   },
                   [&](const NotOf& n) {
                       out += "(not ";
                       write(out, n.term.front());
                       out.push_back(')');
                   },
               },
               c.node());
}

bool eval(const ConditionExpr& c, const QueryFeatures& f, Judge* judge, JudgeMemo& memo) {
    return std::visit(
        overloaded{
            [&](const KeywordAny& k) {
                for (const auto& seq : k.token_seqs) {
                    if (text::contains_sequence(f.normalized_text, seq)) return true;
                }
                return false;
            },
            [&](const PatternMatch& p) { return std::regex_search(f.lowered_text, *p.compiled); },
            [&](const FeatureFlag& fl) { return f.flag(fl.name).value_or(false); },
            [&](const SemanticPredicate& s) {
                if (auto it = memo.find(s.description); it != memo.end()) return it->second;
                bool verdict = false;
                try {
                    verdict = judge->holds(f.lowered_text, s.description);
                } catch (const std::exception& e) {
                    throw Error(ErrorCode::JudgeError, "predicate '" + s.description + "': " + e.what());
                }
                memo.emplace(s.description, verdict);
                return verdict;
            },
            [&](const AllOf& a) {
                for (const auto& t : a.terms)
                    if (!eval(t, f, judge, memo)) return false;
                return true;
            },
            [&](const AnyOf& a) {
                for (const auto& t : a.terms)
                    if (eval(t, f, judge, memo)) return true;
                return false;
            },
            [&](const NotOf& n) { return !eval(n.term.front(), f, judge, memo); },
        },
        c.node());
}

}  // namespace

std::size_t ConditionExpr::depth() const noexcept {
    auto max_child = [](const std::vector<ConditionExpr>& terms) {
        std::size_t d = 0;
        for (const auto& t : terms) d = std::max(d, t.depth());
        return d;
    };
    return std::visit(overloaded{
                          [&](const AllOf& a) { return 1 + max_child(a.terms); },
                          [&](const AnyOf& a) { return 1 + max_child(a.terms); },
                          [&](const NotOf& n) { return 1 + max_child(n.term); },
                          [](const auto&) -> std::size_t { return 1; },
                      },
                      node_);
}

bool ConditionExpr::has_semantic() const noexcept {
    auto any = [](const std::vector<ConditionExpr>& terms) {
        for (const auto& t : terms)
            if (t.has_semantic()) return true;
        return false;
    };
    return std::visit(overloaded{
                          [](const SemanticPredicate&) { return true; },
                          [&](const AllOf& a) { return any(a.terms); },
                          [&](const AnyOf& a) { return any(a.terms); },
                          [&](const NotOf& n) { return any(n.term); },
                          [](const auto&) { return false; },
                      },
                      node_);
}

ConditionExpr ConditionExpr::keyword_any(std::vector<std::string> keywords) {
    KeywordAny k;
    for (const auto& w : keywords) k.token_seqs.push_back(text::tokenize(w));
    k.keywords = std::move(keywords);
    return ConditionExpr(std::move(k));
}
ConditionExpr ConditionExpr::pattern(std::string pattern) {
    auto compiled = std::make_shared<const std::regex>(pattern, std::regex::ECMAScript | std::regex::icase);
    return ConditionExpr(PatternMatch{std::move(pattern), std::move(compiled)});
}
ConditionExpr ConditionExpr::flag(std::string name) { return ConditionExpr(FeatureFlag{std::move(name)}); }
ConditionExpr ConditionExpr::semantic(std::string description) {
    return ConditionExpr(SemanticPredicate{std::move(description)});
}
ConditionExpr ConditionExpr::all_of(std::vector<ConditionExpr> terms) { return ConditionExpr(AllOf{std::move(terms)}); }
ConditionExpr ConditionExpr::any_of(std::vector<ConditionExpr> terms) { return ConditionExpr(AnyOf{std::move(terms)}); }
ConditionExpr ConditionExpr::negate(ConditionExpr term) {
    NotOf n;
    n.term.push_back(std::move(term));
    return ConditionExpr(std::move(n));
}

ConditionExpr parse_condition(std::string_view source, std::size_t line) {
    Reader reader(source, line);
    ConditionExpr cond = build(reader.read_top(), line);
    if (cond.depth() > kMaxConditionDepth) {
        throw ParseError(line, "condition depth " + std::to_string(cond.depth()) + " exceeds " +
                                   std::to_string(kMaxConditionDepth));
    }
    return cond;
}

std::string serialize(const ConditionExpr& cond) {
    std::string out;
    write(out, cond);
    return out;
}

bool operator==(const ConditionExpr& a, const ConditionExpr& b) noexcept { return serialize(a) == serialize(b); }

bool evaluate_condition(const ConditionExpr& cond, const QueryFeatures& feats, Judge* judge, JudgeMemo* memo) {
    if (judge == nullptr && cond.has_semantic()) {
        throw Error(ErrorCode::JudgeUnavailable, "condition has a semantic predicate but no judge is configured");
    }
    JudgeMemo local;
    return eval(cond, feats, judge, memo ? *memo : local);
}

}  // namespace pathrouter::rules
