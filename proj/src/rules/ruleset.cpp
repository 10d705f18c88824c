#include "pathrouter/rules/ruleset.hpp"

#include <set>

#include "pathrouter/core/error.hpp"
#include "pathrouter/core/jsonl.hpp"
#include "pathrouter/core/text.hpp"

namespace pathrouter::rules {

using Json = nlohmann::json;

std::string_view to_string(RuleOrigin origin) noexcept {
    return origin == RuleOrigin::Evolved ? "evolved" : "expert_seed";
}

const Rule* RuleSet::find(std::string_view id) const noexcept {
    for (const auto& r : rules)
        if (r.id == id) return &r;
    return nullptr;
}

bool semantically_equal(const RuleSet& a, const RuleSet& b) {
    return a.version == b.version && a.priority == b.priority && a.lexicon() == b.lexicon() && a.rules == b.rules;
}

void validate(const RuleSet& ruleset) {
    std::set<std::string, std::less<>> ids;
    for (const auto& r : ruleset.rules) {
        if (r.id.empty()) throw ParseError(0, "rule with empty id");
        if (!ids.insert(r.id).second) throw Error(ErrorCode::DuplicateRuleId, "rule id '" + r.id + "' repeats");
        if (r.delta == 0) throw ParseError(0, "rule '" + r.id + "' has delta 0");
        if (r.condition.depth() > kMaxConditionDepth)
            throw ParseError(0, "rule '" + r.id + "' condition exceeds depth bound");
    }
}

namespace {

std::string required_string(const Json& rec, const char* key, std::size_t line) {
    if (!rec.contains(key) || !rec.at(key).is_string())
        throw ParseError(line, std::string("missing or non-string field '") + key + "'");
    return rec.at(key).get<std::string>();
}

PriorityOrder parse_priority(const Json& arr, std::size_t line) {
    if (!arr.is_array() || arr.size() != kPathCount)
        throw Error(ErrorCode::InvalidPriority, "line " + std::to_string(line) + ": priority must list 4 paths");
    std::array<Path, kPathCount> order{};
    for (std::size_t i = 0; i < kPathCount; ++i) {
        const auto p = arr[i].is_string() ? parse_path(arr[i].get<std::string>()) : std::nullopt;
        if (!p) throw Error(ErrorCode::InvalidPriority, "line " + std::to_string(line) + ": unknown path in priority");
        order[i] = *p;
    }
    auto perm = PriorityOrder::from(order);
    if (!perm) throw Error(ErrorCode::InvalidPriority, "line " + std::to_string(line) + ": priority is not a permutation");
    return *perm;
}

}  // namespace

RuleSet parse_rules(std::string_view document) {
    RuleSet rs;
    bool seen_record = false;
    std::set<std::string, std::less<>> ids;

    jsonl::for_each_in(document, [&](const Json& rec, std::size_t line) {
        if (!rec.is_object()) throw ParseError(line, "record is not an object");
        const bool is_header = rec.value("record", std::string("rule")) == "header";
        if (is_header) {
            if (seen_record) throw ParseError(line, "header must be the first record");
            seen_record = true;
            if (rec.contains("version")) {
                const auto& v = rec.at("version");
                if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
                    throw ParseError(line, "version must be a non-negative integer");
                rs.version = v.get<std::uint64_t>();
            }
            if (rec.contains("priority")) rs.priority = parse_priority(rec.at("priority"), line);
            if (rec.contains("lexicon")) {
                try {
                    rs.extractor = std::make_shared<const FeatureExtractor>(FeatureLexicon::from_json(rec.at("lexicon")));
                } catch (const Error& e) {
                    throw ParseError(line, e.what());
                }
            }
            return;
        }
        seen_record = true;

        Rule r;
        r.id = required_string(rec, "id", line);
        if (text::trim(r.id).empty()) throw ParseError(line, "empty rule id");
        if (!ids.insert(r.id).second)
            throw Error(ErrorCode::DuplicateRuleId, "line " + std::to_string(line) + ": rule id '" + r.id + "' repeats");
        r.description = rec.value("description", std::string());
        r.condition = parse_condition(required_string(rec, "condition", line), line);
        const auto path = parse_path(required_string(rec, "path", line));
        if (!path) throw ParseError(line, "unknown path '" + rec.at("path").get<std::string>() + "'");
        r.target_path = *path;
        if (!rec.contains("delta") || !rec.at("delta").is_number_integer())
            throw ParseError(line, "missing or non-integer field 'delta'");
        r.delta = rec.at("delta").get<int>();
        if (r.delta == 0) throw ParseError(line, "delta must be non-zero");
        const auto origin = rec.value("origin", std::string("expert_seed"));
        if (origin == "expert_seed") {
            r.origin = RuleOrigin::ExpertSeed;
        } else if (origin == "evolved") {
            r.origin = RuleOrigin::Evolved;
        } else {
            throw ParseError(line, "unknown origin '" + origin + "'");
        }
        rs.rules.push_back(std::move(r));
    });

    validate(rs);
    return rs;
}

RuleSet load_rules(const std::string& file) { return parse_rules(jsonl::read_file(file)); }

std::string serialize_rules(const RuleSet& ruleset) {
    std::string out;
    Json priority = Json::array();
    for (Path p : ruleset.priority.order()) priority.push_back(std::string(to_string(p)));
    Json header = Json::object();
    header["record"] = "header";
    header["version"] = ruleset.version;
    header["priority"] = priority;
    header["lexicon"] = ruleset.lexicon().to_json();
    out += jsonl::dump_line(header) + "\n";
    for (const auto& r : ruleset.rules) {
        Json rec = Json::object();
        rec["id"] = r.id;
        rec["description"] = r.description;
        rec["condition"] = serialize(r.condition);
        rec["path"] = std::string(to_string(r.target_path));
        rec["delta"] = r.delta;
        rec["origin"] = std::string(to_string(r.origin));
        out += jsonl::dump_line(rec) + "\n";
    }
    return out;
}

RuleSet seed_rules() {
    RuleSet rs;
    auto add = [&](std::string id, std::string desc, std::string cond, Path p) {
        rs.rules.push_back(Rule{std::move(id), std::move(desc), parse_condition(cond), p, 3, RuleOrigin::ExpertSeed});
    };
    add("numeric_fact", "Question requests numbers, percentages, years or calculations",
        "(and (flag has_numeric_request) (not (flag seeks_fact_with_explanation)))", Path::DB);
    add("how_why", "Question asks how or why",
        "(and (kw \"how\" \"why\") (not (flag has_numeric_request)))", Path::Doc);
    add("definition", "Question seeks a definition", "(flag seeks_definition)", Path::LLM);
    add("fact_with_explanation", "Question seeks a fact together with its explanation",
        "(flag seeks_fact_with_explanation)", Path::Hybrid);
    return rs;
}

PathMap<int> PathScores::replay() const noexcept {
    PathMap<int> out{};
    for (const auto& f : fired_rules) out[f.target_path] += f.delta;
    return out;
}

PathScores score_paths(const QueryFeatures& feats, const RuleSet& ruleset, Judge* judge) {
    PathScores result;
    JudgeMemo memo;
    for (const auto& rule : ruleset.rules) {
        bool fired = false;
        try {
            fired = evaluate_condition(rule.condition, feats, judge, &memo);
        } catch (const Error& e) {
            throw Error(e.code(), "rule '" + rule.id + "': " + e.what());
        }
        if (fired) {
            result.scores[rule.target_path] += rule.delta;
            result.fired_rules.push_back({rule.id, rule.target_path, rule.delta});
        }
    }
    return result;
}

PathScores score_paths(std::string_view query_text, const RuleSet& ruleset, Judge* judge) {
    return score_paths(ruleset.extractor->extract(query_text), ruleset, judge);
}

Path select_path(const PathMap<int>& scores, const PriorityOrder& priority) noexcept {
    Path best = priority.head();
    for (Path p : priority.order()) {
        if (scores[p] > scores[best]) best = p;
    }
    return best;
}

}  // namespace pathrouter::rules
