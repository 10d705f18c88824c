#include "pathrouter/harness/dataset.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <random>
#include <set>

#include "pathrouter/core/error.hpp"
#include "pathrouter/core/jsonl.hpp"
#include "pathrouter/core/text.hpp"
#include "pathrouter/retrieval/evidence.hpp"

namespace pathrouter::harness {

std::string_view to_string(Category c) noexcept {
    switch (c) {
        case Category::Numeric: return "numeric";
        case Category::HowWhy: return "how_why";
        case Category::Definition: return "definition";
        case Category::FactPlusExplanation: return "fact_plus_explanation";
        case Category::Other: return "other";
    }
    return "other";
}

std::optional<Category> parse_category(std::string_view s) noexcept {
    for (auto c : {Category::Numeric, Category::HowWhy, Category::Definition, Category::FactPlusExplanation,
                   Category::Other}) {
        if (s == to_string(c)) return c;
    }
    return std::nullopt;
}

Path aligned_path(Category c) noexcept {
    switch (c) {
        case Category::Numeric: return Path::DB;
        case Category::HowWhy: return Path::Doc;
        case Category::Definition: return Path::LLM;
        case Category::FactPlusExplanation: return Path::Hybrid;
        case Category::Other: return Path::LLM;
    }
    return Path::LLM;
}

nlohmann::json to_json(const QARecord& r) {
    nlohmann::json j{{"query_id", r.query_id},
                     {"question", r.question},
                     {"gold_answers", r.gold_answers},
                     {"doc_refs", r.doc_refs},
                     {"table_refs", r.table_refs}};
    if (r.category) j["category_label"] = std::string(to_string(*r.category));
    return j;
}

namespace {

std::vector<std::string> string_list(const nlohmann::json& rec, const char* key, bool required) {
    if (!rec.contains(key)) {
        if (required) throw std::invalid_argument(std::string("missing ") + key);
        return {};
    }
    const auto& v = rec.at(key);
    if (!v.is_array()) throw std::invalid_argument(std::string(key) + " must be a list");
    std::vector<std::string> out;
    for (const auto& e : v) {
        if (!e.is_string()) throw std::invalid_argument(std::string(key) + " must hold strings");
        out.push_back(e.get<std::string>());
    }
    return out;
}

std::vector<QARecord> parse_records(const std::function<void(const jsonl::Handler&)>& iterate) {
    std::vector<QARecord> out;
    std::set<std::string, std::less<>> seen;
    iterate([&](const nlohmann::json& rec, std::size_t) {
        const auto index = out.size();
        auto fail = [&](const std::string& why) -> void {
            throw Error(ErrorCode::SchemaError, "record " + std::to_string(index) + ": " + why);
        };
        if (!rec.is_object()) fail("not an object");
        QARecord r;
        try {
            if (!rec.contains("query_id") || !rec.at("query_id").is_string()) fail("missing query_id");
            if (!rec.contains("question") || !rec.at("question").is_string()) fail("missing question");
            r.query_id = rec.at("query_id").get<std::string>();
            r.question = rec.at("question").get<std::string>();
            r.gold_answers = string_list(rec, "gold_answers", true);
            r.doc_refs = string_list(rec, "doc_refs", false);
            r.table_refs = string_list(rec, "table_refs", false);
        } catch (const std::invalid_argument& e) {
            fail(e.what());
        }
        if (r.query_id.empty()) fail("empty query_id");
        if (text::trim(r.question).empty()) fail("empty question");
        if (r.gold_answers.empty()) fail("gold_answers is empty");
        if (rec.contains("category_label") && !rec.at("category_label").is_null()) {
            const auto& c = rec.at("category_label");
            const auto cat = c.is_string() ? parse_category(c.get<std::string>()) : std::nullopt;
            if (!cat) fail("unknown category_label");
            r.category = cat;
        }
        if (!seen.insert(r.query_id).second) fail("query_id '" + r.query_id + "' repeats");
        out.push_back(std::move(r));
    });
    return out;
}

}  // namespace

std::vector<QARecord> load_dataset(const std::filesystem::path& file, std::string_view format) {
    if (format != "jsonl") throw Error(ErrorCode::ConfigError, "unsupported dataset format '" + std::string(format) + "'");
    return parse_records([&](const jsonl::Handler& fn) { jsonl::for_each(file, fn); });
}

std::vector<QARecord> parse_dataset(std::string_view document) {
    return parse_records([&](const jsonl::Handler& fn) { jsonl::for_each_in(document, fn); });
}

void validate_refs(const std::vector<QARecord>& records, const retrieval::RetrievalIndex& index) {
    std::set<std::string, std::less<>> docs;
    for (std::size_t i = 0; i < index.docs.size(); ++i) docs.insert(index.docs.sparse().id(i));
    for (std::size_t i = 0; i < records.size(); ++i) {
        for (const auto& d : records[i].doc_refs)
            if (!docs.contains(d))
                throw Error(ErrorCode::SchemaError, "record " + std::to_string(i) + ": unknown doc_ref '" + d + "'");
        for (const auto& t : records[i].table_refs)
            if (!index.store.find(t))
                throw Error(ErrorCode::SchemaError, "record " + std::to_string(i) + ": unknown table_ref '" + t + "'");
    }
}

std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    std::mt19937_64 rng(seed);
    for (std::size_t i = n; i > 1; --i) {
        // Uniform draw in [0, i) by rejection; std distributions vary by library.
        const std::uint64_t bound = i;
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
        std::uint64_t x = rng();
        while (x >= limit) x = rng();
        std::swap(perm[i - 1], perm[static_cast<std::size_t>(x % bound)]);
    }
    return perm;
}

DatasetSplit split_dataset(const std::vector<QARecord>& records, std::uint64_t seed, std::size_t eval_n,
                           std::size_t train_n) {
    const auto perm = seeded_permutation(records.size(), seed);
    const std::size_t n_eval = std::min(eval_n, records.size());
    const std::size_t n_train = std::min(train_n, records.size() - n_eval);
    std::vector<std::size_t> eval_idx(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_eval));
    std::vector<std::size_t> train_idx(perm.begin() + static_cast<std::ptrdiff_t>(n_eval),
                                       perm.begin() + static_cast<std::ptrdiff_t>(n_eval + n_train));
    std::sort(eval_idx.begin(), eval_idx.end());
    std::sort(train_idx.begin(), train_idx.end());
    DatasetSplit out;
    for (auto i : eval_idx) out.eval.push_back(records[i]);
    for (auto i : train_idx) out.train.push_back(records[i]);
    return out;
}

}  // namespace pathrouter::harness
