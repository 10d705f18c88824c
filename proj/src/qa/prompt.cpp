#include "pathrouter/qa/prompt.hpp"

#include <initializer_list>
#include <utility>

#include "pathrouter/core/error.hpp"
#include "pathrouter/core/jsonl.hpp"

namespace pathrouter::qa {

namespace {

bool has(std::string_view s, std::string_view placeholder) { return s.find(placeholder) != std::string_view::npos; }

/// Single left-to-right pass, so substituted values are never re-expanded.
std::string fill(std::string_view tpl, std::initializer_list<std::pair<std::string_view, std::string_view>> vars) {
    std::string out;
    std::size_t i = 0;
    while (i < tpl.size()) {
        bool hit = false;
        if (tpl[i] == '{') {
            for (const auto& [key, value] : vars) {
                if (tpl.substr(i, key.size()) == key) {
                    out.append(value);
                    i += key.size();
                    hit = true;
                    break;
                }
            }
        }
        if (!hit) out.push_back(tpl[i++]);
    }
    return out;
}

[[noreturn]] void missing(const std::string& what) { throw Error(ErrorCode::TemplateMissing, what); }

}  // namespace

PromptTemplates PromptTemplates::defaults() {
    PromptTemplates t;
    const std::string base = "You are a financial question answering assistant. Answer with the shortest exact answer.";
    t.system[Path::LLM] = base;
    t.system[Path::Doc] = base + " Use the passages when they are relevant.";
    t.system[Path::DB] = base + " Use the database facts when they are relevant.";
    t.system[Path::Hybrid] = base + " Use the passages and the database facts when they are relevant.";
    t.user[Path::LLM] = "Question: {question}\n\nAnswer:";
    t.user[Path::Doc] = "Question: {question}\n\nPassages:\n{passages}\n\nAnswer:";
    t.user[Path::DB] = "Question: {question}\n\nDatabase facts:\n{facts}\n\nAnswer:";
    t.user[Path::Hybrid] = "Question: {question}\n\nPassages:\n{passages}\n\nDatabase facts:\n{facts}\n\nAnswer:";
    return t;
}

void PromptTemplates::validate() const {
    for (Path p : kAllPaths) {
        const auto name = std::string(to_string(p));
        if (system[p].empty()) missing("no system template for " + name);
        if (!has(user[p], "{question}")) missing("user template for " + name + " lacks {question}");
        const bool wants_passages = p == Path::Doc || p == Path::Hybrid;
        const bool wants_facts = p == Path::DB || p == Path::Hybrid;
        if (wants_passages && !has(user[p], "{passages}")) missing("user template for " + name + " lacks {passages}");
        if (wants_facts && !has(user[p], "{facts}")) missing("user template for " + name + " lacks {facts}");
    }
    if (!has(passage, "{text}")) missing("passage template lacks {text}");
}

PromptTemplates PromptTemplates::from_json(const nlohmann::json& j) {
    if (!j.is_object()) missing("templates must be a JSON object");
    PromptTemplates t;
    t.version = j.value("version", 1);
    for (const char* section : {"system", "user"}) {
        if (!j.contains(section) || !j.at(section).is_object()) missing(std::string("no '") + section + "' section");
        auto& target = std::string_view(section) == "system" ? t.system : t.user;
        for (Path p : kAllPaths) {
            const auto key = std::string(to_string(p));
            const auto& sec = j.at(section);
            if (!sec.contains(key) || !sec.at(key).is_string()) missing(std::string(section) + " template for " + key);
            target[p] = sec.at(key).get<std::string>();
        }
    }
    if (j.contains("passage")) t.passage = j.at("passage").get<std::string>();
    t.validate();
    return t;
}

PromptTemplates PromptTemplates::load(const std::filesystem::path& file) {
    try {
        return from_json(nlohmann::json::parse(jsonl::read_file(file)));
    } catch (const nlohmann::json::exception& e) {
        missing(file.string() + ": " + e.what());
    }
}

nlohmann::json PromptTemplates::to_json() const {
    nlohmann::json sys = nlohmann::json::object();
    nlohmann::json usr = nlohmann::json::object();
    for (Path p : kAllPaths) {
        sys[std::string(to_string(p))] = system[p];
        usr[std::string(to_string(p))] = user[p];
    }
    return {{"version", version}, {"system", sys}, {"user", usr}, {"passage", passage}};
}

Prompt build_prompt(std::string_view query_id, std::string_view question, const retrieval::EvidenceBundle& bundle,
                    const PromptTemplates& templates) {
    const Path p = bundle.path;
    const bool passages_ok = p == Path::Doc || p == Path::Hybrid;
    const bool facts_ok = p == Path::DB || p == Path::Hybrid;
    if ((!passages_ok && !bundle.passages.empty()) || (!facts_ok && !bundle.facts.empty()))
        throw Error(ErrorCode::SchemaError, "evidence does not fit path " + std::string(to_string(p)));
    if (templates.system[p].empty() || !has(templates.user[p], "{question}"))
        missing("no usable template for " + std::string(to_string(p)));

    std::string passages;
    for (const auto& ps : bundle.passages) {
        if (!passages.empty()) passages += "\n";
        passages += fill(templates.passage, {{"{doc_id}", ps.doc_id}, {"{text}", ps.text}});
    }
    if (passages_ok && passages.empty()) passages = "(no passages)";

    std::string facts(kImmutabilityInstruction);
    facts += "\n";
    for (const auto& f : bundle.facts) facts += "Table " + f.table_id + ":\n" + f.rendered;
    if (bundle.facts.empty()) facts += "(no facts)\n";
    if (!facts.empty() && facts.back() == '\n') facts.pop_back();

    const std::string_view none;
    std::string user = fill(templates.user[p], {{"{question}", question},
                                                {"{passages}", passages_ok ? std::string_view(passages) : none},
                                                {"{facts}", facts_ok ? std::string_view(facts) : none}});

    Prompt out;
    out.query_id = std::string(query_id);
    out.path = p;
    out.system_text = templates.system[p];
    out.user_text = std::move(user);
    out.token_count = count_tokens(out.system_text) + count_tokens(out.user_text);
    return out;
}

}  // namespace pathrouter::qa
