#include "pathrouter/harness/oracle.hpp"

#include "pathrouter/core/error.hpp"
#include "pathrouter/harness/grading.hpp"

namespace pathrouter::harness {

double OracleAssignment::accuracy() const noexcept {
    if (entries.empty()) return 0.0;
    std::size_t ok = 0;
    for (const auto& e : entries) ok += e.answerable() ? 1 : 0;
    return static_cast<double>(ok) / static_cast<double>(entries.size());
}

const OracleEntry* OracleAssignment::find(std::string_view query_id) const noexcept {
    for (const auto& e : entries)
        if (e.query_id == query_id) return &e;
    return nullptr;
}

OracleAssignment compute_oracle(const PathAnswers& answers, const std::vector<QARecord>& records,
                                const PriorityOrder& priority) {
    OracleAssignment out;
    out.entries.reserve(records.size());
    for (const auto& r : records) {
        OracleEntry e;
        e.query_id = r.query_id;
        for (Path p : priority.order()) {
            const auto it = answers.find(std::make_pair(r.query_id, p));
            if (it == answers.end())
                throw Error(ErrorCode::MissingAnswer, "query " + r.query_id + " has no " + std::string(to_string(p)) + " answer");
            if (exact_match(it->second, r.gold_answers)) e.correct_paths.push_back(p);
        }
        e.oracle_path = e.correct_paths.empty() ? priority.head() : e.correct_paths.front();
        out.entries.push_back(std::move(e));
    }
    return out;
}

}  // namespace pathrouter::harness
