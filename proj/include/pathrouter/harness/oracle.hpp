#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "pathrouter/core/path.hpp"
#include "pathrouter/harness/dataset.hpp"

namespace pathrouter::harness {

/// (query_id, path) -> answer text.
using PathAnswers = std::map<std::pair<std::string, Path>, std::string, std::less<>>;

struct OracleEntry {
    std::string query_id;
    std::vector<Path> correct_paths;  ///< in priority order
    Path oracle_path = Path::DB;      ///< first correct path, else the priority head
    bool answerable() const noexcept { return !correct_paths.empty(); }
};

struct OracleAssignment {
    std::vector<OracleEntry> entries;  ///< record order
    double accuracy() const noexcept;
    const OracleEntry* find(std::string_view query_id) const noexcept;
};

/// Every record needs an answer on all four paths; a gap is
/// Error(MissingAnswer) naming the query and path.
OracleAssignment compute_oracle(const PathAnswers& answers, const std::vector<QARecord>& records,
                                const PriorityOrder& priority = PriorityOrder{});

}  // namespace pathrouter::harness
