#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pathrouter/cache/meta_cache.hpp"
#include "pathrouter/harness/experiment.hpp"

namespace pathrouter::harness {

/// Files whose names start with this prefix hold wall-clock measurements;
/// every other report file is a pure function of (inputs, config).
inline constexpr std::string_view kTimingPrefix = "timing_";

nlohmann::json to_json(const cache::CacheStats& s);
nlohmann::json summary_json(const ExperimentReport& report);

/// Writes the report into `dir` (created if needed) and returns the file
/// names written, sorted. Throws ConfigError for an empty report and
/// IOError when a file cannot be written.
std::vector<std::string> emit_report(const ExperimentReport& report, const std::filesystem::path& dir);

}  // namespace pathrouter::harness
