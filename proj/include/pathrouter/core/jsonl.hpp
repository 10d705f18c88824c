#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace pathrouter::jsonl {

using Json = nlohmann::json;
using Handler = std::function<void(const Json&, std::size_t line)>;

/// Reads a line-delimited JSON file. Blank lines and lines starting with '#'
/// are skipped. The callback receives the parsed record and its 1-based line.
void for_each(const std::filesystem::path& file,
              const std::function<void(const Json&, std::size_t line)>& fn);

/// Same as for_each but over an in-memory document.
void for_each_in(std::string_view document,
                 const std::function<void(const Json&, std::size_t line)>& fn);

/// Compact single-line dump with sorted keys (nlohmann orders object keys).
std::string dump_line(const Json& record);

std::string read_file(const std::filesystem::path& file);
void write_file(const std::filesystem::path& file, std::string_view contents);

}  // namespace pathrouter::jsonl
