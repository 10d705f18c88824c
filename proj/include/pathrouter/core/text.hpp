#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace pathrouter::text {

std::string to_lower(std::string_view s);
std::string_view trim(std::string_view s) noexcept;

/// Lowercases and splits on every non-alphanumeric byte. No stemming.
/// This is the single tokenizer shared by features, BM25 and embeddings.
std::vector<std::string> tokenize(std::string_view s);

/// Tokens joined by single spaces.
std::string join(const std::vector<std::string>& tokens, std::string_view sep = " ");

/// True if `needle` occurs as a contiguous run inside `haystack`.
bool contains_sequence(const std::vector<std::string>& haystack,
                       const std::vector<std::string>& needle) noexcept;

/// Collapses runs of whitespace to one space and trims both ends.
std::string collapse_whitespace(std::string_view s);

std::uint64_t fnv1a64(std::string_view s) noexcept;
std::string hex64(std::uint64_t v);

}  // namespace pathrouter::text
