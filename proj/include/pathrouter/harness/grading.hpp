#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace pathrouter::harness {

/// Lowercase, strip ASCII punctuation, drop the articles a/an/the, collapse
/// whitespace.
std::string normalize_answer(std::string_view text);

/// Token-overlap F1 over normalized token multisets, max over golds.
/// 0 when there is no overlap.
double token_f1(std::string_view predicted, const std::vector<std::string>& golds);

/// Normalized exact match against any gold.
bool exact_match(std::string_view predicted, const std::vector<std::string>& golds);

}  // namespace pathrouter::harness
