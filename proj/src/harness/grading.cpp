#include "pathrouter/harness/grading.hpp"

#include <cctype>
#include <map>
#include <sstream>

namespace pathrouter::harness {

namespace {

std::vector<std::string> normalized_tokens(std::string_view text) {
    std::vector<std::string> out;
    std::istringstream in(normalize_answer(text));
    for (std::string tok; in >> tok;) out.push_back(tok);
    return out;
}

}  // namespace

std::string normalize_answer(std::string_view text) {
    std::string lowered;
    lowered.reserve(text.size());
    for (char c : text) {
        const auto uc = static_cast<unsigned char>(c);
        if (std::ispunct(uc)) continue;
        lowered.push_back(static_cast<char>(std::tolower(uc)));
    }
    std::istringstream in(lowered);
    std::string out;
    for (std::string tok; in >> tok;) {
        if (tok == "a" || tok == "an" || tok == "the") continue;
        if (!out.empty()) out.push_back(' ');
        out += tok;
    }
    return out;
}

double token_f1(std::string_view predicted, const std::vector<std::string>& golds) {
    const auto pred = normalized_tokens(predicted);
    double best = 0.0;
    for (const auto& gold_text : golds) {
        const auto gold = normalized_tokens(gold_text);
        if (pred.empty() && gold.empty()) {
            best = std::max(best, 1.0);
            continue;
        }
        std::map<std::string, int> counts;
        for (const auto& t : gold) ++counts[t];
        int common = 0;
        for (const auto& t : pred) {
            auto it = counts.find(t);
            if (it != counts.end() && it->second > 0) {
                --it->second;
                ++common;
            }
        }
        if (common == 0) continue;
        const double p = static_cast<double>(common) / static_cast<double>(pred.size());
        const double r = static_cast<double>(common) / static_cast<double>(gold.size());
        best = std::max(best, 2.0 * p * r / (p + r));
    }
    return best;
}

bool exact_match(std::string_view predicted, const std::vector<std::string>& golds) {
    const auto p = normalize_answer(predicted);
    for (const auto& g : golds)
        if (normalize_answer(g) == p) return true;
    return false;
}

}  // namespace pathrouter::harness
