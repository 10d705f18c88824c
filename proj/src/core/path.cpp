#include "pathrouter/core/path.hpp"

#include "pathrouter/core/text.hpp"

namespace pathrouter {

std::string_view to_string(Path p) noexcept {
    switch (p) {
        case Path::DB: return "DB";
        case Path::Doc: return "Doc";
        case Path::Hybrid: return "Hybrid";
        case Path::LLM: return "LLM";
    }
    return "?";
}

std::optional<Path> parse_path(std::string_view name) noexcept {
    const std::string lower = text::to_lower(name);
    if (lower == "db") return Path::DB;
    if (lower == "doc") return Path::Doc;
    if (lower == "hybrid") return Path::Hybrid;
    if (lower == "llm" || lower == "basic") return Path::LLM;
    return std::nullopt;
}

PriorityOrder::PriorityOrder() noexcept : order_(kAllPaths) {}

std::optional<PriorityOrder> PriorityOrder::from(const std::array<Path, kPathCount>& order) noexcept {
    std::array<bool, kPathCount> seen{};
    for (Path p : order) {
        const auto i = index_of(p);
        if (i >= kPathCount || seen[i]) return std::nullopt;
        seen[i] = true;
    }
    return PriorityOrder(order);
}

std::size_t PriorityOrder::rank(Path p) const noexcept {
    for (std::size_t i = 0; i < kPathCount; ++i) {
        if (order_[i] == p) return i;
    }
    return kPathCount;
}

}  // namespace pathrouter
