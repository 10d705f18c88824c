#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace pathrouter {

/// The four augmentation paths a query can be routed to.
enum class Path : std::uint8_t { DB = 0, Doc = 1, Hybrid = 2, LLM = 3 };

inline constexpr std::size_t kPathCount = 4;
inline constexpr std::array<Path, kPathCount> kAllPaths{Path::DB, Path::Doc, Path::Hybrid, Path::LLM};

constexpr std::size_t index_of(Path p) noexcept { return static_cast<std::size_t>(p); }

std::string_view to_string(Path p) noexcept;

/// Accepts the canonical names ("DB", "Doc", "Hybrid", "LLM") case-insensitively,
/// plus "basic" as an alias for LLM.
std::optional<Path> parse_path(std::string_view name) noexcept;

/// Dense map with one slot per path.
template <typename T>
struct PathMap {
    std::array<T, kPathCount> values{};

    T& operator[](Path p) noexcept { return values[index_of(p)]; }
    const T& operator[](Path p) const noexcept { return values[index_of(p)]; }

    bool operator==(const PathMap&) const = default;
};

/// Tie-break order over paths; always a permutation of all four members.
class PriorityOrder {
public:
    /// Default order: DB, Doc, Hybrid, LLM.
    PriorityOrder() noexcept;

    /// Returns nullopt unless `order` contains every path exactly once.
    static std::optional<PriorityOrder> from(const std::array<Path, kPathCount>& order) noexcept;

    const std::array<Path, kPathCount>& order() const noexcept { return order_; }
    Path head() const noexcept { return order_[0]; }
    std::size_t rank(Path p) const noexcept;

    bool operator==(const PriorityOrder&) const = default;

private:
    explicit PriorityOrder(const std::array<Path, kPathCount>& order) noexcept : order_(order) {}
    std::array<Path, kPathCount> order_;
};

}  // namespace pathrouter
