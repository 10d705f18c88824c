#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pathrouter/cache/embedding.hpp"
#include "pathrouter/core/path.hpp"
#include "pathrouter/rules/ruleset.hpp"

namespace pathrouter::cache {

/// One cached routing decision. Holds scores and the chosen path only; there
/// is deliberately no answer field.
struct CacheEntry {
    Embedding embedding;
    rules::PathScores scores;
    Path chosen_path = Path::DB;
    PriorityOrder priority;  ///< order active when the entry was inserted
    std::uint64_t insert_seq = 0;
    std::uint64_t last_hit_seq = 0;  ///< 0 until the first hit
};

struct CacheStats {
    std::uint64_t hits = 0;
    std::uint64_t misses = 0;
    std::uint64_t insertions = 0;
    std::uint64_t evictions = 0;
    std::size_t size = 0;
    std::size_t capacity = 0;
    std::size_t dimension = 0;

    std::uint64_t lookups() const noexcept { return hits + misses; }
};

struct CacheHit {
    CacheEntry entry;
    double similarity = 0.0;
};

/// Path-level meta-cache: exact nearest-neighbour lookup by cosine over a
/// contiguous embedding arena, least-recently-hit eviction.
///
/// Lookups run concurrently under a shared lock; insert/invalidate take the
/// exclusive lock. Counters are atomic.
class MetaCache {
public:
    static constexpr std::size_t kDefaultCapacity = 10'000;
    static constexpr double kDefaultTau = 0.90;

    explicit MetaCache(std::size_t dimension, std::size_t capacity = kDefaultCapacity);

    MetaCache(const MetaCache&) = delete;
    MetaCache& operator=(const MetaCache&) = delete;

    /// Best entry by cosine if it reaches `tau` (in (0, 1]); otherwise nullopt.
    /// Ties on similarity go to the older entry (smaller insert_seq).
    std::optional<CacheHit> lookup(const Embedding& z, double tau);

    /// Upserts: a bitwise-identical embedding replaces the existing entry in
    /// place. Otherwise evicts the least-recently-hit entry (ties: smallest
    /// insert_seq) when full.
    void insert(const Embedding& z, const rules::PathScores& scores, Path chosen,
                const PriorityOrder& priority = PriorityOrder{});

    /// Drops every entry; counters are kept.
    void invalidate_all();

    CacheStats stats() const;
    std::size_t size() const;
    std::size_t dimension() const noexcept { return dimension_; }
    std::size_t capacity() const noexcept { return capacity_; }

    /// Copy of all entries in arena order.
    std::vector<CacheEntry> entries() const;

    /// Binary snapshot (little-endian): header, counters, then per entry the
    /// embedding as f32, four i32 scores (DB, Doc, Hybrid, LLM), chosen path
    /// tag, priority tags, insert_seq, last_hit_seq. Fired-rule provenance is
    /// not persisted.
    std::string snapshot() const;
    void save(const std::filesystem::path& file) const;

    /// Replaces contents from a snapshot; throws DimensionMismatch if the
    /// snapshot dimension differs, SnapshotError if it is malformed.
    void restore(std::string_view bytes);
    void load(const std::filesystem::path& file);

    /// Builds a cache sized from the snapshot header.
    static std::unique_ptr<MetaCache> open(const std::filesystem::path& file);

private:
    struct Slot {
        rules::PathScores scores;
        Path chosen_path;
        PriorityOrder priority;
        std::uint64_t insert_seq;
        std::uint64_t last_hit_seq;
        double self_dot;
    };

    CacheEntry entry_at(std::size_t i) const;
    void erase_at(std::size_t i);
    std::optional<std::size_t> find_exact(const Embedding& z) const;

    std::size_t dimension_;
    std::size_t capacity_;

    mutable std::shared_mutex mutex_;
    std::vector<float> arena_;  ///< size() * dimension_ floats, row-major
    std::vector<Slot> slots_;
    std::unordered_map<std::uint64_t, std::size_t> index_by_seq_;
    std::uint64_t clock_ = 0;

    std::atomic<std::uint64_t> hits_{0};
    std::atomic<std::uint64_t> misses_{0};
    std::atomic<std::uint64_t> insertions_{0};
    std::atomic<std::uint64_t> evictions_{0};
};

}  // namespace pathrouter::cache
