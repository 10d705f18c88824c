#include "pathrouter/cache/meta_cache.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <mutex>

#include "pathrouter/core/error.hpp"
#include "pathrouter/core/jsonl.hpp"
#include "pathrouter/simd/dot.hpp"

namespace pathrouter::cache {

namespace {

constexpr char kMagic[4] = {'P', 'R', 'M', 'C'};
constexpr std::uint32_t kFormatVersion = 1;

template <typename T>
void put(std::string& out, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    out.append(reinterpret_cast<const char*>(bytes), sizeof(T));
}

class ByteReader {
public:
    explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

    template <typename T>
    T get() {
        if (pos_ + sizeof(T) > bytes_.size()) throw Error(ErrorCode::SnapshotError, "snapshot truncated");
        unsigned char raw[sizeof(T)];
        std::memcpy(raw, bytes_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
        T value;
        std::memcpy(&value, raw, sizeof(T));
        return value;
    }

    bool done() const noexcept { return pos_ == bytes_.size(); }

private:
    std::string_view bytes_;
    std::size_t pos_ = 0;
};

Path path_from_tag(std::uint8_t tag) {
    if (tag >= kPathCount) throw Error(ErrorCode::SnapshotError, "bad path tag");
    return static_cast<Path>(tag);
}

}  // namespace

MetaCache::MetaCache(std::size_t dimension, std::size_t capacity) : dimension_(dimension), capacity_(capacity) {
    if (dimension_ == 0) throw Error(ErrorCode::ConfigError, "cache dimension must be positive");
    if (capacity_ == 0) throw Error(ErrorCode::ConfigError, "cache capacity must be positive");
}

CacheEntry MetaCache::entry_at(std::size_t i) const {
    std::vector<float> v(arena_.begin() + static_cast<std::ptrdiff_t>(i * dimension_),
                         arena_.begin() + static_cast<std::ptrdiff_t>((i + 1) * dimension_));
    const auto& s = slots_[i];
    return CacheEntry{Embedding::from_unit(std::move(v)), s.scores, s.chosen_path, s.priority, s.insert_seq,
                      s.last_hit_seq};
}

std::optional<CacheHit> MetaCache::lookup(const Embedding& z, double tau) {
    if (!(tau > 0.0 && tau <= 1.0)) throw Error(ErrorCode::ConfigError, "tau must lie in (0, 1]");
    if (z.dimension() != dimension_) {
        throw Error(ErrorCode::DimensionMismatch,
                    "probe has " + std::to_string(z.dimension()) + " components, cache " + std::to_string(dimension_));
    }

    std::optional<CacheHit> hit;
    {
        std::shared_lock lock(mutex_);
        const std::size_t n = slots_.size();
        if (n > 0) {
            std::vector<double> dots(n);
            simd::active().dot_rows(z.values().data(), arena_.data(), n, dimension_, dots.data());
            std::size_t best = 0;
            double best_sim = -2.0;
            for (std::size_t i = 0; i < n; ++i) {
                double sim = dots[i] / std::sqrt(z.self_dot() * slots_[i].self_dot);
                sim = std::clamp(sim, -1.0, 1.0);
                if (sim > best_sim || (sim == best_sim && slots_[i].insert_seq < slots_[best].insert_seq)) {
                    best = i;
                    best_sim = sim;
                }
            }
            if (best_sim >= tau) hit = CacheHit{entry_at(best), best_sim};
        }
    }

    if (!hit) {
        misses_.fetch_add(1, std::memory_order_relaxed);
        return std::nullopt;
    }
    hits_.fetch_add(1, std::memory_order_relaxed);
    {
        std::unique_lock lock(mutex_);
        if (auto it = index_by_seq_.find(hit->entry.insert_seq); it != index_by_seq_.end()) {
            slots_[it->second].last_hit_seq = ++clock_;
            hit->entry.last_hit_seq = slots_[it->second].last_hit_seq;
        }
    }
    return hit;
}

std::optional<std::size_t> MetaCache::find_exact(const Embedding& z) const {
    const auto bytes = dimension_ * sizeof(float);
    for (std::size_t i = 0; i < slots_.size(); ++i) {
        if (std::memcmp(arena_.data() + i * dimension_, z.values().data(), bytes) == 0) return i;
    }
    return std::nullopt;
}

void MetaCache::erase_at(std::size_t i) {
    const std::size_t last = slots_.size() - 1;
    index_by_seq_.erase(slots_[i].insert_seq);
    if (i != last) {
        std::copy_n(arena_.begin() + static_cast<std::ptrdiff_t>(last * dimension_), dimension_,
                    arena_.begin() + static_cast<std::ptrdiff_t>(i * dimension_));
        slots_[i] = std::move(slots_[last]);
        index_by_seq_[slots_[i].insert_seq] = i;
    }
    slots_.pop_back();
    arena_.resize(slots_.size() * dimension_);
}

void MetaCache::insert(const Embedding& z, const rules::PathScores& scores, Path chosen,
                       const PriorityOrder& priority) {
    if (z.dimension() != dimension_) {
        throw Error(ErrorCode::DimensionMismatch,
                    "entry has " + std::to_string(z.dimension()) + " components, cache " + std::to_string(dimension_));
    }
    std::unique_lock lock(mutex_);
    if (auto existing = find_exact(z)) {
        auto& s = slots_[*existing];
        s.scores = scores;
        s.chosen_path = chosen;
        s.priority = priority;
        insertions_.fetch_add(1, std::memory_order_relaxed);
        return;
    }
    if (slots_.size() >= capacity_) {
        std::size_t victim = 0;
        for (std::size_t i = 1; i < slots_.size(); ++i) {
            const auto& a = slots_[i];
            const auto& b = slots_[victim];
            if (a.last_hit_seq < b.last_hit_seq || (a.last_hit_seq == b.last_hit_seq && a.insert_seq < b.insert_seq))
                victim = i;
        }
        erase_at(victim);
        evictions_.fetch_add(1, std::memory_order_relaxed);
    }
    const std::uint64_t seq = ++clock_;
    arena_.insert(arena_.end(), z.values().begin(), z.values().end());
    slots_.push_back(Slot{scores, chosen, priority, seq, 0, z.self_dot()});
    index_by_seq_[seq] = slots_.size() - 1;
    insertions_.fetch_add(1, std::memory_order_relaxed);
}

void MetaCache::invalidate_all() {
    std::unique_lock lock(mutex_);
    arena_.clear();
    slots_.clear();
    index_by_seq_.clear();
}

CacheStats MetaCache::stats() const {
    CacheStats s;
    s.hits = hits_.load();
    s.misses = misses_.load();
    s.insertions = insertions_.load();
    s.evictions = evictions_.load();
    s.size = size();
    s.capacity = capacity_;
    s.dimension = dimension_;
    return s;
}

std::size_t MetaCache::size() const {
    std::shared_lock lock(mutex_);
    return slots_.size();
}

std::vector<CacheEntry> MetaCache::entries() const {
    std::shared_lock lock(mutex_);
    std::vector<CacheEntry> out;
    out.reserve(slots_.size());
    for (std::size_t i = 0; i < slots_.size(); ++i) out.push_back(entry_at(i));
    return out;
}

std::string MetaCache::snapshot() const {
    std::shared_lock lock(mutex_);
    std::string out(kMagic, sizeof kMagic);
    put<std::uint32_t>(out, kFormatVersion);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(dimension_));
    put<std::uint64_t>(out, capacity_);
    put<std::uint64_t>(out, clock_);
    put<std::uint64_t>(out, hits_.load());
    put<std::uint64_t>(out, misses_.load());
    put<std::uint64_t>(out, insertions_.load());
    put<std::uint64_t>(out, evictions_.load());
    put<std::uint64_t>(out, slots_.size());
    for (std::size_t i = 0; i < slots_.size(); ++i) {
        for (std::size_t d = 0; d < dimension_; ++d) put<float>(out, arena_[i * dimension_ + d]);
        const auto& s = slots_[i];
        for (Path p : kAllPaths) put<std::int32_t>(out, s.scores[p]);
        put<std::uint8_t>(out, static_cast<std::uint8_t>(s.chosen_path));
        for (Path p : s.priority.order()) put<std::uint8_t>(out, static_cast<std::uint8_t>(p));
        put<std::uint64_t>(out, s.insert_seq);
        put<std::uint64_t>(out, s.last_hit_seq);
    }
    return out;
}

void MetaCache::save(const std::filesystem::path& file) const { jsonl::write_file(file, snapshot()); }

void MetaCache::restore(std::string_view bytes) {
    if (bytes.size() < sizeof kMagic || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0)
        throw Error(ErrorCode::SnapshotError, "not a meta-cache snapshot");
    ByteReader in(bytes.substr(sizeof kMagic));
    if (in.get<std::uint32_t>() != kFormatVersion) throw Error(ErrorCode::SnapshotError, "unsupported snapshot version");
    const auto dim = in.get<std::uint32_t>();
    if (dim != dimension_) {
        throw Error(ErrorCode::DimensionMismatch,
                    "snapshot dimension " + std::to_string(dim) + ", cache " + std::to_string(dimension_));
    }
    in.get<std::uint64_t>();  // capacity recorded at save time; the live capacity wins
    const auto clock = in.get<std::uint64_t>();
    const auto hits = in.get<std::uint64_t>();
    const auto misses = in.get<std::uint64_t>();
    const auto insertions = in.get<std::uint64_t>();
    const auto evictions = in.get<std::uint64_t>();
    const auto count = in.get<std::uint64_t>();
    if (count > capacity_) throw Error(ErrorCode::SnapshotError, "snapshot holds more entries than the capacity");

    std::vector<float> arena;
    std::vector<Slot> slots;
    std::unordered_map<std::uint64_t, std::size_t> index;
    for (std::uint64_t i = 0; i < count; ++i) {
        std::vector<float> v(dim);
        for (auto& x : v) x = in.get<float>();
        Embedding e = Embedding::from_unit(std::move(v));
        rules::PathScores scores;
        for (Path p : kAllPaths) scores.scores[p] = in.get<std::int32_t>();
        const Path chosen = path_from_tag(in.get<std::uint8_t>());
        std::array<Path, kPathCount> order{};
        for (auto& p : order) p = path_from_tag(in.get<std::uint8_t>());
        auto priority = PriorityOrder::from(order);
        if (!priority) throw Error(ErrorCode::SnapshotError, "priority tags are not a permutation");
        const auto insert_seq = in.get<std::uint64_t>();
        const auto last_hit = in.get<std::uint64_t>();
        if (!index.emplace(insert_seq, slots.size()).second)
            throw Error(ErrorCode::SnapshotError, "duplicate insert_seq");
        arena.insert(arena.end(), e.values().begin(), e.values().end());
        slots.push_back(Slot{std::move(scores), chosen, *priority, insert_seq, last_hit, e.self_dot()});
    }
    if (!in.done()) throw Error(ErrorCode::SnapshotError, "trailing bytes after snapshot");

    std::unique_lock lock(mutex_);
    arena_ = std::move(arena);
    slots_ = std::move(slots);
    index_by_seq_ = std::move(index);
    clock_ = clock;
    hits_ = hits;
    misses_ = misses;
    insertions_ = insertions;
    evictions_ = evictions;
}

void MetaCache::load(const std::filesystem::path& file) { restore(jsonl::read_file(file)); }

std::unique_ptr<MetaCache> MetaCache::open(const std::filesystem::path& file) {
    const std::string bytes = jsonl::read_file(file);
    if (bytes.size() < sizeof kMagic || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0)
        throw Error(ErrorCode::SnapshotError, "not a meta-cache snapshot");
    ByteReader in(std::string_view(bytes).substr(sizeof kMagic));
    in.get<std::uint32_t>();
    const auto dim = in.get<std::uint32_t>();
    const auto capacity = in.get<std::uint64_t>();
    auto cache = std::make_unique<MetaCache>(dim, static_cast<std::size_t>(capacity));
    cache->restore(bytes);
    return cache;
}

}  // namespace pathrouter::cache
