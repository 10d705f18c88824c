#include <cstdlib>
#include <string>

#include "pathrouter/core/text.hpp"
#include "pathrouter/simd/dot.hpp"

namespace pathrouter::simd {

namespace {

constexpr Kernels kScalar{Isa::Scalar, &scalar::dot, &scalar::dot_rows};
#if defined(PATHROUTER_SIMD_X86)
constexpr Kernels kAvx2{Isa::Avx2, &avx2::dot, &avx2::dot_rows};
#endif
#if defined(PATHROUTER_SIMD_NEON)
constexpr Kernels kNeon{Isa::Neon, &neon::dot, &neon::dot_rows};
#endif

const Kernels& resolve() noexcept {
    if (const char* env = std::getenv("PATHROUTER_SIMD")) {
        const std::string want = text::to_lower(env);
        if (want == "scalar") return kScalar;
        if (want == "avx2" && supported(Isa::Avx2)) return kernels_for(Isa::Avx2);
        if (want == "neon" && supported(Isa::Neon)) return kernels_for(Isa::Neon);
    }
    if (supported(Isa::Avx2)) return kernels_for(Isa::Avx2);
    if (supported(Isa::Neon)) return kernels_for(Isa::Neon);
    return kScalar;
}

}  // namespace

std::string_view to_string(Isa isa) noexcept {
    switch (isa) {
        case Isa::Scalar: return "scalar";
        case Isa::Avx2: return "avx2";
        case Isa::Neon: return "neon";
    }
    return "?";
}

bool supported(Isa isa) noexcept {
    switch (isa) {
        case Isa::Scalar: return true;
        case Isa::Avx2:
#if defined(PATHROUTER_SIMD_X86) && (defined(__GNUC__) || defined(__clang__))
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
        case Isa::Neon:
#if defined(PATHROUTER_SIMD_NEON)
            return true;
#else
            return false;
#endif
    }
    return false;
}

const Kernels& kernels_for(Isa isa) noexcept {
    if (!supported(isa)) return kScalar;
    switch (isa) {
#if defined(PATHROUTER_SIMD_X86)
        case Isa::Avx2: return kAvx2;
#endif
#if defined(PATHROUTER_SIMD_NEON)
        case Isa::Neon: return kNeon;
#endif
        default: return kScalar;
    }
}

const Kernels& active() noexcept {
    static const Kernels& k = resolve();
    return k;
}

double dot(std::span<const float> a, std::span<const float> b) noexcept {
    const auto n = a.size() < b.size() ? a.size() : b.size();
    return active().dot(a.data(), b.data(), n);
}

void dot_rows(std::span<const float> probe, std::span<const float> rows, std::size_t dim,
              std::span<double> out) noexcept {
    if (dim == 0) return;
    std::size_t count = rows.size() / dim;
    if (out.size() < count) count = out.size();
    active().dot_rows(probe.data(), rows.data(), count, dim, out.data());
}

}  // namespace pathrouter::simd
