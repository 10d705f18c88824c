#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Dot-product kernels behind the meta-cache's exact nearest-neighbour scan.
//
// All variants take float inputs and accumulate in double. Products of two
// floats are exact in double, so variants differ only by summation order
// (well below 1e-12 for unit vectors). The scalar kernels are the reference
// every vector kernel is tested against.

namespace pathrouter::simd {

enum class Isa { Scalar, Avx2, Neon };

std::string_view to_string(Isa isa) noexcept;

using DotFn = double (*)(const float* a, const float* b, std::size_t n) noexcept;
/// out[r] = <probe, rows[r*dim .. r*dim+dim)> for r in [0, row_count).
using DotRowsFn = void (*)(const float* probe, const float* rows, std::size_t row_count,
                           std::size_t dim, double* out) noexcept;

struct Kernels {
    Isa isa;
    DotFn dot;
    DotRowsFn dot_rows;
};

/// True if the variant was compiled in and the running CPU supports it.
bool supported(Isa isa) noexcept;

/// Kernel table for a specific variant; falls back to scalar when unsupported.
const Kernels& kernels_for(Isa isa) noexcept;

/// Best supported variant, resolved once. PATHROUTER_SIMD=scalar|avx2|neon
/// overrides the choice when the requested variant is supported.
const Kernels& active() noexcept;

double dot(std::span<const float> a, std::span<const float> b) noexcept;
void dot_rows(std::span<const float> probe, std::span<const float> rows, std::size_t dim,
              std::span<double> out) noexcept;

namespace scalar {
double dot(const float* a, const float* b, std::size_t n) noexcept;
void dot_rows(const float* probe, const float* rows, std::size_t row_count, std::size_t dim,
              double* out) noexcept;
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define PATHROUTER_SIMD_X86 1
namespace avx2 {
double dot(const float* a, const float* b, std::size_t n) noexcept;
void dot_rows(const float* probe, const float* rows, std::size_t row_count, std::size_t dim,
              double* out) noexcept;
}  // namespace avx2
#endif

#if defined(__aarch64__)
#define PATHROUTER_SIMD_NEON 1
namespace neon {
double dot(const float* a, const float* b, std::size_t n) noexcept;
void dot_rows(const float* probe, const float* rows, std::size_t row_count, std::size_t dim,
              double* out) noexcept;
}  // namespace neon
#endif

}  // namespace pathrouter::simd
