#include "pathrouter/simd/dot.hpp"

namespace pathrouter::simd::scalar {

double dot(const float* a, const float* b, std::size_t n) noexcept {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    return acc;
}

void dot_rows(const float* probe, const float* rows, std::size_t row_count, std::size_t dim,
              double* out) noexcept {
    for (std::size_t r = 0; r < row_count; ++r) out[r] = dot(probe, rows + r * dim, dim);
}

}  // namespace pathrouter::simd::scalar
