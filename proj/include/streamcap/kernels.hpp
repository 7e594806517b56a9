#pragma once

#include <cstddef>

namespace streamcap::kernels {

// Numeric primitives with scalar reference implementations and SIMD variants
// selected at runtime. All variants must agree within floating-point
// reassociation tolerance; the scalar path is the semantic reference.
struct Backend {
    const char* name;
    // out[k] = sum_i a[i]*b[k-i] for k in [0, na+nb-2]; writes all na+nb-1 slots
    void (*conv_full)(const double* a, std::size_t na, const double* b, std::size_t nb,
                      double* out);
    double (*dot)(const double* x, const double* y, std::size_t n);
    double (*sum)(const double* x, std::size_t n);
    // sum of squared deviations from m
    double (*sumsq_dev)(const double* x, std::size_t n, double m);
};

const Backend& scalar_backend();
// Picks the best backend for the host at first call; honours
// STREAMCAP_FORCE_SCALAR=1 in the environment.
const Backend& active_backend();

inline void conv_full(const double* a, std::size_t na, const double* b, std::size_t nb,
                      double* out) {
    active_backend().conv_full(a, na, b, nb, out);
}
inline double dot(const double* x, const double* y, std::size_t n) {
    return active_backend().dot(x, y, n);
}
inline double sum(const double* x, std::size_t n) { return active_backend().sum(x, n); }
inline double sumsq_dev(const double* x, std::size_t n, double m) {
    return active_backend().sumsq_dev(x, n, m);
}

}  // namespace streamcap::kernels
