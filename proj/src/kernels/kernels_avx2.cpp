#ifdef STREAMCAP_HAVE_AVX2

#include <immintrin.h>

#include <cstring>

#include "backends.hpp"

namespace streamcap::kernels {
namespace {

void conv_full_avx2(const double* a, std::size_t na, const double* b, std::size_t nb,
                    double* out) {
    std::memset(out, 0, (na + nb - 1) * sizeof(double));
    for (std::size_t i = 0; i < na; ++i) {
        const double ai = a[i];
        if (ai == 0.0) continue;
        const __m256d va = _mm256_set1_pd(ai);
        double* o = out + i;
        std::size_t j = 0;
        for (; j + 4 <= nb; j += 4) {
            __m256d vo = _mm256_loadu_pd(o + j);
            vo = _mm256_fmadd_pd(va, _mm256_loadu_pd(b + j), vo);
            _mm256_storeu_pd(o + j, vo);
        }
        for (; j < nb; ++j) o[j] += ai * b[j];
    }
}

double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc);
    double tail = 0.0;
    for (; i < n; ++i) tail += x[i] * y[i];
    return hsum(acc) + tail;
}

double sum_avx2(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    double tail = 0.0;
    for (; i < n; ++i) tail += x[i];
    return hsum(acc) + tail;
}

double sumsq_dev_avx2(const double* x, std::size_t n, double m) {
    const __m256d vm = _mm256_set1_pd(m);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), vm);
        acc = _mm256_fmadd_pd(d, d, acc);
    }
    double tail = 0.0;
    for (; i < n; ++i) {
        const double d = x[i] - m;
        tail += d * d;
    }
    return hsum(acc) + tail;
}

}  // namespace

bool avx2_supported() {
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

const Backend kAvx2Backend = {"avx2", conv_full_avx2, dot_avx2, sum_avx2,
                              sumsq_dev_avx2};

}  // namespace streamcap::kernels

#endif  // STREAMCAP_HAVE_AVX2
