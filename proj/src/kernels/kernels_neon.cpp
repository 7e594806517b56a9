#ifdef STREAMCAP_HAVE_NEON

#include <arm_neon.h>

#include <cstring>

#include "backends.hpp"

namespace streamcap::kernels {
namespace {

void conv_full_neon(const double* a, std::size_t na, const double* b, std::size_t nb,
                    double* out) {
    std::memset(out, 0, (na + nb - 1) * sizeof(double));
    for (std::size_t i = 0; i < na; ++i) {
        const double ai = a[i];
        if (ai == 0.0) continue;
        const float64x2_t va = vdupq_n_f64(ai);
        double* o = out + i;
        std::size_t j = 0;
        for (; j + 2 <= nb; j += 2) {
            float64x2_t vo = vld1q_f64(o + j);
            vo = vfmaq_f64(vo, va, vld1q_f64(b + j));
            vst1q_f64(o + j, vo);
        }
        for (; j < nb; ++j) o[j] += ai * b[j];
    }
}

double dot_neon(const double* x, const double* y, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) acc = vfmaq_f64(acc, vld1q_f64(x + i), vld1q_f64(y + i));
    double tail = 0.0;
    for (; i < n; ++i) tail += x[i] * y[i];
    return vaddvq_f64(acc) + tail;
}

double sum_neon(const double* x, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vld1q_f64(x + i));
    double tail = 0.0;
    for (; i < n; ++i) tail += x[i];
    return vaddvq_f64(acc) + tail;
}

double sumsq_dev_neon(const double* x, std::size_t n, double m) {
    const float64x2_t vm = vdupq_n_f64(m);
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t d = vsubq_f64(vld1q_f64(x + i), vm);
        acc = vfmaq_f64(acc, d, d);
    }
    double tail = 0.0;
    for (; i < n; ++i) {
        const double d = x[i] - m;
        tail += d * d;
    }
    return vaddvq_f64(acc) + tail;
}

}  // namespace

const Backend kNeonBackend = {"neon", conv_full_neon, dot_neon, sum_neon,
                              sumsq_dev_neon};

}  // namespace streamcap::kernels

#endif  // STREAMCAP_HAVE_NEON
