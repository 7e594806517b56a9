#include <cstring>

#include "backends.hpp"

namespace streamcap::kernels {
namespace {

void conv_full_scalar(const double* a, std::size_t na, const double* b, std::size_t nb,
                      double* out) {
    std::memset(out, 0, (na + nb - 1) * sizeof(double));
    for (std::size_t i = 0; i < na; ++i) {
        const double ai = a[i];
        if (ai == 0.0) continue;
        double* o = out + i;
        for (std::size_t j = 0; j < nb; ++j) o[j] += ai * b[j];
    }
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

double sum_scalar(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

double sumsq_dev_scalar(const double* x, std::size_t n, double m) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = x[i] - m;
        acc += d * d;
    }
    return acc;
}

}  // namespace

const Backend kScalarBackend = {"scalar", conv_full_scalar, dot_scalar, sum_scalar,
                                sumsq_dev_scalar};

}  // namespace streamcap::kernels
