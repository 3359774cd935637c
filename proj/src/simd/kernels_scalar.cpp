#include "subalign/simd.hpp"

namespace subalign::simd {

namespace {

void accumulate(double* acc, const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) acc[i] += x[i];
}

void accumulate_sq_dev(double* acc, const double* x, const double* mean, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double d = x[i] - mean[i];
        acc[i] += d * d;
    }
}

void standardize(double* out, const double* x, const double* mean, const double* sd, double floor,
                 std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = sd[i] < floor ? 0.0 : (x[i] - mean[i]) / sd[i];
}

void replace_negatives(double* out, const double* x, double replacement, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i] < 0.0 ? replacement : x[i];
}

void add(double* out, const double* a, const double* b, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void split_scores(double* out, const double* hi0, const double* lo0, double base0, const double* hi1,
                  const double* lo1, double base1, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = ((hi0[i] - lo0[i]) - base0) + (base1 - (hi1[i] - lo1[i]));
    }
}

double dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

} // namespace

namespace detail {
const Kernels scalar_kernels{
    Backend::scalar, accumulate, accumulate_sq_dev, standardize, replace_negatives,
    add,             split_scores, dot,
};
} // namespace detail

} // namespace subalign::simd
