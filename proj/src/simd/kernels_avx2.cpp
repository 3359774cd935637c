// Compiled with -mavx2. Only reached after a runtime CPU check.

#include <immintrin.h>

#include "subalign/simd.hpp"

namespace subalign::simd {

namespace {

constexpr std::size_t kLanes = 4;

void accumulate(double* acc, const double* x, std::size_t n) {
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        _mm256_storeu_pd(acc + i, _mm256_add_pd(_mm256_loadu_pd(acc + i), _mm256_loadu_pd(x + i)));
    }
    for (; i < n; ++i) acc[i] += x[i];
}

void accumulate_sq_dev(double* acc, const double* x, const double* mean, std::size_t n) {
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(mean + i));
        _mm256_storeu_pd(acc + i, _mm256_add_pd(_mm256_loadu_pd(acc + i), _mm256_mul_pd(d, d)));
    }
    for (; i < n; ++i) {
        const double d = x[i] - mean[i];
        acc[i] += d * d;
    }
}

void standardize(double* out, const double* x, const double* mean, const double* sd, double floor,
                 std::size_t n) {
    const __m256d vfloor = _mm256_set1_pd(floor);
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        const __m256d s = _mm256_loadu_pd(sd + i);
        const __m256d z = _mm256_div_pd(_mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(mean + i)), s);
        const __m256d degenerate = _mm256_cmp_pd(s, vfloor, _CMP_LT_OQ);
        _mm256_storeu_pd(out + i, _mm256_blendv_pd(z, zero, degenerate));
    }
    for (; i < n; ++i) out[i] = sd[i] < floor ? 0.0 : (x[i] - mean[i]) / sd[i];
}

void replace_negatives(double* out, const double* x, double replacement, std::size_t n) {
    const __m256d repl = _mm256_set1_pd(replacement);
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        const __m256d v = _mm256_loadu_pd(x + i);
        _mm256_storeu_pd(out + i, _mm256_blendv_pd(v, repl, _mm256_cmp_pd(v, zero, _CMP_LT_OQ)));
    }
    for (; i < n; ++i) out[i] = x[i] < 0.0 ? replacement : x[i];
}

void add(double* out, const double* a, const double* b, std::size_t n) {
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    }
    for (; i < n; ++i) out[i] = a[i] + b[i];
}

void split_scores(double* out, const double* hi0, const double* lo0, double base0, const double* hi1,
                  const double* lo1, double base1, std::size_t n) {
    const __m256d b0 = _mm256_set1_pd(base0);
    const __m256d b1 = _mm256_set1_pd(base1);
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        const __m256d first =
            _mm256_sub_pd(_mm256_sub_pd(_mm256_loadu_pd(hi0 + i), _mm256_loadu_pd(lo0 + i)), b0);
        const __m256d second =
            _mm256_sub_pd(b1, _mm256_sub_pd(_mm256_loadu_pd(hi1 + i), _mm256_loadu_pd(lo1 + i)));
        _mm256_storeu_pd(out + i, _mm256_add_pd(first, second));
    }
    for (; i < n; ++i) out[i] = ((hi0[i] - lo0[i]) - base0) + (base1 - (hi1[i] - lo1[i]));
}

double dot(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 * kLanes <= n; i += 2 * kLanes) {
        acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
        acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(_mm256_loadu_pd(a + i + kLanes),
                                                 _mm256_loadu_pd(b + i + kLanes)));
    }
    alignas(32) double lanes[kLanes];
    _mm256_store_pd(lanes, _mm256_add_pd(acc0, acc1));
    double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

} // namespace

namespace detail {
const Kernels avx2_kernels{
    Backend::avx2, accumulate, accumulate_sq_dev, standardize, replace_negatives,
    add,           split_scores, dot,
};
} // namespace detail

} // namespace subalign::simd
