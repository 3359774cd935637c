#pragma once

// Data-parallel inner loops used by the preprocessing and scoring code.
//
// Every kernel has a scalar reference version and, on x86-64, an AVX2 version
// picked at runtime. Element-wise kernels perform the same IEEE operations per
// element in both versions and are bit-identical; `dot` reassociates the sum
// and only agrees to rounding.

#include <cstddef>
#include <optional>
#include <string_view>

namespace subalign::simd {

enum class Backend { scalar, avx2 };

std::string_view to_string(Backend b) noexcept;
std::optional<Backend> backend_from_string(std::string_view name) noexcept;

struct Kernels {
    Backend backend;

    // acc[i] += x[i]
    void (*accumulate)(double* acc, const double* x, std::size_t n);
    // acc[i] += (x[i] - mean[i])^2
    void (*accumulate_sq_dev)(double* acc, const double* x, const double* mean, std::size_t n);
    // out[i] = sd[i] < floor ? 0 : (x[i] - mean[i]) / sd[i]
    void (*standardize)(double* out, const double* x, const double* mean, const double* sd,
                        double floor, std::size_t n);
    // out[i] = x[i] < 0 ? replacement : x[i]
    void (*replace_negatives)(double* out, const double* x, double replacement, std::size_t n);
    // out[i] = a[i] + b[i]
    void (*add)(double* out, const double* a, const double* b, std::size_t n);
    // out[i] = ((hi0[i] - lo0[i]) - base0) + (base1 - (hi1[i] - lo1[i]))
    // Difference of two prefix-table rows minus a constant, plus a constant
    // minus another row difference: the two rectangle sums of a split score.
    void (*split_scores)(double* out, const double* hi0, const double* lo0, double base0,
                         const double* hi1, const double* lo1, double base1, std::size_t n);
    double (*dot)(const double* a, const double* b, std::size_t n);
};

bool supported(Backend b) noexcept;

// Kernels for a specific backend; throws ValidationError if the CPU lacks it.
const Kernels& kernels_for(Backend b);

// Active kernels: the thread's override if set, else SUBALIGN_SIMD from the
// environment, else the widest supported backend.
const Kernels& kernels();
Backend active_backend();

// Forces a backend on the current thread for the guard's lifetime.
class ScopedBackend {
public:
    explicit ScopedBackend(Backend b);
    ~ScopedBackend();
    ScopedBackend(const ScopedBackend&) = delete;
    ScopedBackend& operator=(const ScopedBackend&) = delete;

private:
    const Kernels* previous_;
};

namespace detail {
extern const Kernels scalar_kernels;
#if defined(__x86_64__) || defined(_M_X64)
extern const Kernels avx2_kernels;
#endif
} // namespace detail

} // namespace subalign::simd
