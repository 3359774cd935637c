#include <cstdlib>
#include <string>

#include "subalign/error.hpp"
#include "subalign/simd.hpp"

namespace subalign::simd {

namespace {

#if defined(__x86_64__) || defined(_M_X64)
constexpr bool kHaveAvx2Build = true;
#else
constexpr bool kHaveAvx2Build = false;
#endif

thread_local const Kernels* tls_override = nullptr;

const Kernels& widest() {
    return supported(Backend::avx2) ? kernels_for(Backend::avx2) : detail::scalar_kernels;
}

const Kernels& process_default() {
    static const Kernels& chosen = [] () -> const Kernels& {
        if (const char* env = std::getenv("SUBALIGN_SIMD"); env && *env) {
            if (const auto b = backend_from_string(env); b && supported(*b)) return kernels_for(*b);
        }
        return widest();
    }();
    return chosen;
}

} // namespace

std::string_view to_string(Backend b) noexcept {
    switch (b) {
    case Backend::scalar: return "scalar";
    case Backend::avx2: return "avx2";
    }
    return "unknown";
}

std::optional<Backend> backend_from_string(std::string_view name) noexcept {
    if (name == "scalar") return Backend::scalar;
    if (name == "avx2") return Backend::avx2;
    return std::nullopt;
}

bool supported(Backend b) noexcept {
    switch (b) {
    case Backend::scalar: return true;
    case Backend::avx2:
#if defined(__x86_64__) || defined(_M_X64)
        return kHaveAvx2Build && __builtin_cpu_supports("avx2");
#else
        return false;
#endif
    }
    return false;
}

const Kernels& kernels_for(Backend b) {
    if (!supported(b)) {
        throw ValidationError("SIMD backend '" + std::string(to_string(b)) + "' not supported on this CPU");
    }
#if defined(__x86_64__) || defined(_M_X64)
    if (b == Backend::avx2) return detail::avx2_kernels;
#endif
    return detail::scalar_kernels;
}

const Kernels& kernels() { return tls_override ? *tls_override : process_default(); }

Backend active_backend() { return kernels().backend; }

ScopedBackend::ScopedBackend(Backend b) : previous_(tls_override) { tls_override = &kernels_for(b); }

ScopedBackend::~ScopedBackend() { tls_override = previous_; }

} // namespace subalign::simd
