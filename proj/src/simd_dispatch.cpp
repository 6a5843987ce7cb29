#include "speclab/simd_dispatch.hpp"

#include <atomic>
#include <stdexcept>

namespace speclab {

namespace {

std::atomic<SimdBackend> g_backend{SimdBackend::Auto};

bool runtime_cpu_ok() {
#if defined(SPECLAB_VECTOR_BATCH) && defined(__x86_64__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

}  // namespace

bool cpu_supports_vector_batch() {
    static const bool ok = runtime_cpu_ok();
    return ok;
}

void set_simd_backend(SimdBackend backend) {
    if (backend == SimdBackend::Vector && !cpu_supports_vector_batch()) {
        throw std::invalid_argument("vector batch backend not supported on this CPU/build");
    }
    g_backend.store(backend, std::memory_order_relaxed);
}

SimdBackend active_simd_backend() {
    const SimdBackend chosen = g_backend.load(std::memory_order_relaxed);
    if (chosen != SimdBackend::Auto) return chosen;
    return cpu_supports_vector_batch() ? SimdBackend::Vector : SimdBackend::Scalar;
}

const char* to_string(SimdBackend backend) {
    switch (backend) {
        case SimdBackend::Auto: return "auto";
        case SimdBackend::Scalar: return "scalar";
        case SimdBackend::Vector: return "vector";
    }
    return "unknown";
}

}  // namespace speclab
