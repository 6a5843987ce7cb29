#ifndef SPECLAB_SIMD_DISPATCH_HH
#define SPECLAB_SIMD_DISPATCH_HH

/// \file simd_dispatch.hpp
/// Runtime selection between the scalar reference kernels and the wide
/// (AVX2) batch kernels. The wide path is only a throughput variant: the
/// scalar implementations are the semantic reference, and the equivalence
/// suite pins the two to a tight relative tolerance.

namespace speclab {

enum class SimdBackend {
    Auto,    // pick Vector when the CPU supports it, else Scalar
    Scalar,  // force the reference implementation
    Vector,  // force the wide implementation (throws if unsupported)
};

/// True when the running CPU supports the wide batch kernels.
bool cpu_supports_vector_batch();

/// Select the batch backend process-wide. Auto is the default.
/// @throws std::invalid_argument when Vector is requested but unsupported.
void set_simd_backend(SimdBackend backend);

/// Backend batches will actually use right now (never Auto).
SimdBackend active_simd_backend();

const char* to_string(SimdBackend backend);

}  // namespace speclab

#endif  // SPECLAB_SIMD_DISPATCH_HH
