#ifndef SPECLAB_WAVE_KERNELS_HH
#define SPECLAB_WAVE_KERNELS_HH

/// \file wave_kernels.hpp
/// Double-(diffusion-)waves kernels in frequency space.
///
/// The building block is the radial multiplier
///
///     m(t, r) = [ l1 sin(beta1 r t)/(beta1 r) e^{-c1 r^2 t}
///               - l2 sin(beta2 r t)/(beta2 r) e^{-c2 r^2 t} ] r^{-sigma},
///
/// which covers the five named kernels G0..G4, the single diffusion wave
/// (l2 = 0) and the classical wave (l2 = 0, c1 = 0) as parameter presets.
/// Near r t = 0 the two branches cancel almost completely; the evaluator
/// switches to a compensated three-term split there so no digits are lost.

#include <cstddef>

#include "speclab/model_params.hpp"

namespace speclab {

// ============================================================
// parameterized double kernel
// ============================================================

/// Parameters of the generic double-waves multiplier.
struct DoubleKernelSpec {
    double l1 = 0.0;    // amplitude of the first wave
    double l2 = 0.0;    // amplitude of the second wave
    double beta1 = 1.0; // propagation speed, > 0
    double beta2 = 1.0; // propagation speed, > 0
    double c1 = 0.0;    // diffusion coefficient, >= 0
    double c2 = 0.0;    // diffusion coefficient, >= 0
    int sigma = 0;      // singularity order of the r^{-sigma} factor
};

/// Forced evaluation branch, used by the overlap validation tests. Auto
/// selects the compensated split exactly when max(beta1, beta2) r t < 0.1.
enum class EvalBranch { Auto, Direct, Series };

/// @brief Evaluate the double-waves multiplier at time t >= 0, radius r >= 0.
///
/// The arguments are canonicalized first: if (beta1, c1, l1) orders after
/// (beta2, c2, l2) lexicographically, the result is computed from the
/// swapped spec and negated, which makes the swap antisymmetry bit-exact.
///
/// r = 0 returns the analytic limit: (l1 - l2) t for sigma = 0, zero for
/// sigma >= 1 with l1 = l2, and +-infinity for sigma >= 1 with l1 != l2
/// (the genuinely singular case).
/// @throws std::invalid_argument on invalid spec or negative t/r.
double double_kernel(const DoubleKernelSpec& spec, double t, double r,
                     EvalBranch branch = EvalBranch::Auto);

/// Batch form of double_kernel over a radius array (shared t). Dispatches
/// to the widest runtime-selected backend; results agree with the scalar
/// loop to tight relative tolerance (see simd_dispatch.hpp).
void double_kernel_batch(const DoubleKernelSpec& spec, double t, const double* r,
                         double* out, std::size_t count);

// ============================================================
// named kernels
// ============================================================

/// The five named kernels. G0 pairs cosine waves; G1 (displacement) and
/// G2 (temperature) pair damped sinc waves; G3 and G4 are their
/// undamped counterparts (c1 = c2 = 0).
enum class KernelId { G0, G1, G2, G3, G4 };

/// Angular structure of the full n-dimensional symbol.
enum class AngularTag { Scalar, VectorDirection };

/// G1 and G3 point along i xi / |xi|^2; the rest are scalar symbols.
AngularTag angular_tag(KernelId id);

const char* to_string(KernelId id);

/// Double-kernel parameters realizing the sinc-pair kernels G1..G4.
/// @throws std::invalid_argument for G0, which is not of the sinc form.
DoubleKernelSpec kernel_spec(KernelId id, const DerivedParams& dp);

/// @brief Radial factor of kernel `id` at (t, r).
///
/// For vector-tagged kernels the factor includes the 1/r magnitude of
/// i xi / |xi|^2, so multiplying by the unit direction reconstructs the
/// full symbol. G2 and G4 tend to t as r -> 0; G0, G1, G3 vanish there.
double kernel_radial(KernelId id, const DerivedParams& dp, double t, double r);

/// Batch form of kernel_radial over a radius array (shared t).
void kernel_radial_batch(KernelId id, const DerivedParams& dp, double t,
                         const double* r, double* out, std::size_t count);

// ============================================================
// asymptotic profiles
// ============================================================

/// Large-time profile amplitudes: the damped pair (phi, psi) and their
/// undamped counterparts (phi_tilde, psi_tilde), each a kernel radial
/// factor scaled by the mean of the thermal velocity datum.
enum class ProfileId { Phi, Psi, PhiTilde, PsiTilde };

double profile_amplitude(ProfileId id, const DerivedParams& dp, double mean_theta1,
                         double t, double r);

}  // namespace speclab

#endif  // SPECLAB_WAVE_KERNELS_HH
