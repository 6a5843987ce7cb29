#include "speclab/wave_kernels.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <tuple>

#include "speclab/detail/stable_math.hpp"
#include "speclab/simd_dispatch.hpp"

namespace speclab {

namespace {

using detail::sinc;

void validate(const DoubleKernelSpec& s, double t, double r) {
    if (!(s.beta1 > 0.0) || !(s.beta2 > 0.0)) {
        throw std::invalid_argument("propagation speeds must be positive");
    }
    if (s.c1 < 0.0 || s.c2 < 0.0) {
        throw std::invalid_argument("diffusion coefficients must be nonnegative");
    }
    if (s.sigma < 0) {
        throw std::invalid_argument("singularity order must be nonnegative");
    }
    if (!std::isfinite(t) || t < 0.0) {
        throw std::invalid_argument("t must be finite and nonnegative");
    }
    if (!std::isfinite(r) || r < 0.0) {
        throw std::invalid_argument("r must be finite and nonnegative");
    }
}

double pow_int(double base, int n) {
    double out = 1.0;
    for (int i = 0; i < n; ++i) out *= base;
    return out;
}

// Core value before the r^{-sigma} factor, canonical argument order.
double kernel_core(const DoubleKernelSpec& s, double t, double r, EvalBranch branch) {
    const double a1 = s.beta1 * r * t;
    const double a2 = s.beta2 * r * t;
    const double x = r * r * t;

    // The split takes over well before direct subtraction starts losing
    // digits; its series factor is still accurate to 1e-14 at 0.1.
    const bool use_series =
        branch == EvalBranch::Series ||
        (branch == EvalBranch::Auto && std::max(std::abs(a1), std::abs(a2)) < 0.1);

    if (!use_series) {
        return s.l1 * t * sinc(a1) * std::exp(-s.c1 * x) -
               s.l2 * t * sinc(a2) * std::exp(-s.c2 * x);
    }

    // Compensated split. The three terms isolate the amplitude mismatch,
    // the speed mismatch, and the diffusion mismatch; their sum is an
    // exact rearrangement of the direct formula, but none of them loses
    // digits to cancellation when r t is tiny.
    const double e2 = std::exp(-s.c2 * x);
    const double amplitude_term = (s.l1 - s.l2) * t * e2 * sinc(a2);
    const double speed_term = s.l1 * t * e2 * detail::sinc_diff_series(a1, a2);
    const double diffusion_term = s.l1 * t * sinc(a1) * e2 * std::expm1((s.c2 - s.c1) * x);
    return amplitude_term + speed_term + diffusion_term;
}

}  // namespace

double double_kernel(const DoubleKernelSpec& spec, double t, double r, EvalBranch branch) {
    validate(spec, t, r);

    // Canonical order makes the swap antisymmetry hold bit-exactly.
    if (std::tie(spec.beta1, spec.c1, spec.l1) > std::tie(spec.beta2, spec.c2, spec.l2)) {
        DoubleKernelSpec swapped = spec;
        std::swap(swapped.l1, swapped.l2);
        std::swap(swapped.beta1, swapped.beta2);
        std::swap(swapped.c1, swapped.c2);
        return -double_kernel(swapped, t, r, branch);
    }

    if (r == 0.0) {
        if (spec.sigma == 0) return (spec.l1 - spec.l2) * t;
        if (spec.l1 == spec.l2 || t == 0.0) return 0.0;
        // Genuinely singular: the multiplier grows like (l1 - l2) t / r^sigma.
        return std::copysign(std::numeric_limits<double>::infinity(),
                             (spec.l1 - spec.l2) * t);
    }

    return kernel_core(spec, t, r, branch) / pow_int(r, spec.sigma);
}

// ============================================================
// named kernels
// ============================================================

const char* to_string(KernelId id) {
    switch (id) {
        case KernelId::G0: return "G0";
        case KernelId::G1: return "G1";
        case KernelId::G2: return "G2";
        case KernelId::G3: return "G3";
        case KernelId::G4: return "G4";
    }
    return "unknown";
}

AngularTag angular_tag(KernelId id) {
    return (id == KernelId::G1 || id == KernelId::G3) ? AngularTag::VectorDirection
                                                      : AngularTag::Scalar;
}

DoubleKernelSpec kernel_spec(KernelId id, const DerivedParams& dp) {
    DoubleKernelSpec s;
    s.beta1 = dp.nu1;
    s.beta2 = dp.nu2;
    switch (id) {
        case KernelId::G1:
        case KernelId::G3: {
            const double amp = dp.source.gamma / dp.alpha2;
            s.l1 = amp;
            s.l2 = amp;
            s.sigma = 1;
            break;
        }
        case KernelId::G2:
        case KernelId::G4: {
            const ThermalAmplitudes a = thermal_amplitudes(dp);
            s.l1 = a.ell1;
            s.l2 = a.ell2;
            s.sigma = 0;
            break;
        }
        case KernelId::G0:
            throw std::invalid_argument("G0 pairs cosines, not sinc waves; "
                                        "use kernel_radial directly");
    }
    if (id == KernelId::G1 || id == KernelId::G2) {
        s.c1 = dp.c1;
        s.c2 = dp.c2;
    }
    return s;
}

namespace {

// G0 = (cos(nu1 r t) e^{-c1 x} - cos(nu2 r t) e^{-c2 x}) / r, written so the
// two near-identical products never meet head on: the cosine difference
// collapses to a product of sines and the exponential difference to expm1.
double g0_radial(const DerivedParams& dp, double t, double r) {
    if (r == 0.0) return 0.0;
    const double x = r * r * t;
    const double cos_diff = -2.0 * std::sin(0.5 * (dp.nu1 + dp.nu2) * r * t) *
                            std::sin(0.5 * (dp.nu1 - dp.nu2) * r * t);
    const double e1 = std::exp(-dp.c1 * x);
    const double exp_diff = std::exp(-dp.c2 * x) * std::expm1((dp.c2 - dp.c1) * x);
    return (cos_diff * e1 + std::cos(dp.nu2 * r * t) * exp_diff) / r;
}

}  // namespace

double kernel_radial(KernelId id, const DerivedParams& dp, double t, double r) {
    if (!std::isfinite(t) || t < 0.0) {
        throw std::invalid_argument("t must be finite and nonnegative");
    }
    if (!std::isfinite(r) || r < 0.0) {
        throw std::invalid_argument("r must be finite and nonnegative");
    }
    if (id == KernelId::G0) return g0_radial(dp, t, r);
    return double_kernel(kernel_spec(id, dp), t, r);
}

double profile_amplitude(ProfileId id, const DerivedParams& dp, double mean_theta1,
                         double t, double r) {
    if (mean_theta1 == 0.0) return 0.0;
    KernelId kid = KernelId::G1;
    switch (id) {
        case ProfileId::Phi: kid = KernelId::G1; break;
        case ProfileId::Psi: kid = KernelId::G2; break;
        case ProfileId::PhiTilde: kid = KernelId::G3; break;
        case ProfileId::PsiTilde: kid = KernelId::G4; break;
    }
    return kernel_radial(kid, dp, t, r) * mean_theta1;
}

// ============================================================
// batch entry points (backend-dispatched)
// ============================================================

namespace detail {

void double_kernel_batch_scalar(const DoubleKernelSpec& spec, double t, const double* r,
                                double* out, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) {
        out[i] = double_kernel(spec, t, r[i]);
    }
}

// Provided by the wide translation unit; falls back to the scalar loop on
// lanes the vector path cannot take (tiny r t, r = 0).
void double_kernel_batch_vector(const DoubleKernelSpec& spec, double t, const double* r,
                                double* out, std::size_t count);

}  // namespace detail

void double_kernel_batch(const DoubleKernelSpec& spec, double t, const double* r,
                         double* out, std::size_t count) {
    if (active_simd_backend() == SimdBackend::Vector) {
        detail::double_kernel_batch_vector(spec, t, r, out, count);
    } else {
        detail::double_kernel_batch_scalar(spec, t, r, out, count);
    }
}

void kernel_radial_batch(KernelId id, const DerivedParams& dp, double t,
                         const double* r, double* out, std::size_t count) {
    if (id == KernelId::G0) {
        for (std::size_t i = 0; i < count; ++i) {
            out[i] = kernel_radial(id, dp, t, r[i]);
        }
        return;
    }
    double_kernel_batch(kernel_spec(id, dp), t, r, out, count);
}

}  // namespace speclab
