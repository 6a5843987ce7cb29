#ifndef SPECLAB_QUADRATURE_HH
#define SPECLAB_QUADRATURE_HH

/// \file quadrature.hpp
/// Oscillation-aware radial quadrature and the L2-type norms built on it.
///
/// Everything here integrates functions of the radial frequency r over a
/// window [r_lo, r_hi]. Initial panels are sized against the known
/// oscillation wavelength so the fixed-order Gauss rule on each panel
/// resolves at most a quarter oscillation of a squared wave; a
/// whole-versus-halves comparison then drives local refinement until the
/// estimated error meets rel_tol * |value| + abs_tol. Accepted panels are
/// summed pairwise in ascending r, which makes the result independent of
/// the evaluation order and therefore of the thread count.

#include <cstddef>
#include <functional>

#include "speclab/model_params.hpp"
#include "speclab/spectral_solution.hpp"
#include "speclab/wave_kernels.hpp"

namespace speclab {

// ============================================================
// windows
// ============================================================

/// Named frequency zones: Small is (0, eps0], Bounded is [eps0, n0],
/// Large is [n0, r_max] with an explicit truncation radius.
enum class WindowLabel { Small, Bounded, Large, Custom };

/// Radial integration window.
///
/// gaussian_weight multiplies the integrand by e^{-2 r^2}. The localized
/// norms weight the function by e^{-r^2} before squaring, and every
/// integral in this module works with squared quantities, hence the 2.
///
/// For Large windows, tail_bound records an upper bound on the weighted
/// mass discarded beyond r_hi for a unit-amplitude integrand; scale it by
/// sup |f| over the tail if the integrand is not bounded by one.
struct RadialWindow {
    double r_lo = 0.0;
    double r_hi = 1.0;
    WindowLabel label = WindowLabel::Custom;
    bool gaussian_weight = false;
    double tail_bound = 0.0;
};

RadialWindow window_small(double eps0 = 0.1);
RadialWindow window_bounded(double eps0 = 0.1, double n0 = 10.0);
RadialWindow window_large(double n0 = 10.0, double r_max = 40.0,
                          double tail_bound = 0.0);
RadialWindow window_custom(double r_lo, double r_hi, bool gaussian_weight = false);

/// Comparison windows for the large-time profile experiments. Kind 1
/// belongs to the displacement error, kind 2 to the temperature error.
enum class WindowKind { ChiC1, ChiC2 };

/// @brief Preset profile-comparison window for dimension n at time t.
///
/// Kind 1 supports [0, mu6/t] for n = 1, 3, the half line [rho1/t, inf)
/// for n = 2 (truncated where the Gaussian-weighted tail drops below
/// 1e-13, with the bound recorded in tail_bound), and [1/t, 1/sqrt(t)]
/// for n = 4. Kind 2 supports [0, mu6/t] for n = 1 and [1/t, 1/sqrt(t)]
/// for n = 2. All presets carry the Gaussian weight.
///
/// The constants must satisfy nu1 * mu6 <= 0.1 and, for the half-line
/// window, 3 pi / (4 nu1) < rho1 < 3 pi / (4 nu2); windows reaching into
/// the small zone must fit inside (0, eps0].
/// @throws std::invalid_argument for unsupported (kind, n) or violated
/// constraints.
RadialWindow window_preset(WindowKind kind, const DerivedParams& dp, int n,
                           double t, double mu6, double rho1, double eps0 = 0.1);

/// Upper bound on the Gaussian tail integral of r^{n-1} e^{-alpha r^2}
/// over [a, infinity). Requires a^2 > (n - 1) / (2 alpha).
double gaussian_tail_bound(double a, int n, double alpha = 2.0);

/// Surface measure of the unit sphere in n dimensions, 2 pi^{n/2} / Gamma(n/2).
double sphere_measure(int n);

// ============================================================
// adaptive engine
// ============================================================

/// Outcome of one adaptive integration. panels counts the accepted leaf
/// panels whose Gauss values were summed. On converged == true the
/// estimate satisfies est_error <= rel_tol * |value| + abs_tol; converged
/// == false means the panel budget ran out first and value carries the
/// best sum so far.
struct QuadratureResult {
    double value = 0.0;
    double est_error = 0.0;
    std::size_t panels = 0;
    bool converged = false;
};

/// Engine knobs. panel_cap bounds the number of leaf panels in the final
/// sum; the budget is distributed over initial panels in proportion to
/// width, so a capped run fails identically for every thread count. With
/// threads > 1 the integrand must be safe to call concurrently; threads
/// == 0 uses the hardware concurrency.
struct QuadratureControl {
    double rel_tol = 1e-7;
    double abs_tol = 1e-12;
    std::size_t panel_cap = 2000000;
    unsigned threads = 1;
};

/// Integrand evaluated on a short batch of radii (at most 16 per call).
using BatchIntegrand =
    std::function<void(const double* r, double* out, std::size_t count)>;

/// @brief Adaptively integrate f over the window.
///
/// osc_freq_hint is the largest oscillation wavenumber of f in r, in
/// practice max(beta1, beta2) * t; panels start no wider than
/// pi / (4 * osc_freq_hint) so a squared wave is sampled at least four
/// panels per period. Pass 0 for non-oscillatory integrands. Endpoints
/// are never sampled (the Gauss nodes are interior), so an integrand
/// singular exactly at r_lo = 0 is fine as long as it is integrable.
QuadratureResult integrate_radial(const std::function<double(double)>& f,
                                  const RadialWindow& window, double t,
                                  double osc_freq_hint,
                                  const QuadratureControl& ctl = {});

/// Batch-integrand form of integrate_radial; the engine hands radii to f
/// eight at a time, which keeps the vectorized kernel backends busy.
QuadratureResult integrate_radial_batch(const BatchIntegrand& f,
                                        const RadialWindow& window, double t,
                                        double osc_freq_hint,
                                        const QuadratureControl& ctl = {});

// ============================================================
// named integrals
// ============================================================

/// @brief Squared second moment of the double-waves multiplier over the
/// small-frequency window: the integral of |double_kernel|^2 r^{n-1} on
/// [0, eps0]. The r^{-sigma} factor inside the kernel supplies the
/// singular part of the weight.
///
/// t = 0 yields exactly zero. For n < 1 + 2 sigma with l1 != l2 the
/// integral diverges at the origin; that configuration is refused with
/// std::domain_error (blowup_probe integrates punctured windows
/// [eps1, eps0] instead).
QuadratureResult i_of_t(const DoubleKernelSpec& spec, int n, double t,
                        double eps0 = 0.1, const QuadratureControl& ctl = {});

/// @brief L2 norm of a named kernel over the window in dimension n.
///
/// Scalar kernels integrate |kernel|^2 r^{n-1} against the full sphere
/// measure. Vector-direction kernels report the norm of one Cartesian
/// component: the angular average of omega_k^2 contributes
/// sphere_measure(n) / n. value is the norm (square root); est_error is
/// the first-order propagation from the squared integral.
QuadratureResult kernel_l2_norm(KernelId id, const DerivedParams& dp, int n,
                                double t, const RadialWindow& window,
                                const QuadratureControl& ctl = {});

/// Radial data profiles (g0, g1, h0, h1) for curl-free vector data
/// u0_hat = i xi g0(r) alongside scalar h0, h1. Empty functions mean
/// zero. The i xi convention ties the vector amplitude to r g(r).
struct DataProfile {
    std::function<double(double)> g0;
    std::function<double(double)> g1;
    std::function<double(double)> h0;
    std::function<double(double)> h1;
};

/// Per-frequency state sampled from the radial profiles at radius r,
/// with the i xi amplitude convention applied: |u0hat| = r |g0(r)|.
SpectralState data_state(const DataProfile& data, double r);

/// @brief L2 norm of the exact solution at time t over the window.
///
/// Evaluates the per-frequency solution for the given data profiles and
/// integrates the squared magnitude of the chosen field against
/// r^{n-1}. Both targets use the full sphere measure: the displacement
/// solution points along the unit direction i xi / |xi|, so its vector
/// norm has no angular deficit.
QuadratureResult solution_l2_norm(const ModelParams& params,
                                  const DerivedParams& dp,
                                  const DataProfile& data, ModelKind model,
                                  TargetField target, int n, double t,
                                  const RadialWindow& window,
                                  const QuadratureControl& ctl = {});

}  // namespace speclab

#endif  // SPECLAB_QUADRATURE_HH
