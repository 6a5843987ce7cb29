#ifndef SPECLAB_CHAR_ROOTS_HH
#define SPECLAB_CHAR_ROOTS_HH

/// \file char_roots.hpp
/// Characteristic roots of the fourth-order symbol at radial frequency r.
///
/// Both unknowns of the coupled system satisfy, mode by mode, the quartic
///
///     lambda^4 + delta r^2 lambda^3 + (b^2 + kappa + gamma^2) r^2 lambda^2
///             + b^2 delta r^4 lambda + b^2 kappa r^4 = 0.
///
/// Its root pattern changes with r: two conjugate pairs near the origin,
/// two reals plus one pair for large r (when delta > 0), and two purely
/// imaginary pairs +-i nu_j r for every r when delta = 0. This header
/// exposes the solver, the quartic discriminant that separates the
/// patterns, and the closed-form asymptotic roots of both regimes.

#include <array>
#include <complex>

#include "speclab/model_params.hpp"

namespace speclab {

using Complex = std::complex<double>;

/// Radial frequency zone boundaries used by windows and asymptotics.
struct ZoneConfig {
    double eps0 = 0.1;  // |xi| < eps0: small-frequency zone
    double n0 = 10.0;   // |xi| > n0: large-frequency zone
};

/// Root pattern of the characteristic quartic.
enum class RootZone {
    DegenerateOrigin,   // r = 0: quadruple zero root
    TwoImaginaryPairs,  // delta = 0: +-i nu1 r and +-i nu2 r
    TwoConjugatePairs,  // two distinct conjugate pairs, Re < 0
    TwoRealOnePair,     // two negative reals plus one conjugate pair
    FourReal,           // four reals (narrow transitional band)
};

const char* to_string(RootZone zone);

/// @brief Roots in canonical order.
///
/// Two-pair zones store {re1 + i im1, re1 - i im1, re2 + i im2, re2 - i im2}
/// with 0 < im1 <= im2, so the slow (nu2, c2) pair always comes first.
/// TwoRealOnePair stores {real1, real2, re + i im, re - i im} with
/// real1 <= real2 and im > 0. FourReal stores ascending reals.
struct RootSet {
    std::array<Complex, 4> roots{};
    RootZone zone = RootZone::DegenerateOrigin;
    double r = 0.0;

    /// Real/imaginary part of pair k (1-based; k is ignored in
    /// TwoRealOnePair, which has a single pair).
    /// @throws std::logic_error when the zone has no such pair.
    double pair_re(int k) const;
    double pair_im(int k) const;

    /// Ascending real roots of TwoRealOnePair (and FourReal's first two).
    /// @throws std::logic_error when the zone has no real roots.
    double real1() const;
    double real2() const;
};

/// Monic quartic coefficients lambda^4 + a3 l^3 + a2 l^2 + a1 l + a0.
struct QuarticCoeffs {
    double a3 = 0.0;
    double a2 = 0.0;
    double a1 = 0.0;
    double a0 = 0.0;
};

QuarticCoeffs characteristic_coeffs(const ModelParams& params, double r);

/// @brief Solve the characteristic quartic at radial frequency r >= 0.
///
/// Companion-matrix eigenvalues followed by two Newton refinement steps,
/// greedy conjugate pairing, and zone classification from the actual root
/// structure. r = 0 returns the degenerate quadruple zero.
/// @throws std::invalid_argument if r < 0 or r is not finite.
RootSet solve_quartic(const ModelParams& params, const DerivedParams& dp, double r);

/// Quartic discriminant data. delta_disc > 0 together with p_disc > 0
/// implies two conjugate pairs; delta_disc < 0 implies two reals plus one
/// pair. The sign flip locates the transition band between the regimes.
struct DiscriminantInfo {
    double delta_disc = 0.0;
    double p_disc = 0.0;  // 8 a2 - 3 a3^2
};

DiscriminantInfo discriminant(const ModelParams& params, double r);

enum class AsymptoticZone { Small, Large };

/// @brief Closed-form asymptotic roots, in the same canonical order as
/// RootSet.
///
/// Small zone: -c2 r^2 +- i nu2 r and -c1 r^2 +- i nu1 r; with delta = 0
/// these are exact at every r, not just leading order.
/// Large zone (delta > 0): -delta r^2, -kappa/delta, and
/// -gamma^2/(2 delta) +- i b r, reals sorted ascending.
/// @throws std::invalid_argument for the large zone with delta = 0.
std::array<Complex, 4> asymptotic_roots(const DerivedParams& dp, double r, AsymptoticZone zone);

}  // namespace speclab

#endif  // SPECLAB_CHAR_ROOTS_HH
