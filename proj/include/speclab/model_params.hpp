#ifndef SPECLAB_MODEL_PARAMS_HH
#define SPECLAB_MODEL_PARAMS_HH

/// \file model_params.hpp
/// Coupling parameters of the thermoelastic wave system and the constants
/// derived from them.
///
/// The system couples an elastic displacement with wave speed b to a
/// temperature field with conductivity kappa through a coupling constant
/// gamma; delta >= 0 switches the dissipative variant (delta > 0) against
/// the conservative one (delta = 0). Every spectral quantity downstream
/// (characteristic roots, kernel speeds, diffusion coefficients) is a
/// function of the four numbers collected here.

#include <iosfwd>

namespace speclab {

// ============================================================
// Parameter sets
// ============================================================

/// @brief Primitive model parameters.
///
/// Constraints enforced by derive(): b > 0, kappa > 0, gamma != 0,
/// delta >= 0. All fields are plain doubles so the struct can be read
/// straight out of a config file.
struct ModelParams {
    double b = 1.0;      // elastic wave speed
    double kappa = 1.0;  // thermal conductivity
    double gamma = 1.0;  // coupling constant, nonzero
    double delta = 1.0;  // damping strength, zero for the conservative model
};

/// @brief Constants derived from ModelParams.
///
/// alpha0 = b^2 - kappa - gamma^2 measures the detuning between the elastic
/// and thermal characteristic speeds; alpha1 = b^2 + kappa + gamma^2 and
/// alpha2 = sqrt(alpha1^2 - 4 b^2 kappa) > 0 control the splitting of the
/// two propagation speeds
///
///     nu1 = sqrt((alpha1 + alpha2)/2) > nu2 = sqrt((alpha1 - alpha2)/2) > 0,
///
/// which satisfy nu1^2 + nu2^2 = alpha1 and nu1 nu2 = b sqrt(kappa).
/// The diffusion coefficients attached to the two waves are
///
///     c1 = (delta/4)(1 - alpha0/alpha2),  c2 = (delta/4)(1 + alpha0/alpha2),
///
/// with c1 + c2 = delta/2; both vanish when delta = 0.
struct DerivedParams {
    double alpha0 = 0.0;
    double alpha1 = 0.0;
    double alpha2 = 0.0;
    double nu1 = 0.0;  // fast propagation speed
    double nu2 = 0.0;  // slow propagation speed
    double c1 = 0.0;   // diffusion coefficient of the nu1 wave
    double c2 = 0.0;   // diffusion coefficient of the nu2 wave

    /// True when alpha0 == 0 (up to roundoff), i.e. b^2 = kappa + gamma^2.
    /// Then c1 = c2 = delta/4 and the two diffusion scales coincide. The
    /// configuration stays valid; some lower-bound hypotheses fail and are
    /// reported through threshold_flags().
    bool degenerate_equal_diffusion = false;

    /// Copy of the primitive parameters this set was derived from.
    ModelParams source;
};

/// @brief Validate params and compute the derived constants.
/// @throws std::invalid_argument if b <= 0, kappa <= 0, gamma == 0,
///         delta < 0, or any value is not finite.
DerivedParams derive(const ModelParams& params);

// ============================================================
// Lower-bound hypotheses
// ============================================================

/// @brief Amplitudes of the two sine waves in the thermal kernels.
///
/// ell1 = (alpha2 - alpha0)/(2 alpha2), ell2 = -(alpha0 + alpha2)/(2 alpha2).
/// They always satisfy ell1 - ell2 = 1, and ell1^2 != ell2^2 exactly when
/// alpha0 != 0.
struct ThermalAmplitudes {
    double ell1 = 0.0;
    double ell2 = 0.0;
};

ThermalAmplitudes thermal_amplitudes(const DerivedParams& dp);

/// @brief Dimension-dependent hypotheses behind the optimal lower bounds.
///
/// The displacement lower bound needs an extra inequality only at n = 4 and
/// the temperature lower bound only at n = 2; in every other dimension the
/// bounds are unconditional in the parameters. Both branches of each
/// condition are evaluated and reported so a caller can see which side (if
/// any) holds.
struct ThresholdFlags {
    int n = 0;

    // n = 4 displacement condition: nu2^2 > 2 nu1^2 or nu1^2 > 2 nu2^2.
    // The first branch can never hold (nu1 > nu2); it is still evaluated.
    bool u_branch_slow_dominant = false;  // nu2^2 > 2 nu1^2
    bool u_branch_fast_dominant = false;  // nu1^2 > 2 nu2^2
    bool u_condition = false;             // either branch

    // n = 2 temperature condition: ell1^2 nu2^2 > 2 ell2^2 nu1^2 or
    // ell2^2 nu1^2 > 2 ell1^2 nu2^2, with the thermal amplitudes above.
    bool theta_branch_first = false;   // ell1^2 nu2^2 > 2 ell2^2 nu1^2
    bool theta_branch_second = false;  // ell2^2 nu1^2 > 2 ell1^2 nu2^2
    bool theta_condition = false;      // either branch

    // Hypotheses actually required at this n (vacuously true away from the
    // critical dimension).
    bool u_lower_bound_holds = false;      // true unless n == 4 and u_condition fails
    bool theta_lower_bound_holds = false;  // true unless n == 2 and theta_condition fails
};

/// @brief Evaluate the lower-bound hypotheses for dimension n >= 1.
/// @throws std::invalid_argument if n < 1.
ThresholdFlags threshold_flags(const DerivedParams& dp, int n);

}  // namespace speclab

#endif  // SPECLAB_MODEL_PARAMS_HH
