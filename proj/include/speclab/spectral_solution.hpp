#ifndef SPECLAB_SPECTRAL_SOLUTION_HH
#define SPECLAB_SPECTRAL_SOLUTION_HH

/// \file spectral_solution.hpp
/// Per-frequency exact solutions of the coupled displacement/temperature
/// system. For a fixed frequency xi the coupled pair collapses onto a
/// fourth-order scalar ODE in time; this header builds the matching
/// fourth-order initial data, solves the Vandermonde system for the mode
/// coefficients, and evaluates the exponential sums in forms that stay
/// accurate for tiny frequencies, huge times, and nearly colliding roots.

#include <array>
#include <complex>
#include <stdexcept>
#include <utility>

#include "speclab/char_roots.hpp"
#include "speclab/model_params.hpp"

namespace speclab {

// ============================================================
// per-frequency data
// ============================================================

/// Which of the two coupled fields an operation works on.
enum class TargetField {
    U,      ///< displacement amplitude
    Theta,  ///< temperature
};

/// Which evolution law the temperature obeys.
enum class ModelKind {
    TypeII,   ///< purely hyperbolic heat conduction (delta = 0)
    TypeIII,  ///< damped heat conduction (delta >= 0)
};

const char* to_string(TargetField target);
const char* to_string(ModelKind model);

/// Fourier data of one frequency, reduced to scalars.
///
/// Gradient fields have transforms parallel to i*xi, so the displacement
/// data are stored as the complex amplitude along that direction:
/// u0hat = u0_amp * i*xi/|xi|, and likewise u1hat. Temperature data are
/// scalars already. The Euclidean magnitude of the displacement vector
/// equals |u0_amp| independently of the direction of xi.
struct SpectralState {
    Complex u0_amp{0.0, 0.0};  ///< initial displacement amplitude
    Complex u1_amp{0.0, 0.0};  ///< initial displacement velocity amplitude
    Complex th0{0.0, 0.0};     ///< initial temperature
    Complex th1{0.0, 0.0};     ///< initial temperature rate
    double r = 0.0;            ///< frequency radius |xi|
};

/// Sum of the four data magnitudes. Every pointwise bound in this library
/// is expressed as a multiple of this aggregate.
double data_magnitude(const SpectralState& state);

/// Initial values (v, v', v'', v''') of the scalar fourth-order mode
/// equation obtained by eliminating one field from the coupled pair.
struct FourthOrderData {
    std::array<Complex, 4> v{};               ///< v(0), v'(0), v''(0), v'''(0)
    TargetField target = TargetField::U;      //
    ModelKind model = ModelKind::TypeIII;     //
};

/// Builds the fourth-order initial data for the chosen field.
///
/// v0 and v1 are the raw data of the target field; v2 and v3 come from
/// substituting the system back into itself, with the Fourier rules
/// Laplacian -> -r^2, gradient -> i*xi, divergence -> i*xi dot.
/// TypeII demands delta == 0 and is rejected otherwise.
FourthOrderData reduce_data(const ModelParams& params, const SpectralState& state,
                            TargetField target, ModelKind model);

// ============================================================
// mode coefficients
// ============================================================

/// Coefficients d1..d4 of the four exponential modes e^{lambda_j t},
/// stored in the canonical root order of the RootSet they were solved
/// against. For real data the coefficients of conjugate roots are
/// conjugate.
struct ModeCoefficients {
    std::array<Complex, 4> d{};                    //
    RootZone zone = RootZone::TwoConjugatePairs;   ///< zone they were solved in
};

/// Thrown when the characteristic roots are too close for the Vandermonde
/// system to be solvable in double precision. Callers should switch to
/// evaluate_confluent, which handles coincident modes.
class NearDegenerateRoots : public std::runtime_error {
  public:
    NearDegenerateRoots(double gap, double scale);

    double gap() const { return gap_; }      ///< smallest pairwise root distance
    double scale() const { return scale_; }  ///< largest root magnitude

  private:
    double gap_;
    double scale_;
};

/// How vandermonde_solve computes the coefficients. Both routes must give
/// the same answer; keeping them separate lets tests check one against
/// the other.
enum class SolveRoute {
    Elimination,           ///< generic 4x4 partial-pivot solve
    ExplicitDeterminants,  ///< closed-form Cramer determinants per zone
};

/// Solves V d = (v0, v1, v2, v3) for the mode coefficients, where V is
/// the Vandermonde matrix of the four characteristic roots.
///
/// Requires the minimum pairwise root gap to exceed 1e-8 * max|lambda|;
/// below that NearDegenerateRoots is thrown. The explicit route knows the
/// closed-form determinants for the two conjugate-pair zones and the
/// two-real-one-pair zone only, and rejects four real roots with
/// std::invalid_argument; the elimination route handles every zone.
ModeCoefficients vandermonde_solve(const RootSet& roots, const FourthOrderData& data,
                                   SolveRoute route = SolveRoute::Elimination);

/// det of the Vandermonde matrix of four nodes, as the pair-product
/// formula prod_{j<k} (lambda_k - lambda_j).
Complex vandermonde_determinant(const std::array<Complex, 4>& lambda);

// ============================================================
// evaluation
// ============================================================

/// Evaluates sum_j d_j lambda_j^deriv e^{lambda_j t} (the deriv-th time
/// derivative of the mode sum) in the real trigonometric-exponential
/// form: conjugate pairs are combined into cos/sin terms scaled by
/// e^{Re lambda t}, so no complex exponential of large real part is ever
/// formed. e^{Re lambda t} underflows to exact 0 below e^{-700}.
///
/// deriv must lie in [0, 3]; the zone tags of the coefficients and the
/// roots must agree.
Complex evaluate_type3(const ModeCoefficients& coeffs, const RootSet& roots, double t,
                       int deriv = 0);

/// Evaluates the mode sum with the initial data given directly, through a
/// divided-difference (Newton) basis that stays finite when modes collide.
///
/// Modes closer than 1e-7 * max|lambda| are snapped to their cluster mean
/// and treated as exactly coincident, which turns the basis functions
/// into t^m e^{lambda t} combinations. For well-separated modes the result
/// matches vandermonde_solve + evaluate_type3; accuracy degrades in the
/// narrow band where gaps hover just above the clustering threshold.
Complex evaluate_confluent(const std::array<Complex, 4>& modes,
                           const std::array<Complex, 4>& data, double t, int deriv = 0);

/// Both fields of one frequency at one time.
struct SolutionPair {
    Complex u_amp{0.0, 0.0};  ///< displacement amplitude along i*xi/|xi|
    Complex theta{0.0, 0.0};  ///< temperature value
};

/// Closed-form solution of the undamped (delta = 0) system. Both fields
/// are superpositions of cos(nu_j r t) and sin(nu_j r t)/(nu_j r) carried
/// by the two sound speeds; the sine quotient is evaluated by series for
/// nu r t < 1e-3 so the r -> 0 limit comes out as exactly t.
SolutionPair evaluate_type2(const ModelParams& params, const DerivedParams& dp,
                            const SpectralState& state, double t);

/// Full per-frequency solve: reduces the data, finds the characteristic
/// roots, and evaluates both fields. TypeII dispatches to the closed
/// form; TypeIII runs the Vandermonde route and falls back to the
/// confluent evaluator when the roots nearly collide.
SolutionPair evaluate_solution(const ModelParams& params, const DerivedParams& dp,
                               const SpectralState& state, ModelKind model, double t);

/// Magnitudes (|uhat|, |thetahat|) of the two fields; the displacement
/// magnitude is the Euclidean norm of the full vector, which the scalar
/// amplitude convention makes equal to |u_amp|.
std::pair<double, double> solution_magnitudes(const ModelParams& params,
                                              const DerivedParams& dp,
                                              const SpectralState& state, ModelKind model,
                                              double t);

}  // namespace speclab

#endif  // SPECLAB_SPECTRAL_SOLUTION_HH
