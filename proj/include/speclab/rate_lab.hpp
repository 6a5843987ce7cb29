#ifndef SPECLAB_RATE_LAB_HH
#define SPECLAB_RATE_LAB_HH

// ============================================================
// Rate laboratory: reference growth/decay rates, log-log rate
// fitting, blow-up probes, pointwise bound scans, profile error
// experiments, and the five-row optimal-rate table.
//
// Everything here consumes the quadrature engine and the spectral
// solver; nothing below depends on the CLI. Fits are ordinary
// least squares in log-log coordinates. The "o(rate)" claims of
// the asymptotic theory are operationalized as trend tests: the
// error-to-rate ratio must eventually decrease and must drop by
// 5x across four decades of time.
// ============================================================

#include <cstddef>
#include <vector>

#include "speclab/model_params.hpp"
#include "speclab/quadrature.hpp"
#include "speclab/spectral_solution.hpp"
#include "speclab/wave_kernels.hpp"

namespace speclab {

// ------------------------------------------------------------
// reference rate functions
// ------------------------------------------------------------

/// The two reference rate families. DispD is the displacement scale
/// (1+t)^{2-n/2} with a sqrt-log correction in dimensions 2 and 4 and
/// (1+t)^{1-n/4} from dimension 5 upward. TempE is the temperature scale
/// (1+t)^{1/2}, sqrt(log) in dimension 2, and (1+t)^{1/2-n/4} above.
enum class RateFamily { DispD, TempE };

/// Evaluate the reference rate at time t >= 0 for dimension n >= 1.
double reference_rate(RateFamily family, int n, double t);

// ------------------------------------------------------------
// rate fitting
// ------------------------------------------------------------

enum class LogFlag { None, SqrtLog, Log };
enum class FitModel { Power, PowerSqrtLog };

/// Result of a least-squares rate fit on a (t, value) series.
/// exponent is the fitted power of t; log_flag records whether a
/// sqrt(log t) factor was selected (or, for the blow-up probe in the
/// critical dimension, a pure log law). The sse fields keep both
/// model residuals so callers can audit the selection margin.
struct RateFit {
    double exponent = 0.0;
    LogFlag log_flag = LogFlag::None;
    double r_squared = 0.0;
    double t_min = 0.0;
    double t_max = 0.0;
    double sse_power = 0.0;
    double sse_sqrt_log = 0.0;
};

/// Geometric grid with `points` entries from lo to hi inclusive.
std::vector<double> log_spaced(double lo, double hi, std::size_t points);

/// Simple linear regression y = intercept + slope * x.
struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};
LinearFit fit_linear(const std::vector<double>& x, const std::vector<double>& y);

/// Fit one model. Power regresses log(value) on log(t); PowerSqrtLog
/// subtracts half of log(log t) first, so the returned exponent is the
/// pure power in front of the sqrt(log t) factor.
///
/// @throws std::invalid_argument for fewer than 8 points, a time span
///         under two decades, non-positive values, or (PowerSqrtLog)
///         times at or below 1.
RateFit fit_rate_model(const std::vector<double>& t,
                       const std::vector<double>& value, FitModel model);

/// Fit both models and select: the sqrt-log variant wins only when it
/// reduces the sum of squared residuals by at least a factor of two.
RateFit fit_rate(const std::vector<double>& t, const std::vector<double>& value);

// ------------------------------------------------------------
// blow-up probe
// ------------------------------------------------------------

/// Divergence probe for the strongly singular second moment with
/// unequal amplitudes in dimensions one and two. The full integral is
/// infinite, so the probe integrates over punctured windows
/// [eps1, eps0] and fits the divergence law in eps1: a power eps1^{-1}
/// in dimension one, a pure log(1/eps1) law in dimension two.
struct BlowupProbe {
    RateFit fit;
    std::vector<double> eps1;
    std::vector<double> partial;
    /// Coefficient of the divergent term: the prefactor of 1/eps1 in
    /// dimension one, of log(1/eps1) in dimension two. The leading-order
    /// value is (l1 - l2)^2 t^2 in both cases.
    double leading_coefficient = 0.0;
};

/// @throws std::invalid_argument when sigma != 1, when n is not 1 or 2,
///         when the eps1 list is unusable, or when l1 == l2 (the moment
///         integral converges then; that case belongs to i_of_t).
BlowupProbe blowup_probe(const DoubleKernelSpec& spec, int n, double t_fixed,
                         const std::vector<double>& eps1_list, double eps0 = 0.1,
                         const QuadratureControl& ctl = {});

// ------------------------------------------------------------
// pointwise bound scans
// ------------------------------------------------------------

/// Which pointwise inequality template to scan. The Small* templates
/// live on the interior frequency zone and carry the fitted constants
/// (c_tilde, c) inside (1 + rt + |sin(c_tilde r t)|/r) exp(-c r^2 t)
/// envelopes; the Large*/Bounded* templates are plain exp(-c t) decay
/// against weighted data factors.
enum class BoundId {
    SmallU,
    SmallUError,
    SmallTheta,
    SmallThetaError,
    BoundedU,
    BoundedTheta,
    LargeU,
    LargeTheta,
};

/// Rectangular log-spaced scan grid in (t, r).
struct ScanGrid {
    double t_lo = 1.0;
    double t_hi = 1e3;
    double r_lo = 1e-3;
    double r_hi = 0.1;
    std::size_t nt = 16;
    std::size_t nr = 16;
};

/// Outcome of a sup-ratio scan. The inequality under test asserts the
/// existence of constants making the ratio finite, not their values, so
/// the check is a bounded sup that is stable under grid refinement.
struct ScanReport {
    double sup_ratio = 0.0;
    double c_tilde = 0.0;  ///< oscillation constant; 0 when the template has none
    double c_decay = 0.0;  ///< decay constant of the template
    double t_at_sup = 0.0;
    double r_at_sup = 0.0;
    /// Grid points where the template vanished but the solution did not.
    std::size_t rhs_zero_flags = 0;
};

/// Scan the damped model against one inequality template. The data
/// profile follows the quadrature convention (initial displacement
/// transform is i xi g0(r), so its magnitude is r |g0|). Constants are
/// fitted by minimizing the sup over a coarse 8x8 candidate grid and
/// then an 8x8 refinement around the winner.
///
/// @throws std::invalid_argument for delta <= 0 or an empty grid.
ScanReport pointwise_ratio_scan(const ModelParams& params, const DerivedParams& dp,
                                const DataProfile& data, BoundId bound,
                                const ScanGrid& grid, const ZoneConfig& zones = {});

/// Exponential envelope fit at a fixed radius: samples |amplitude| on a
/// uniform time grid, reduces to block maxima to step over oscillation
/// zeros, and fits log(max) against t. decay_constant is the negated
/// slope, positive for a decaying mode.
struct EnvelopeFit {
    double decay_constant = 0.0;
    double r_squared = 0.0;
    std::size_t blocks = 0;
};
EnvelopeFit exponential_envelope_fit(const ModelParams& params,
                                     const DerivedParams& dp,
                                     const DataProfile& data, ModelKind model,
                                     TargetField target, double r_fixed,
                                     double t_lo, double t_hi,
                                     std::size_t samples = 400,
                                     std::size_t blocks = 8);

// ------------------------------------------------------------
// profile error experiments
// ------------------------------------------------------------

/// One sample of the profile-error trend: the windowed L2 distance
/// between the evolved solution and the explicit double-wave profile,
/// divided by the reference rate for the target field.
struct ProfileErrorPoint {
    double t = 0.0;
    double error_norm = 0.0;
    double rate = 0.0;
    double ratio = 0.0;
    bool converged = false;
};

/// Windowed profile-error series. The damped model is measured on the
/// fixed interior window [0, eps0]; the undamped model is measured in
/// the localized norms on the time-dependent window presets with the
/// Gaussian frequency weight, which is where its profile theory lives.
/// mean_theta1 is the analytically known mean of the thermal velocity
/// datum (the profile amplitude).
///
/// @throws std::invalid_argument for n < 1 or an empty time grid;
///         window preset errors propagate for undamped dimensions
///         without a preset.
std::vector<ProfileErrorPoint> profile_error_experiment(
    const ModelParams& params, const DerivedParams& dp, const DataProfile& data,
    double mean_theta1, ModelKind model, TargetField target, int n,
    const std::vector<double>& t_grid, const QuadratureControl& ctl = {},
    double eps0 = 0.1, double mu6 = 0.05, double rho1 = 2.0);

/// Trend verdict for an o(rate) claim: the ratio series must be
/// non-increasing (2 percent slack per step) from t_star onward, and
/// the last point must sit at least 5x below the point four decades
/// earlier. decay_factor reports first/last over the widest four-decade
/// span available.
struct TrendCheck {
    bool eventually_decreasing = false;
    bool five_fold_decay = false;
    double decay_factor = 0.0;
    double t_star = 0.0;
};
TrendCheck o_rate_check(const std::vector<ProfileErrorPoint>& series);

// ------------------------------------------------------------
// optimal-rate table
// ------------------------------------------------------------

/// The five wave families of the optimal-rate table: the free
/// transversal wave, the undamped and damped longitudinal waves, and
/// the undamped and damped thermal waves.
enum class WaveRow {
    Transversal,
    LongitudinalII,
    LongitudinalIII,
    ThermalII,
    ThermalIII,
};
const char* to_string(WaveRow row);

/// One cell of the table: the fitted norm exponent against the
/// predicted entry. Bounded cells (predicted_bounded) are verified as
/// |fitted exponent| <= 0.05 instead of an exponent match.
struct TableCell {
    WaveRow row = WaveRow::Transversal;
    int n = 1;
    double fitted_exponent = 0.0;
    LogFlag fitted_flag = LogFlag::None;
    double r_squared = 0.0;
    double predicted_exponent = 0.0;
    LogFlag predicted_flag = LogFlag::None;
    bool predicted_bounded = false;
    bool matches = false;
};

/// Regenerate the table: for each row and n in 1..6, fit the interior
/// L2-norm growth/decay of the row's kernel over the time window and
/// compare with the predicted optimal rate.
///
/// @throws std::invalid_argument when the window spans fewer than three
///         decades or has fewer than 8 points.
std::vector<TableCell> table1(const ModelParams& params, const DerivedParams& dp,
                              double t_min, double t_max, std::size_t points = 12,
                              const QuadratureControl& ctl = {});

}  // namespace speclab

#endif  // SPECLAB_RATE_LAB_HH
