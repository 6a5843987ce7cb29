#include "speclab/model_params.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace speclab {

namespace {

void check_finite(double v, const char* name) {
    if (!std::isfinite(v)) {
        throw std::invalid_argument(std::string(name) + " must be finite");
    }
}

}  // namespace

DerivedParams derive(const ModelParams& params) {
    check_finite(params.b, "b");
    check_finite(params.kappa, "kappa");
    check_finite(params.gamma, "gamma");
    check_finite(params.delta, "delta");
    if (params.b <= 0.0) {
        throw std::invalid_argument("b must be positive");
    }
    if (params.kappa <= 0.0) {
        throw std::invalid_argument("kappa must be positive");
    }
    if (params.gamma == 0.0) {
        throw std::invalid_argument("gamma must be nonzero");
    }
    if (params.delta < 0.0) {
        throw std::invalid_argument("delta must be nonnegative");
    }

    const double b2 = params.b * params.b;
    const double g2 = params.gamma * params.gamma;

    DerivedParams dp;
    dp.source = params;
    dp.alpha0 = b2 - params.kappa - g2;
    dp.alpha1 = b2 + params.kappa + g2;
    // alpha1^2 - 4 b^2 kappa = (b^2 - kappa)^2 + gamma^4 + 2 gamma^2 (b^2 + kappa)
    // is written in the right-hand form to stay positive under roundoff even
    // when b^2 is close to kappa and gamma is small.
    const double bk = b2 - params.kappa;
    const double disc = bk * bk + g2 * g2 + 2.0 * g2 * (b2 + params.kappa);
    dp.alpha2 = std::sqrt(disc);

    dp.nu1 = std::sqrt(0.5 * (dp.alpha1 + dp.alpha2));
    // nu2^2 = (alpha1 - alpha2)/2 suffers cancellation when alpha2 is close
    // to alpha1 (small b^2 kappa); nu1^2 nu2^2 = b^2 kappa gives it stably.
    dp.nu2 = params.b * std::sqrt(params.kappa) / dp.nu1;

    dp.c1 = 0.25 * params.delta * (1.0 - dp.alpha0 / dp.alpha2);
    dp.c2 = 0.25 * params.delta * (1.0 + dp.alpha0 / dp.alpha2);

    dp.degenerate_equal_diffusion =
        std::abs(dp.alpha0) <= 8.0 * std::numeric_limits<double>::epsilon() * dp.alpha1;

    return dp;
}

ThermalAmplitudes thermal_amplitudes(const DerivedParams& dp) {
    ThermalAmplitudes a;
    a.ell1 = (dp.alpha2 - dp.alpha0) / (2.0 * dp.alpha2);
    a.ell2 = -(dp.alpha0 + dp.alpha2) / (2.0 * dp.alpha2);
    return a;
}

ThresholdFlags threshold_flags(const DerivedParams& dp, int n) {
    if (n < 1) {
        throw std::invalid_argument("n must be at least 1");
    }

    ThresholdFlags f;
    f.n = n;

    const double nu1sq = dp.nu1 * dp.nu1;
    const double nu2sq = dp.nu2 * dp.nu2;
    f.u_branch_slow_dominant = nu2sq > 2.0 * nu1sq;
    f.u_branch_fast_dominant = nu1sq > 2.0 * nu2sq;
    f.u_condition = f.u_branch_slow_dominant || f.u_branch_fast_dominant;

    const ThermalAmplitudes a = thermal_amplitudes(dp);
    const double first = a.ell1 * a.ell1 * nu2sq;
    const double second = a.ell2 * a.ell2 * nu1sq;
    f.theta_branch_first = first > 2.0 * second;
    f.theta_branch_second = second > 2.0 * first;
    f.theta_condition = f.theta_branch_first || f.theta_branch_second;

    f.u_lower_bound_holds = (n != 4) || f.u_condition;
    f.theta_lower_bound_holds = (n != 2) || f.theta_condition;
    return f;
}

}  // namespace speclab
