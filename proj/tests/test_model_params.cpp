// Unit tests for the derived-constant layer. Golden values below are frozen
// from the closed forms evaluated independently (exact arithmetic where the
// unit parameter set b = kappa = gamma = delta = 1 allows it; the speeds
// there are the golden ratio and its inverse).

#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "speclab/model_params.hpp"

using speclab::DerivedParams;
using speclab::ModelParams;
using speclab::ThermalAmplitudes;
using speclab::ThresholdFlags;

namespace {

ModelParams unit_params() { return ModelParams{1.0, 1.0, 1.0, 1.0}; }

}  // namespace

TEST_CASE("derived constants at the unit parameter set") {
    const DerivedParams d = speclab::derive(unit_params());

    CHECK(d.alpha0 == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(d.alpha1 == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(d.alpha2 == doctest::Approx(std::sqrt(5.0)).epsilon(1e-15));

    // nu1 = (1 + sqrt 5)/2, nu2 = 1/nu1, frozen to full double precision.
    CHECK(d.nu1 == doctest::Approx(1.6180339887498949).epsilon(1e-15));
    CHECK(d.nu2 == doctest::Approx(0.6180339887498949).epsilon(1e-15));

    // c1 = (1 + 1/sqrt 5)/4, c2 = (1 - 1/sqrt 5)/4.
    CHECK(d.c1 == doctest::Approx(0.36180339887498949).epsilon(1e-15));
    CHECK(d.c2 == doctest::Approx(0.13819660112501051).epsilon(1e-15));

    CHECK_FALSE(d.degenerate_equal_diffusion);
}

TEST_CASE("thermal amplitudes at the unit parameter set") {
    const DerivedParams d = speclab::derive(unit_params());
    const ThermalAmplitudes a = speclab::thermal_amplitudes(d);

    // ell1 = (alpha2 - alpha0)/(2 alpha2), ell2 = -(alpha0 + alpha2)/(2 alpha2).
    CHECK(a.ell1 == doctest::Approx(0.72360679774997896).epsilon(1e-15));
    CHECK(a.ell2 == doctest::Approx(-0.27639320225002104).epsilon(1e-15));
    CHECK(a.ell1 - a.ell2 == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("algebraic invariants over random admissible parameters") {
    std::mt19937_64 rng(0x5eec1abu);
    std::uniform_real_distribution<double> mag(0.05, 4.0);
    std::uniform_int_distribution<int> sign(0, 1);

    for (int trial = 0; trial < 10000; ++trial) {
        ModelParams p;
        p.b = mag(rng);
        p.kappa = mag(rng);
        p.gamma = (sign(rng) ? 1.0 : -1.0) * mag(rng);
        p.delta = (trial % 7 == 0) ? 0.0 : mag(rng);

        const DerivedParams d = speclab::derive(p);
        const double b2 = p.b * p.b;
        const double g2 = p.gamma * p.gamma;

        CHECK(d.nu1 > d.nu2);
        CHECK(d.nu2 > 0.0);
        CHECK(d.alpha2 > 0.0);

        // Sum and product of the squared speeds.
        CHECK(d.nu1 * d.nu1 + d.nu2 * d.nu2 ==
              doctest::Approx(d.alpha1).epsilon(1e-13));
        CHECK(d.nu1 * d.nu1 * d.nu2 * d.nu2 ==
              doctest::Approx(b2 * p.kappa).epsilon(1e-13));
        CHECK(d.nu2 * d.nu2 - d.nu1 * d.nu1 ==
              doctest::Approx(-d.alpha2).epsilon(1e-13));

        // Diffusion split.
        CHECK(d.c1 + d.c2 == doctest::Approx(0.5 * p.delta).epsilon(1e-13));
        CHECK(d.c1 >= 0.0);
        CHECK(d.c2 >= 0.0);

        // alpha2 as the stabilized square root.
        const double disc = (b2 - p.kappa) * (b2 - p.kappa) + g2 * g2 +
                            2.0 * g2 * (b2 + p.kappa);
        CHECK(d.alpha2 * d.alpha2 == doctest::Approx(disc).epsilon(1e-13));

        // Shifted squared speeds used by the thermal coefficients. These
        // cancel almost completely for small gamma, so the comparison is
        // absolute at the scale of alpha1.
        CHECK(std::abs((d.nu2 * d.nu2 - p.kappa - g2) - 0.5 * (d.alpha0 - d.alpha2)) <=
              1e-12 * (1.0 + d.alpha1));
        CHECK(std::abs((d.nu1 * d.nu1 - p.kappa - g2) - 0.5 * (d.alpha0 + d.alpha2)) <=
              1e-12 * (1.0 + d.alpha1));

        const ThermalAmplitudes a = speclab::thermal_amplitudes(d);
        CHECK(a.ell1 - a.ell2 == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(std::abs((a.ell1 * a.ell1 - a.ell2 * a.ell2) + d.alpha0 / d.alpha2) <= 1e-12);
    }
}

TEST_CASE("equal-diffusion degeneracy is flagged, not rejected") {
    // alpha0 = 0 needs b^2 = kappa + gamma^2; then both diffusion rates
    // collapse to delta/4.
    ModelParams p{std::sqrt(2.0), 1.0, 1.0, 0.8};
    const DerivedParams d = speclab::derive(p);
    CHECK(d.degenerate_equal_diffusion);
    CHECK(d.c1 == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(d.c2 == doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("lower-bound threshold flags at the unit parameter set") {
    const DerivedParams d = speclab::derive(unit_params());

    SUBCASE("displacement condition") {
        const ThresholdFlags f = speclab::threshold_flags(d, 4);
        // nu2^2 > 2 nu1^2 can never hold; nu1^2 > 2 nu2^2 holds here
        // (golden ratio: nu1^2/nu2^2 = phi^4 > 2).
        CHECK_FALSE(f.u_branch_slow_dominant);
        CHECK(f.u_branch_fast_dominant);
        CHECK(f.u_condition);
        CHECK(f.u_lower_bound_holds);
    }

    SUBCASE("thermal condition ties exactly at the unit set") {
        // Both products (alpha0 -+ alpha2)^2 (alpha1 -+ alpha2) equal 8
        // exactly here, and 8 > 16 fails, so neither branch holds.
        const double a0 = d.alpha0, a1 = d.alpha1, a2 = d.alpha2;
        const double prod_minus = (a0 - a2) * (a0 - a2) * (a1 - a2);
        const double prod_plus = (a0 + a2) * (a0 + a2) * (a1 + a2);
        CHECK(prod_minus == doctest::Approx(8.0).epsilon(1e-12));
        CHECK(prod_plus == doctest::Approx(8.0).epsilon(1e-12));

        const ThresholdFlags f = speclab::threshold_flags(d, 2);
        CHECK_FALSE(f.theta_branch_first);
        CHECK_FALSE(f.theta_branch_second);
        CHECK_FALSE(f.theta_condition);
        CHECK_FALSE(f.theta_lower_bound_holds);
    }

    SUBCASE("conditions only gate their own dimension") {
        CHECK(speclab::threshold_flags(d, 1).u_lower_bound_holds);
        CHECK(speclab::threshold_flags(d, 1).theta_lower_bound_holds);
        CHECK(speclab::threshold_flags(d, 3).theta_lower_bound_holds);
        CHECK(speclab::threshold_flags(d, 5).u_lower_bound_holds);
    }
}

TEST_CASE("threshold flags match their defining inequalities over random draws") {
    std::mt19937_64 rng(0xfeedbeefu);
    std::uniform_real_distribution<double> mag(0.05, 4.0);

    for (int trial = 0; trial < 2000; ++trial) {
        ModelParams p;
        p.b = mag(rng);
        p.kappa = mag(rng);
        p.gamma = mag(rng);
        p.delta = mag(rng);
        const DerivedParams d = speclab::derive(p);
        const ThermalAmplitudes a = speclab::thermal_amplitudes(d);
        const double n1sq = d.nu1 * d.nu1, n2sq = d.nu2 * d.nu2;

        const ThresholdFlags f2 = speclab::threshold_flags(d, 2);
        const ThresholdFlags f4 = speclab::threshold_flags(d, 4);

        CHECK(f4.u_branch_slow_dominant == (n2sq > 2.0 * n1sq));
        CHECK(f4.u_branch_fast_dominant == (n1sq > 2.0 * n2sq));
        CHECK(f2.theta_branch_first ==
              (a.ell1 * a.ell1 * n2sq > 2.0 * a.ell2 * a.ell2 * n1sq));
        CHECK(f2.theta_branch_second ==
              (a.ell2 * a.ell2 * n1sq > 2.0 * a.ell1 * a.ell1 * n2sq));
        CHECK(f2.theta_condition == (f2.theta_branch_first || f2.theta_branch_second));
        CHECK(f4.u_condition == (f4.u_branch_slow_dominant || f4.u_branch_fast_dominant));
    }
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(speclab::derive(ModelParams{0.0, 1.0, 1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(speclab::derive(ModelParams{-1.0, 1.0, 1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(speclab::derive(ModelParams{1.0, 0.0, 1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(speclab::derive(ModelParams{1.0, -2.0, 1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(speclab::derive(ModelParams{1.0, 1.0, 0.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(speclab::derive(ModelParams{1.0, 1.0, 1.0, -0.5}), std::invalid_argument);
    const double nan = std::nan("");
    CHECK_THROWS_AS(speclab::derive(ModelParams{nan, 1.0, 1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(speclab::derive(ModelParams{1.0, 1.0, 1.0, nan}), std::invalid_argument);

    const DerivedParams d = speclab::derive(unit_params());
    CHECK_THROWS_AS(speclab::threshold_flags(d, 0), std::invalid_argument);
    CHECK_THROWS_AS(speclab::threshold_flags(d, -3), std::invalid_argument);
}
