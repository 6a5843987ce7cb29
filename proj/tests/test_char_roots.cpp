// Root-solver tests. The oracle is an independent Durand-Kerner iteration on
// the same quartic: a completely different algorithm (simultaneous fixed
// point vs companion eigenvalues plus Newton), so agreement is meaningful.

#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "speclab/char_roots.hpp"
#include "speclab/model_params.hpp"

using speclab::AsymptoticZone;
using speclab::Complex;
using speclab::DerivedParams;
using speclab::ModelParams;
using speclab::QuarticCoeffs;
using speclab::RootSet;
using speclab::RootZone;

namespace {

Complex quartic_value(const QuarticCoeffs& q, Complex z) {
    return (((z + q.a3) * z + q.a2) * z + q.a1) * z + q.a0;
}

// Durand-Kerner: all four roots simultaneously, starting on a circle of
// radius given by the Fujiwara bound with a non-symmetric rotation so the
// iteration does not start on a fixed-point symmetry.
std::array<Complex, 4> durand_kerner(const QuarticCoeffs& q) {
    const double radius =
        2.0 * std::max({std::abs(q.a3), std::sqrt(std::abs(q.a2)),
                        std::cbrt(std::abs(q.a1)), std::pow(std::abs(q.a0), 0.25)});
    std::array<Complex, 4> x;
    const Complex seed{0.4, 0.9};
    Complex pw{1.0, 0.0};
    for (int i = 0; i < 4; ++i) {
        pw *= seed;
        x[i] = radius * pw;
    }
    for (int iter = 0; iter < 500; ++iter) {
        double worst = 0.0;
        for (int i = 0; i < 4; ++i) {
            Complex denom{1.0, 0.0};
            for (int j = 0; j < 4; ++j) {
                if (j != i) denom *= x[i] - x[j];
            }
            const Complex step = quartic_value(q, x[i]) / denom;
            x[i] -= step;
            worst = std::max(worst, std::abs(step) / (1.0 + std::abs(x[i])));
        }
        if (worst < 1e-15) break;
    }
    return x;
}

// Greedy min-distance matching between two root multisets; returns the
// largest matched distance.
double match_distance(std::array<Complex, 4> a, std::array<Complex, 4> b) {
    std::vector<Complex> va(a.begin(), a.end());
    std::vector<Complex> vb(b.begin(), b.end());
    double worst = 0.0;
    while (!va.empty()) {
        std::size_t bi = 0, bj = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < va.size(); ++i) {
            for (std::size_t j = 0; j < vb.size(); ++j) {
                const double d = std::abs(va[i] - vb[j]);
                if (d < best) {
                    best = d;
                    bi = i;
                    bj = j;
                }
            }
        }
        worst = std::max(worst, best);
        va.erase(va.begin() + static_cast<std::ptrdiff_t>(bi));
        vb.erase(vb.begin() + static_cast<std::ptrdiff_t>(bj));
    }
    return worst;
}

double root_scale(const std::array<Complex, 4>& roots) {
    double s = 0.0;
    for (Complex z : roots) s = std::max(s, std::abs(z));
    return std::max(s, 1e-30);
}

// Least-squares slope of log|y| against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double lx = std::log(x[i]);
        const double ly = std::log(std::abs(y[i]));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double dn = static_cast<double>(n);
    return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

}  // namespace

TEST_CASE("solver agrees with an independent Durand-Kerner iteration") {
    std::mt19937_64 rng(0xc0ffee11u);
    std::uniform_real_distribution<double> mag(0.1, 3.0);
    std::uniform_real_distribution<double> logr(-3.0, 3.0);

    for (int trial = 0; trial < 400; ++trial) {
        ModelParams p{mag(rng), mag(rng), mag(rng), (trial % 5 == 0) ? 0.0 : mag(rng)};
        const DerivedParams d = speclab::derive(p);
        const double r = std::pow(10.0, logr(rng));

        const RootSet rs = speclab::solve_quartic(p, d, r);
        const QuarticCoeffs q = speclab::characteristic_coeffs(p, r);
        const std::array<Complex, 4> oracle = durand_kerner(q);

        const double scale = root_scale(oracle);
        CHECK(match_distance(rs.roots, oracle) <= 1e-8 * scale);
    }
}

TEST_CASE("root set invariants over a broad sweep") {
    std::mt19937_64 rng(0xdecafbadu);
    std::uniform_real_distribution<double> mag(0.1, 3.0);
    std::uniform_real_distribution<double> logr(-4.0, 4.0);

    for (int trial = 0; trial < 1000; ++trial) {
        ModelParams p{mag(rng), mag(rng), mag(rng), (trial % 4 == 0) ? 0.0 : mag(rng)};
        const DerivedParams d = speclab::derive(p);
        const double r = std::pow(10.0, logr(rng));
        const RootSet rs = speclab::solve_quartic(p, d, r);
        const QuarticCoeffs q = speclab::characteristic_coeffs(p, r);

        // Vieta: sum and product of the roots.
        Complex sum{0.0, 0.0}, prod{1.0, 0.0};
        for (Complex z : rs.roots) {
            sum += z;
            prod *= z;
        }
        const double scale = root_scale(rs.roots);
        CHECK(std::abs(sum - Complex{-q.a3, 0.0}) <= 1e-9 * std::max(scale, std::abs(q.a3)));
        CHECK(std::abs(prod - Complex{q.a0, 0.0}) <= 1e-9 * std::abs(q.a0));

        // Conjugate pairs are stored bit-exactly conjugate.
        if (rs.zone == RootZone::TwoConjugatePairs || rs.zone == RootZone::TwoImaginaryPairs) {
            CHECK(rs.roots[1] == std::conj(rs.roots[0]));
            CHECK(rs.roots[3] == std::conj(rs.roots[2]));
            CHECK(rs.pair_im(1) <= rs.pair_im(2));
        } else if (rs.zone == RootZone::TwoRealOnePair) {
            CHECK(rs.roots[3] == std::conj(rs.roots[2]));
            CHECK(rs.real1() <= rs.real2());
        }

        // Dissipative spectrum for delta > 0.
        if (p.delta > 0.0) {
            double max_re = -std::numeric_limits<double>::infinity();
            for (Complex z : rs.roots) max_re = std::max(max_re, z.real());
            CHECK(max_re < 0.0);
        }

        // Residual invariant.
        const double max_coeff = std::max({std::abs(q.a3), std::abs(q.a2),
                                           std::abs(q.a1), std::abs(q.a0), 1.0});
        for (Complex z : rs.roots) {
            const double m = std::max(1.0, std::abs(z));
            CHECK(std::abs(quartic_value(q, z)) <= 1e-9 * max_coeff * m * m * m * m);
        }
    }
}

TEST_CASE("undamped model has exact imaginary pairs") {
    ModelParams p{1.0, 1.0, 1.0, 0.0};
    const DerivedParams d = speclab::derive(p);

    SUBCASE("r = 2 reference values") {
        const RootSet rs = speclab::solve_quartic(p, d, 2.0);
        REQUIRE(rs.zone == RootZone::TwoImaginaryPairs);
        CHECK(rs.pair_re(1) == 0.0);
        CHECK(rs.pair_re(2) == 0.0);
        CHECK(rs.pair_im(1) == doctest::Approx(1.2360679774997896).epsilon(1e-10));
        CHECK(rs.pair_im(2) == doctest::Approx(3.2360679774997896).epsilon(1e-10));
    }

    SUBCASE("pair frequencies equal nu_j r across r") {
        for (double r : {1e-3, 0.1, 1.0, 10.0, 1e3}) {
            const RootSet rs = speclab::solve_quartic(p, d, r);
            REQUIRE(rs.zone == RootZone::TwoImaginaryPairs);
            CHECK(rs.pair_im(1) == doctest::Approx(d.nu2 * r).epsilon(1e-10));
            CHECK(rs.pair_im(2) == doctest::Approx(d.nu1 * r).epsilon(1e-10));
        }
    }
}

TEST_CASE("damped unit quartic at r = 1") {
    ModelParams p{1.0, 1.0, 1.0, 1.0};
    const DerivedParams d = speclab::derive(p);
    const RootSet rs = speclab::solve_quartic(p, d, 1.0);

    // lambda^4 + lambda^3 + 3 lambda^2 + lambda + 1.
    Complex sum{0.0, 0.0}, prod{1.0, 0.0};
    for (Complex z : rs.roots) {
        sum += z;
        prod *= z;
        CHECK(z.real() < 0.0);
    }
    CHECK(sum.real() == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(std::abs(sum.imag()) <= 1e-12);
    CHECK(prod.real() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(prod.imag()) <= 1e-12);
    CHECK(rs.zone == RootZone::TwoConjugatePairs);
}

TEST_CASE("origin is tagged degenerate") {
    ModelParams p{1.0, 1.0, 1.0, 1.0};
    const DerivedParams d = speclab::derive(p);
    const RootSet rs = speclab::solve_quartic(p, d, 0.0);
    CHECK(rs.zone == RootZone::DegenerateOrigin);
    for (Complex z : rs.roots) CHECK(z == Complex{0.0, 0.0});
    CHECK_THROWS_AS(speclab::solve_quartic(p, d, -1.0), std::invalid_argument);
}

TEST_CASE("discriminant") {
    ModelParams unit{1.0, 1.0, 1.0, 1.0};

    SUBCASE("undamped case has the exact closed form 16 b^2 kappa alpha2^4 r^12") {
        std::mt19937_64 rng(0xabcdu);
        std::uniform_real_distribution<double> mag(0.2, 2.5);
        for (int trial = 0; trial < 200; ++trial) {
            ModelParams p{mag(rng), mag(rng), mag(rng), 0.0};
            const DerivedParams d = speclab::derive(p);
            const double r = std::pow(10.0, -2.0 + 4.0 * (trial / 200.0));
            const double expected = 16.0 * p.b * p.b * p.kappa *
                                    std::pow(d.alpha2, 4.0) * std::pow(r, 12.0);
            const double got = speclab::discriminant(p, r).delta_disc;
            CHECK(got == doctest::Approx(expected).epsilon(1e-9));
        }
    }

    SUBCASE("small-frequency leading order, damped unit set") {
        const double got = speclab::discriminant(unit, 1e-3).delta_disc;
        CHECK(got > 0.0);
        // 16 b^2 kappa ((b^2-kappa)^2 + gamma^4 + 2 kappa gamma^2
        //               + 2 b^2 gamma^2)^2 r^12 = 400 r^12 here.
        CHECK(got == doctest::Approx(400e-36).epsilon(1e-2));
    }

    SUBCASE("large-frequency sign and leading order") {
        const double got = speclab::discriminant(unit, 100.0).delta_disc;
        CHECK(got < 0.0);
        CHECK(got == doctest::Approx(-4e36).epsilon(1e-2));
    }

    SUBCASE("sign agrees with the zone classification") {
        std::mt19937_64 rng(0x77117711u);
        std::uniform_real_distribution<double> mag(0.1, 3.0);
        std::uniform_real_distribution<double> logr(-2.0, 2.5);
        int checked = 0;
        for (int trial = 0; trial < 600; ++trial) {
            ModelParams p{mag(rng), mag(rng), mag(rng), (trial % 4 == 0) ? 0.0 : mag(rng)};
            const DerivedParams d = speclab::derive(p);
            const double r = std::pow(10.0, logr(rng));
            const auto info = speclab::discriminant(p, r);
            const RootSet rs = speclab::solve_quartic(p, d, r);

            // Skip samples too close to the transition for a hard sign.
            const QuarticCoeffs q = speclab::characteristic_coeffs(p, r);
            const double coeff_scale = std::max({std::abs(q.a3), std::abs(q.a2),
                                                 std::abs(q.a1), std::abs(q.a0), 1.0});
            if (std::abs(info.delta_disc) < 1e-6 * std::pow(coeff_scale, 3.0)) continue;
            ++checked;

            if (info.delta_disc > 0.0 && info.p_disc > 0.0) {
                const bool two_pairs = rs.zone == RootZone::TwoConjugatePairs ||
                                       rs.zone == RootZone::TwoImaginaryPairs;
                CHECK(two_pairs);
            } else if (info.delta_disc < 0.0) {
                CHECK(rs.zone == RootZone::TwoRealOnePair);
            }
        }
        CHECK(checked > 400);
    }
}

TEST_CASE("asymptotic root values") {
    ModelParams unit{1.0, 1.0, 1.0, 1.0};
    const DerivedParams d = speclab::derive(unit);

    SUBCASE("small zone at r = 0.01") {
        const auto roots = speclab::asymptotic_roots(d, 0.01, AsymptoticZone::Small);
        CHECK(roots[0].real() == doctest::Approx(-1.3819660112501052e-5).epsilon(1e-9));
        CHECK(roots[0].imag() == doctest::Approx(6.1803398874989485e-3).epsilon(1e-9));
        CHECK(roots[2].real() == doctest::Approx(-3.6180339887498949e-5).epsilon(1e-9));
        CHECK(roots[2].imag() == doctest::Approx(1.6180339887498949e-2).epsilon(1e-9));
        CHECK(roots[1] == std::conj(roots[0]));
        CHECK(roots[3] == std::conj(roots[2]));
    }

    SUBCASE("large zone at r = 100") {
        const auto roots = speclab::asymptotic_roots(d, 100.0, AsymptoticZone::Large);
        CHECK(roots[0].real() == doctest::Approx(-10000.0).epsilon(1e-12));
        CHECK(roots[1].real() == doctest::Approx(-1.0).epsilon(1e-12));
        CHECK(roots[2] == Complex{-0.5, 100.0});
        CHECK(roots[3] == Complex{-0.5, -100.0});
    }

    SUBCASE("large zone rejects the undamped model") {
        ModelParams p{1.0, 1.0, 1.0, 0.0};
        const DerivedParams d0 = speclab::derive(p);
        CHECK_THROWS_AS(speclab::asymptotic_roots(d0, 100.0, AsymptoticZone::Large),
                        std::invalid_argument);
        const auto roots = speclab::asymptotic_roots(d0, 2.0, AsymptoticZone::Small);
        CHECK(roots[0] == Complex{0.0, d0.nu2 * 2.0});
        CHECK(roots[2] == Complex{0.0, d0.nu1 * 2.0});
    }
}

TEST_CASE("small-zone expansion orders") {
    ModelParams unit{1.0, 1.0, 1.0, 1.0};
    const DerivedParams d = speclab::derive(unit);

    std::vector<double> rs;
    std::vector<double> cplx1, cplx2;  // |lambda - leading form| per pair
    std::vector<double> imag1, imag2;  // imaginary-part residuals
    std::vector<double> real1, real2;  // real-part residuals
    for (int k = 0; k <= 16; ++k) {
        const double r = 1e-4 * std::pow(10.0, k / 8.0);  // [1e-4, 1e-2]
        const RootSet sol = speclab::solve_quartic(unit, d, r);
        REQUIRE(sol.zone == RootZone::TwoConjugatePairs);
        const auto asym = speclab::asymptotic_roots(d, r, AsymptoticZone::Small);
        const Complex got1{sol.pair_re(1), sol.pair_im(1)};
        const Complex got2{sol.pair_re(2), sol.pair_im(2)};
        rs.push_back(r);
        cplx1.push_back(std::abs(got1 - asym[0]));
        cplx2.push_back(std::abs(got2 - asym[2]));
        imag1.push_back(std::abs(got1.imag() - asym[0].imag()));
        imag2.push_back(std::abs(got2.imag() - asym[2].imag()));
        real1.push_back(std::abs(got1.real() - asym[0].real()));
        real2.push_back(std::abs(got2.real() - asym[2].real()));
    }

    SUBCASE("full residual is cubic with a stable constant") {
        // C(r) = residual / r^3 must stay within a factor 10 across the grid.
        for (const auto* res : {&cplx1, &cplx2, &imag1, &imag2}) {
            double cmin = std::numeric_limits<double>::infinity(), cmax = 0.0;
            for (std::size_t i = 0; i < rs.size(); ++i) {
                const double c = (*res)[i] / (rs[i] * rs[i] * rs[i]);
                cmin = std::min(cmin, c);
                cmax = std::max(cmax, c);
            }
            CHECK(cmax / cmin <= 10.0);
        }
        CHECK(loglog_slope(rs, cplx1) == doctest::Approx(3.0).epsilon(0.05));
        CHECK(loglog_slope(rs, cplx2) == doctest::Approx(3.0).epsilon(0.05));
    }

    SUBCASE("real-part residual is bounded by C r^3 and is in fact quartic") {
        // The cubic correction to each root turns out to be purely
        // imaginary, so the decay rate of the real part is one order
        // better than the residual bound needs.
        for (std::size_t i = 0; i < rs.size(); ++i) {
            CHECK(real1[i] <= 0.05 * rs[i] * rs[i] * rs[i]);
            CHECK(real2[i] <= 0.5 * rs[i] * rs[i] * rs[i]);
        }
        CHECK(loglog_slope(rs, real1) >= 3.5);
        CHECK(loglog_slope(rs, real2) >= 3.5);
    }
}

TEST_CASE("large-zone expansion orders") {
    ModelParams unit{1.0, 1.0, 1.0, 1.0};
    const DerivedParams d = speclab::derive(unit);

    std::vector<double> rs;
    std::vector<double> res_parabolic, res_const, res_pair_re, res_pair_im;
    for (int k = 0; k <= 16; ++k) {
        const double r = 1e2 * std::pow(10.0, k / 8.0);  // [1e2, 1e4]
        const RootSet sol = speclab::solve_quartic(unit, d, r);
        REQUIRE(sol.zone == RootZone::TwoRealOnePair);
        rs.push_back(r);
        res_parabolic.push_back(std::abs(sol.real1() + unit.delta * r * r));
        res_const.push_back(std::abs(sol.real2() + unit.kappa / unit.delta));
        res_pair_re.push_back(
            std::abs(sol.pair_re(1) + unit.gamma * unit.gamma / (2.0 * unit.delta)));
        res_pair_im.push_back(std::abs(sol.pair_im(1) - unit.b * r));
    }

    SUBCASE("residual bounds") {
        for (std::size_t i = 0; i < rs.size(); ++i) {
            CHECK(res_parabolic[i] <= 0.05 * rs[i]);
            CHECK(res_const[i] <= 0.05 / rs[i]);
            CHECK(res_pair_re[i] <= 10.0 / rs[i]);
            CHECK(res_pair_im[i] <= 10.0 / rs[i]);
        }
    }

    SUBCASE("sharp orders behind the bounds") {
        // The parabolic branch misses -delta r^2 by a constant, the
        // second real branch converges one order faster than required.
        CHECK(std::abs(loglog_slope(rs, res_parabolic)) <= 0.05);
        CHECK(loglog_slope(rs, res_const) == doctest::Approx(-2.0).epsilon(0.05));
        CHECK(res_parabolic.back() ==
              doctest::Approx((unit.kappa + unit.gamma * unit.gamma) / unit.delta)
                  .epsilon(1e-3));
    }
}

TEST_CASE("roots move continuously along a refined frequency grid") {
    ModelParams unit{1.0, 1.0, 1.0, 1.0};
    const DerivedParams d = speclab::derive(unit);

    const int steps = 1500;
    const double r_lo = 0.05, r_hi = 50.0;
    std::array<Complex, 4> prev{};
    double prev_r = 0.0;

    for (int i = 0; i <= steps; ++i) {
        const double r = r_lo * std::pow(r_hi / r_lo, static_cast<double>(i) / steps);
        const RootSet sol = speclab::solve_quartic(unit, d, r);
        if (i > 0) {
            const double dr = r - prev_r;
            // Implicit-function bound: |dlambda/dr| = |P_r(lambda)| / |P'(lambda)|,
            // with generous slack; the bound loosens automatically near the
            // pair-collision radius where P' nearly vanishes.
            std::vector<Complex> cur(sol.roots.begin(), sol.roots.end());
            for (Complex z : prev) {
                double best = std::numeric_limits<double>::infinity();
                std::size_t bj = 0;
                for (std::size_t j = 0; j < cur.size(); ++j) {
                    const double dist = std::abs(z - cur[j]);
                    if (dist < best) {
                        best = dist;
                        bj = j;
                    }
                }
                cur.erase(cur.begin() + static_cast<std::ptrdiff_t>(bj));

                const QuarticCoeffs q = speclab::characteristic_coeffs(unit, prev_r);
                const Complex pr = (2.0 * unit.delta * prev_r) * z * z * z +
                                   (2.0 * (unit.b * unit.b + unit.kappa +
                                           unit.gamma * unit.gamma) * prev_r) * z * z +
                                   (4.0 * unit.b * unit.b * unit.delta *
                                    prev_r * prev_r * prev_r) * z +
                                   4.0 * unit.b * unit.b * unit.kappa *
                                       prev_r * prev_r * prev_r;
                const Complex pprime = ((4.0 * z + 3.0 * q.a3) * z + 2.0 * q.a2) * z + q.a1;
                const double speed = std::abs(pr) / std::max(std::abs(pprime), 1e-300);
                CHECK(best <= 5.0 * speed * dr + 1e-9 * (1.0 + std::abs(z)));
            }
        }
        prev = sol.roots;
        prev_r = r;
    }
}
