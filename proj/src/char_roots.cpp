#include "speclab/char_roots.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

namespace speclab {

namespace {

// ============================================================
// polynomial helpers
// ============================================================

// P(z) and P'(z) of the monic quartic by a single Horner sweep.
void eval_quartic(const QuarticCoeffs& q, Complex z, Complex& p, Complex& dp) {
    p = z + q.a3;
    dp = Complex{1.0, 0.0};
    dp = dp * z + p;
    p = p * z + q.a2;
    dp = dp * z + p;
    p = p * z + q.a1;
    dp = dp * z + p;
    p = p * z + q.a0;
}

Complex newton_refine(const QuarticCoeffs& q, Complex z, int steps) {
    for (int s = 0; s < steps; ++s) {
        Complex p, dp;
        eval_quartic(q, z, p, dp);
        double scale = std::abs(z);
        if (std::abs(dp) <= 1e-300 * std::max(1.0, scale)) {
            break;  // nearly multiple root, leave the eigenvalue as is
        }
        z -= p / dp;
    }
    return z;
}

bool is_real_root(Complex z) {
    return std::abs(z.imag()) <= 1e-9 * (1.0 + std::abs(z));
}

}  // namespace

// ============================================================
// coefficients and discriminant
// ============================================================

QuarticCoeffs characteristic_coeffs(const ModelParams& params, double r) {
    const double r2 = r * r;
    const double b2 = params.b * params.b;
    QuarticCoeffs q;
    q.a3 = params.delta * r2;
    q.a2 = (b2 + params.kappa + params.gamma * params.gamma) * r2;
    q.a1 = b2 * params.delta * r2 * r2;
    q.a0 = b2 * params.kappa * r2 * r2;
    return q;
}

DiscriminantInfo discriminant(const ModelParams& params, double r) {
    const QuarticCoeffs q = characteristic_coeffs(params, r);
    const double p = q.a3, c = q.a2, d = q.a1, e = q.a0;

    // Standard 16-term discriminant of the monic quartic
    // x^4 + p x^3 + c x^2 + d x + e.
    const double p2 = p * p, p3 = p2 * p, p4 = p3 * p;
    const double c2 = c * c, c3 = c2 * c, c4 = c3 * c;
    const double d2 = d * d, d3 = d2 * d, d4 = d3 * d;
    const double e2 = e * e, e3 = e2 * e;

    DiscriminantInfo out;
    out.delta_disc = 256.0 * e3 - 192.0 * p * d * e2 - 128.0 * c2 * e2 +
                     144.0 * c * d2 * e - 27.0 * d4 + 144.0 * p2 * c * e2 -
                     6.0 * p2 * d2 * e - 80.0 * p * c2 * d * e + 18.0 * p * c * d3 +
                     16.0 * c4 * e - 4.0 * c3 * d2 - 27.0 * p4 * e2 +
                     18.0 * p3 * c * d * e - 4.0 * p3 * d3 - 4.0 * p2 * c3 * e +
                     p2 * c2 * d2;
    out.p_disc = 8.0 * c - 3.0 * p2;
    return out;
}

// ============================================================
// RootSet accessors
// ============================================================

const char* to_string(RootZone zone) {
    switch (zone) {
        case RootZone::DegenerateOrigin: return "degenerate_origin";
        case RootZone::TwoImaginaryPairs: return "two_imaginary_pairs";
        case RootZone::TwoConjugatePairs: return "two_conjugate_pairs";
        case RootZone::TwoRealOnePair: return "two_real_one_pair";
        case RootZone::FourReal: return "four_real";
    }
    return "unknown";
}

double RootSet::pair_re(int k) const {
    switch (zone) {
        case RootZone::TwoImaginaryPairs:
        case RootZone::TwoConjugatePairs:
            if (k != 1 && k != 2) throw std::logic_error("pair index must be 1 or 2");
            return roots[k == 1 ? 0 : 2].real();
        case RootZone::TwoRealOnePair:
            return roots[2].real();
        default:
            throw std::logic_error("root zone has no conjugate pair");
    }
}

double RootSet::pair_im(int k) const {
    switch (zone) {
        case RootZone::TwoImaginaryPairs:
        case RootZone::TwoConjugatePairs:
            if (k != 1 && k != 2) throw std::logic_error("pair index must be 1 or 2");
            return roots[k == 1 ? 0 : 2].imag();
        case RootZone::TwoRealOnePair:
            return roots[2].imag();
        default:
            throw std::logic_error("root zone has no conjugate pair");
    }
}

double RootSet::real1() const {
    if (zone != RootZone::TwoRealOnePair && zone != RootZone::FourReal) {
        throw std::logic_error("root zone has no real roots");
    }
    return roots[0].real();
}

double RootSet::real2() const {
    if (zone != RootZone::TwoRealOnePair && zone != RootZone::FourReal) {
        throw std::logic_error("root zone has no real roots");
    }
    return roots[1].real();
}

// ============================================================
// solver
// ============================================================

RootSet solve_quartic(const ModelParams& params, const DerivedParams& dp, double r) {
    (void)dp;
    if (!std::isfinite(r) || r < 0.0) {
        throw std::invalid_argument("r must be finite and nonnegative");
    }

    RootSet out;
    out.r = r;
    if (r == 0.0) {
        out.zone = RootZone::DegenerateOrigin;
        out.roots.fill(Complex{0.0, 0.0});
        return out;
    }

    const QuarticCoeffs q = characteristic_coeffs(params, r);

    // Companion matrix of the radially scaled quartic (lambda = r mu), whose
    // coefficients stay O(1) as r -> 0. Without the scaling the eigenvalue
    // sweep loses half its digits on the wildly graded coefficients r^2..r^4.
    const double b2 = params.b * params.b;
    QuarticCoeffs qs;
    qs.a3 = params.delta * r;
    qs.a2 = b2 + params.kappa + params.gamma * params.gamma;
    qs.a1 = b2 * params.delta * r;
    qs.a0 = b2 * params.kappa;

    Eigen::Matrix4d companion = Eigen::Matrix4d::Zero();
    companion(0, 3) = -qs.a0;
    companion(1, 3) = -qs.a1;
    companion(2, 3) = -qs.a2;
    companion(3, 3) = -qs.a3;
    companion(1, 0) = 1.0;
    companion(2, 1) = 1.0;
    companion(3, 2) = 1.0;

    Eigen::EigenSolver<Eigen::Matrix4d> solver(companion, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("companion eigenvalue iteration failed to converge");
    }

    std::vector<Complex> work;
    work.reserve(4);
    const double max_coeff = std::max({std::abs(q.a3), std::abs(q.a2),
                                       std::abs(q.a1), std::abs(q.a0), 1.0});
    for (int i = 0; i < 4; ++i) {
        const Complex z = newton_refine(q, r * solver.eigenvalues()(i), 2);
        Complex p, pd;
        eval_quartic(q, z, p, pd);
        const double mag = std::max(1.0, std::abs(z));
        const double scale = max_coeff * mag * mag * mag * mag;
        if (!(std::abs(p) <= 1e-9 * scale)) {
            throw std::runtime_error("quartic root residual exceeds tolerance after refinement");
        }
        work.push_back(z);
    }

    std::vector<double> reals;
    std::vector<Complex> nonreal;
    for (Complex z : work) {
        if (is_real_root(z)) {
            reals.push_back(z.real());
        } else {
            nonreal.push_back(z);
        }
    }

    // A lone non-real root cannot exist for a real quartic; if rounding
    // produced an odd count, demote the one closest to the axis.
    if (nonreal.size() % 2 != 0) {
        auto it = std::min_element(nonreal.begin(), nonreal.end(), [](Complex a, Complex b) {
            return std::abs(a.imag()) < std::abs(b.imag());
        });
        reals.push_back(it->real());
        nonreal.erase(it);
    }

    // Greedy conjugate pairing: repeatedly join the two roots that are
    // closest to being mutual conjugates, then symmetrize the pair.
    std::vector<std::pair<double, double>> pairs;  // (re, im > 0)
    while (!nonreal.empty()) {
        std::size_t bi = 0, bj = 1;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < nonreal.size(); ++i) {
            for (std::size_t j = 0; j < nonreal.size(); ++j) {
                if (i == j) continue;
                const double d = std::abs(nonreal[i] - std::conj(nonreal[j]));
                if (d < best) {
                    best = d;
                    bi = i;
                    bj = j;
                }
            }
        }
        const Complex mu = 0.5 * (nonreal[bi] + std::conj(nonreal[bj]));
        pairs.emplace_back(mu.real(), std::abs(mu.imag()));
        if (bi < bj) std::swap(bi, bj);
        nonreal.erase(nonreal.begin() + static_cast<std::ptrdiff_t>(bi));
        nonreal.erase(nonreal.begin() + static_cast<std::ptrdiff_t>(bj));
    }

    std::sort(reals.begin(), reals.end());
    std::sort(pairs.begin(), pairs.end(),
              [](const auto& a, const auto& b) { return a.second < b.second; });

    if (pairs.size() == 2) {
        out.zone = (params.delta == 0.0) ? RootZone::TwoImaginaryPairs
                                         : RootZone::TwoConjugatePairs;
        if (params.delta == 0.0) {
            // Zero odd coefficients make the quartic biquadratic, so the
            // roots are exactly imaginary; drop the rounding residue.
            pairs[0].first = 0.0;
            pairs[1].first = 0.0;
        }
        out.roots = {Complex{pairs[0].first, pairs[0].second},
                     Complex{pairs[0].first, -pairs[0].second},
                     Complex{pairs[1].first, pairs[1].second},
                     Complex{pairs[1].first, -pairs[1].second}};
    } else if (pairs.size() == 1) {
        out.zone = RootZone::TwoRealOnePair;
        out.roots = {Complex{reals[0], 0.0}, Complex{reals[1], 0.0},
                     Complex{pairs[0].first, pairs[0].second},
                     Complex{pairs[0].first, -pairs[0].second}};
    } else {
        out.zone = RootZone::FourReal;
        out.roots = {Complex{reals[0], 0.0}, Complex{reals[1], 0.0},
                     Complex{reals[2], 0.0}, Complex{reals[3], 0.0}};
    }
    return out;
}

// ============================================================
// asymptotics
// ============================================================

std::array<Complex, 4> asymptotic_roots(const DerivedParams& dp, double r, AsymptoticZone zone) {
    if (!std::isfinite(r) || r < 0.0) {
        throw std::invalid_argument("r must be finite and nonnegative");
    }
    const ModelParams& p = dp.source;
    if (zone == AsymptoticZone::Large && p.delta == 0.0) {
        throw std::invalid_argument(
            "large-frequency expansion requires delta > 0; with delta = 0 the "
            "small-zone roots +-i nu_j r are exact at every r");
    }
    const double r2 = r * r;

    if (zone == AsymptoticZone::Small) {
        // Slow pair first, matching the canonical RootSet order. When
        // delta = 0 these are the exact roots, not just leading order.
        return {Complex{-dp.c2 * r2, dp.nu2 * r}, Complex{-dp.c2 * r2, -dp.nu2 * r},
                Complex{-dp.c1 * r2, dp.nu1 * r}, Complex{-dp.c1 * r2, -dp.nu1 * r}};
    }

    // Leading order only; the parabolic branch also carries a constant
    // correction (kappa + gamma^2)/delta that is dropped here on purpose.
    const double g2 = p.gamma * p.gamma;
    double real_a = -p.delta * r2;
    double real_b = -p.kappa / p.delta;
    if (real_a > real_b) std::swap(real_a, real_b);
    const double pair_re = -g2 / (2.0 * p.delta);
    return {Complex{real_a, 0.0}, Complex{real_b, 0.0},
            Complex{pair_re, p.b * r}, Complex{pair_re, -p.b * r}};
}

}  // namespace speclab
