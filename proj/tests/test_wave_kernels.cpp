// Kernel evaluator tests. Reference values come from the plain textbook
// formula evaluated where it is well conditioned (moderate r t), from Taylor
// oracles where it is not, and from exact algebraic identities.

#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "speclab/model_params.hpp"
#include "speclab/simd_dispatch.hpp"
#include "speclab/wave_kernels.hpp"

using speclab::AngularTag;
using speclab::DerivedParams;
using speclab::DoubleKernelSpec;
using speclab::EvalBranch;
using speclab::KernelId;
using speclab::ModelParams;
using speclab::ProfileId;

namespace {

DerivedParams unit_derived() { return speclab::derive(ModelParams{1.0, 1.0, 1.0, 1.0}); }

// Plain formula with no cancellation protection; trustworthy for rt >~ 0.1.
double naive_double_kernel(const DoubleKernelSpec& s, double t, double r) {
    const double x = r * r * t;
    double v = s.l1 * std::sin(s.beta1 * r * t) / (s.beta1 * r) * std::exp(-s.c1 * x) -
               s.l2 * std::sin(s.beta2 * r * t) / (s.beta2 * r) * std::exp(-s.c2 * x);
    for (int k = 0; k < s.sigma; ++k) v /= r;
    return v;
}

DoubleKernelSpec random_spec(std::mt19937_64& rng, bool equal_amps) {
    std::uniform_real_distribution<double> amp(-2.0, 2.0);
    std::uniform_real_distribution<double> speed(0.3, 3.0);
    std::uniform_real_distribution<double> diff(0.0, 1.0);
    std::uniform_int_distribution<int> sig(0, 1);
    DoubleKernelSpec s;
    s.l1 = amp(rng);
    s.l2 = equal_amps ? s.l1 : amp(rng);
    s.beta1 = speed(rng);
    s.beta2 = speed(rng);
    s.c1 = diff(rng);
    s.c2 = diff(rng);
    s.sigma = sig(rng);
    return s;
}

}  // namespace

TEST_CASE("named kernels against the plain formula at moderate arguments") {
    const DerivedParams d = unit_derived();
    for (double t : {0.5, 1.0, 7.0}) {
        for (double r : {0.3, 1.0, 2.5}) {
            for (KernelId id : {KernelId::G1, KernelId::G2, KernelId::G3, KernelId::G4}) {
                const double got = speclab::kernel_radial(id, d, t, r);
                const double want = naive_double_kernel(speclab::kernel_spec(id, d), t, r);
                CHECK(got == doctest::Approx(want).epsilon(1e-12));
            }
            const double x = r * r * t;
            const double g0 = std::cos(d.nu1 * r * t) * std::exp(-d.c1 * x) / r -
                              std::cos(d.nu2 * r * t) * std::exp(-d.c2 * x) / r;
            CHECK(speclab::kernel_radial(KernelId::G0, d, t, r) ==
                  doctest::Approx(g0).epsilon(1e-11));
        }
    }
}

TEST_CASE("kernel structure") {
    const DerivedParams d = unit_derived();

    SUBCASE("angular tags") {
        CHECK(speclab::angular_tag(KernelId::G1) == AngularTag::VectorDirection);
        CHECK(speclab::angular_tag(KernelId::G3) == AngularTag::VectorDirection);
        CHECK(speclab::angular_tag(KernelId::G0) == AngularTag::Scalar);
        CHECK(speclab::angular_tag(KernelId::G2) == AngularTag::Scalar);
        CHECK(speclab::angular_tag(KernelId::G4) == AngularTag::Scalar);
    }

    SUBCASE("G0 is not a sinc pair") {
        CHECK_THROWS_AS(speclab::kernel_spec(KernelId::G0, d), std::invalid_argument);
    }

    SUBCASE("undamped kernels drop the diffusion factors") {
        const DoubleKernelSpec g3 = speclab::kernel_spec(KernelId::G3, d);
        const DoubleKernelSpec g4 = speclab::kernel_spec(KernelId::G4, d);
        CHECK(g3.c1 == 0.0);
        CHECK(g3.c2 == 0.0);
        CHECK(g4.c1 == 0.0);
        CHECK(g4.c2 == 0.0);
        const DoubleKernelSpec g1 = speclab::kernel_spec(KernelId::G1, d);
        CHECK(g1.c1 == d.c1);
        CHECK(g1.c2 == d.c2);
        CHECK(g1.l1 == g1.l2);
        CHECK(g1.sigma == 1);
    }
}

TEST_CASE("small-argument behavior") {
    const DerivedParams d = unit_derived();

    SUBCASE("temperature kernels tend to t at the origin") {
        for (double t : {0.0, 0.4, 3.0, 250.0}) {
            CHECK(speclab::kernel_radial(KernelId::G2, d, t, 0.0) ==
                  doctest::Approx(t).epsilon(1e-14));
            CHECK(speclab::kernel_radial(KernelId::G4, d, t, 0.0) ==
                  doctest::Approx(t).epsilon(1e-14));
        }
        // Approach, not just the limit point.
        CHECK(speclab::kernel_radial(KernelId::G2, d, 2.0, 1e-7) ==
              doctest::Approx(2.0).epsilon(1e-8));
    }

    SUBCASE("displacement kernels vanish at the origin") {
        CHECK(speclab::kernel_radial(KernelId::G1, d, 3.0, 0.0) == 0.0);
        CHECK(speclab::kernel_radial(KernelId::G3, d, 3.0, 0.0) == 0.0);
        CHECK(speclab::kernel_radial(KernelId::G0, d, 3.0, 0.0) == 0.0);
    }

    SUBCASE("undamped displacement kernel leading term") {
        // |G3| ~ (gamma/alpha2) (nu1^2 - nu2^2)/6 t^3 r = t^3 r / 6 at the
        // unit set, since nu1^2 - nu2^2 = alpha2.
        for (double t : {0.5, 1.0, 2.0}) {
            const double r = 1e-3 / t;
            const double got = speclab::kernel_radial(KernelId::G3, d, t, r);
            CHECK(std::abs(got) == doctest::Approx(t * t * t * r / 6.0).epsilon(1e-2));
        }
    }

    SUBCASE("cosine pair kernel is zero at t = 0") {
        for (double r : {0.0, 1e-5, 0.3, 10.0}) {
            CHECK(speclab::kernel_radial(KernelId::G0, d, 0.0, r) == 0.0);
        }
    }
}

TEST_CASE("double kernel properties") {
    std::mt19937_64 rng(0x9e3779b9u);

    SUBCASE("swap antisymmetry is bit-exact") {
        for (int trial = 0; trial < 300; ++trial) {
            const DoubleKernelSpec s = random_spec(rng, trial % 3 == 0);
            DoubleKernelSpec w = s;
            std::swap(w.l1, w.l2);
            std::swap(w.beta1, w.beta2);
            std::swap(w.c1, w.c2);
            std::uniform_real_distribution<double> tg(0.0, 20.0), rg(1e-6, 5.0);
            const double t = tg(rng), r = rg(rng);
            CHECK(speclab::double_kernel(w, t, r) == -speclab::double_kernel(s, t, r));
        }
    }

    SUBCASE("amplitude and frequency bounds") {
        for (int trial = 0; trial < 300; ++trial) {
            const DoubleKernelSpec s = random_spec(rng, trial % 2 == 0);
            std::uniform_real_distribution<double> tg(0.0, 50.0), rg(1e-4, 8.0);
            const double t = tg(rng), r = rg(rng);
            const double v = std::abs(speclab::double_kernel(s, t, r));
            double rsig = 1.0;
            for (int k = 0; k < s.sigma; ++k) rsig *= r;
            const double freq_bound =
                (std::abs(s.l1) / s.beta1 + std::abs(s.l2) / s.beta2) / (r * rsig);
            const double amp_bound = (std::abs(s.l1) + std::abs(s.l2)) * t / rsig;
            CHECK(v <= freq_bound * (1.0 + 1e-12));
            CHECK(v <= amp_bound * (1.0 + 1e-12));
        }
    }

    SUBCASE("series and direct branches agree on the overlap strip") {
        // Speeds are kept separated like the physical pairs nu1 > nu2; with
        // nearly equal speeds the direct branch itself has nothing left to
        // resolve at rt = 1e-3 and the comparison would test only noise.
        for (int trial = 0; trial < 200; ++trial) {
            DoubleKernelSpec s = random_spec(rng, true);
            std::uniform_real_distribution<double> slow(0.3, 1.2), gap(0.8, 1.8);
            s.beta2 = slow(rng);
            s.beta1 = s.beta2 + gap(rng);
            std::uniform_real_distribution<double> rt(1e-3, 1e-1), tg(0.5, 100.0);
            const double t = tg(rng);
            const double r = rt(rng) / (s.beta1 * t);
            const double direct = speclab::double_kernel(s, t, r, EvalBranch::Direct);
            const double series = speclab::double_kernel(s, t, r, EvalBranch::Series);
            CHECK(series == doctest::Approx(direct).epsilon(1e-8));
        }
    }

    SUBCASE("exact cancellation") {
        const DoubleKernelSpec s{1.0, 1.0, 0.7, 0.7, 0.2, 0.2, 0};
        for (double t : {0.0, 1.0, 40.0}) {
            for (double r : {1e-8, 1e-3, 1.0}) {
                CHECK(speclab::double_kernel(s, t, r) == 0.0);
            }
        }
    }

    SUBCASE("non-cancelling singular case") {
        const DoubleKernelSpec s{1.0, 2.0, 1.0, 1.0, 0.3, 0.3, 1};
        const double v = speclab::double_kernel(s, 1.0, 1e-6);
        CHECK(v * 1e-6 == doctest::Approx(-1.0).epsilon(1e-3));
        CHECK(std::isinf(speclab::double_kernel(s, 1.0, 0.0)));
        CHECK(speclab::double_kernel(s, 1.0, 0.0) < 0.0);
        // sigma = 0 limit is finite.
        DoubleKernelSpec s0 = s;
        s0.sigma = 0;
        CHECK(speclab::double_kernel(s0, 3.0, 0.0) == doctest::Approx(-3.0).epsilon(1e-14));
    }

    SUBCASE("zero time gives zero for positive radius") {
        for (int trial = 0; trial < 50; ++trial) {
            const DoubleKernelSpec s = random_spec(rng, trial % 2 == 0);
            std::uniform_real_distribution<double> rg(1e-6, 5.0);
            CHECK(speclab::double_kernel(s, 0.0, rg(rng)) == 0.0);
        }
    }

    SUBCASE("validation") {
        DoubleKernelSpec s;
        s.beta1 = 0.0;
        CHECK_THROWS_AS(speclab::double_kernel(s, 1.0, 1.0), std::invalid_argument);
        s = DoubleKernelSpec{};
        s.c2 = -0.1;
        CHECK_THROWS_AS(speclab::double_kernel(s, 1.0, 1.0), std::invalid_argument);
        s = DoubleKernelSpec{};
        CHECK_THROWS_AS(speclab::double_kernel(s, -1.0, 1.0), std::invalid_argument);
        CHECK_THROWS_AS(speclab::double_kernel(s, 1.0, -1.0), std::invalid_argument);
        s.sigma = -1;
        CHECK_THROWS_AS(speclab::double_kernel(s, 1.0, 1.0), std::invalid_argument);
    }
}

TEST_CASE("profiles") {
    const DerivedParams d = unit_derived();

    SUBCASE("zero mean gives the zero profile") {
        for (ProfileId id : {ProfileId::Phi, ProfileId::Psi, ProfileId::PhiTilde,
                             ProfileId::PsiTilde}) {
            CHECK(speclab::profile_amplitude(id, d, 0.0, 3.0, 0.7) == 0.0);
        }
    }

    SUBCASE("temperature profile limit carries the mean") {
        CHECK(speclab::profile_amplitude(ProfileId::Psi, d, 2.5, 4.0, 0.0) ==
              doctest::Approx(10.0).epsilon(1e-14));
    }

    SUBCASE("undamped profiles coincide with damped ones when delta = 0") {
        const DerivedParams d0 = speclab::derive(ModelParams{1.0, 1.0, 1.0, 0.0});
        for (double t : {0.5, 3.0, 20.0}) {
            for (double r : {1e-4, 0.2, 1.5}) {
                CHECK(speclab::profile_amplitude(ProfileId::Phi, d0, 1.3, t, r) ==
                      speclab::profile_amplitude(ProfileId::PhiTilde, d0, 1.3, t, r));
                CHECK(speclab::profile_amplitude(ProfileId::Psi, d0, 1.3, t, r) ==
                      speclab::profile_amplitude(ProfileId::PsiTilde, d0, 1.3, t, r));
            }
        }
    }
}

TEST_CASE("batch backends") {
    const DerivedParams d = unit_derived();
    std::mt19937_64 rng(0x51d5eedu);
    std::uniform_real_distribution<double> rg(1e-5, 6.0);

    std::vector<double> radii(1037);
    for (double& r : radii) r = rg(rng);
    radii[0] = 0.0;      // limit lane
    radii[1] = 1e-9;     // deep series lane
    radii[2] = 2.5e-4;   // series lane near the threshold

    const DoubleKernelSpec s = speclab::kernel_spec(KernelId::G2, d);
    const double t = 3.7;

    std::vector<double> ref(radii.size());
    for (std::size_t i = 0; i < radii.size(); ++i) {
        ref[i] = speclab::double_kernel(s, t, radii[i]);
    }

    SUBCASE("scalar backend matches the per-point evaluator bit-for-bit") {
        speclab::set_simd_backend(speclab::SimdBackend::Scalar);
        std::vector<double> got(radii.size());
        speclab::double_kernel_batch(s, t, radii.data(), got.data(), radii.size());
        speclab::set_simd_backend(speclab::SimdBackend::Auto);
        for (std::size_t i = 0; i < radii.size(); ++i) CHECK(got[i] == ref[i]);
    }

    SUBCASE("vector backend equivalence") {
        if (!speclab::cpu_supports_vector_batch()) {
            CHECK_THROWS_AS(speclab::set_simd_backend(speclab::SimdBackend::Vector),
                            std::invalid_argument);
            return;
        }
        speclab::set_simd_backend(speclab::SimdBackend::Vector);
        CHECK(speclab::active_simd_backend() == speclab::SimdBackend::Vector);
        std::vector<double> got(radii.size());
        speclab::double_kernel_batch(s, t, radii.data(), got.data(), radii.size());

        // Same check for a vector-tagged kernel and a generic spec.
        std::vector<double> got_g1(radii.size()), ref_g1(radii.size());
        speclab::kernel_radial_batch(KernelId::G1, d, t, radii.data(), got_g1.data(),
                                     radii.size());
        speclab::set_simd_backend(speclab::SimdBackend::Scalar);
        std::vector<double> ref_scalar(radii.size());
        speclab::double_kernel_batch(s, t, radii.data(), ref_scalar.data(), radii.size());
        speclab::kernel_radial_batch(KernelId::G1, d, t, radii.data(), ref_g1.data(),
                                     radii.size());
        speclab::set_simd_backend(speclab::SimdBackend::Auto);

        // Hybrid tolerance: the kernels cross zero, so pure relative
        // comparison would be meaningless at the crossings.
        for (std::size_t i = 0; i < radii.size(); ++i) {
            CHECK(std::abs(got[i] - ref_scalar[i]) <=
                  2e-13 * (1.0 + std::abs(ref_scalar[i]) + t));
            CHECK(std::abs(got_g1[i] - ref_g1[i]) <=
                  2e-13 * (1.0 + std::abs(ref_g1[i]) + t));
        }
    }
}
