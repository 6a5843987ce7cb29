#include "speclab/quadrature.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <vector>

namespace speclab {

namespace {

// ============================================================
// small utilities
// ============================================================

void check_finite(double v, const char* name) {
    if (!std::isfinite(v)) {
        throw std::invalid_argument(std::string(name) + " must be finite");
    }
}

void check_bounds(double lo, double hi) {
    check_finite(lo, "r_lo");
    check_finite(hi, "r_hi");
    if (!(lo >= 0.0) || !(lo < hi)) {
        throw std::invalid_argument("window bounds must satisfy 0 <= r_lo < r_hi");
    }
}

/// Sum with a fixed pairwise tree so the rounding pattern depends only on
/// the operand order, never on how the values were produced.
double pairwise_sum(const double* v, std::size_t count) {
    if (count == 0) return 0.0;
    if (count <= 8) {
        double s = v[0];
        for (std::size_t i = 1; i < count; ++i) s += v[i];
        return s;
    }
    const std::size_t half = count / 2;
    return pairwise_sum(v, half) + pairwise_sum(v + half, count - half);
}

/// Run fn(0..count-1) on up to `threads` workers. Indices are handed out
/// atomically but every index writes only its own slot, so results do not
/// depend on the schedule. The first exception wins and is rethrown.
template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    if (threads <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    const unsigned workers =
        static_cast<unsigned>(std::min<std::size_t>(threads, count));
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mu;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mu);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

// ============================================================
// Gauss panels
// ============================================================

// Gauss-Legendre nodes and weights of order 8 on [-1, 1], exact for
// polynomials through degree 15.
constexpr double kNode[4] = {0.1834346424956498, 0.5255324099163290,
                             0.7966664774136267, 0.9602898564975363};
constexpr double kWeight[4] = {0.3626837833783620, 0.3137066458778873,
                               0.2223810344533745, 0.1012285362903763};

constexpr int kMaxDepth = 48;

class PanelEvaluator {
  public:
    PanelEvaluator(const BatchIntegrand& f, bool gaussian)
        : f_(f), gaussian_(gaussian) {}

    double gauss8(double a, double b) const {
        const double mid = 0.5 * (a + b);
        const double half = 0.5 * (b - a);
        double rs[8];
        double ys[8];
        for (int k = 0; k < 4; ++k) {
            rs[2 * k] = mid - half * kNode[k];
            rs[2 * k + 1] = mid + half * kNode[k];
        }
        f_(rs, ys, 8);
        if (gaussian_) {
            for (int k = 0; k < 8; ++k) ys[k] *= std::exp(-2.0 * rs[k] * rs[k]);
        }
        double s = 0.0;
        for (int k = 0; k < 4; ++k) s += kWeight[k] * (ys[2 * k] + ys[2 * k + 1]);
        return half * s;
    }

  private:
    const BatchIntegrand& f_;
    bool gaussian_;
};

struct Leaf {
    double a;
    double b;
    double value;  // Gauss value of this panel
    double err;    // its share of the parent whole-vs-halves defect
    int depth;
};

struct Segment {
    double a;
    double b;
    double whole;  // Gauss value of the undivided segment
    int depth;
};

/// Depth-first refinement of one segment. Children are pushed right
/// before left so leaves come out in ascending r. `budget` counts
/// segment evaluations and is shared across calls for the same initial
/// panel; running out accepts the remaining segments as they stand.
void refine_into(const PanelEvaluator& eval, const Segment& root,
                 double tol_per_width, std::size_t& budget,
                 std::vector<Leaf>& out) {
    std::vector<Segment> stack;
    stack.push_back(root);
    while (!stack.empty()) {
        const Segment s = stack.back();
        stack.pop_back();
        const double m = 0.5 * (s.a + s.b);
        const double left = eval.gauss8(s.a, m);
        const double right = eval.gauss8(m, s.b);
        const double err = std::abs(s.whole - (left + right));
        const bool out_of_budget = (budget == 0);
        if (budget > 0) --budget;
        const bool accept = err <= tol_per_width * (s.b - s.a) ||
                            s.depth >= kMaxDepth || out_of_budget;
        if (accept) {
            out.push_back({s.a, m, left, 0.5 * err, s.depth + 1});
            out.push_back({m, s.b, right, 0.5 * err, s.depth + 1});
        } else {
            stack.push_back({m, s.b, right, s.depth + 1});
            stack.push_back({s.a, m, left, s.depth + 1});
        }
    }
}

struct PanelState {
    std::vector<Leaf> leaves;
    std::size_t budget = 0;
};

}  // namespace

// ============================================================
// windows
// ============================================================

RadialWindow window_small(double eps0) {
    check_bounds(0.0, eps0);
    return {0.0, eps0, WindowLabel::Small, false, 0.0};
}

RadialWindow window_bounded(double eps0, double n0) {
    check_bounds(eps0, n0);
    if (!(eps0 > 0.0)) throw std::invalid_argument("eps0 must be positive");
    return {eps0, n0, WindowLabel::Bounded, false, 0.0};
}

RadialWindow window_large(double n0, double r_max, double tail_bound) {
    check_bounds(n0, r_max);
    if (!(n0 > 0.0)) throw std::invalid_argument("n0 must be positive");
    check_finite(tail_bound, "tail_bound");
    if (tail_bound < 0.0) throw std::invalid_argument("tail_bound must be nonnegative");
    return {n0, r_max, WindowLabel::Large, false, tail_bound};
}

RadialWindow window_custom(double r_lo, double r_hi, bool gaussian_weight) {
    check_bounds(r_lo, r_hi);
    return {r_lo, r_hi, WindowLabel::Custom, gaussian_weight, 0.0};
}

double gaussian_tail_bound(double a, int n, double alpha) {
    if (n < 1) throw std::invalid_argument("n must be at least 1");
    check_finite(a, "a");
    check_finite(alpha, "alpha");
    if (!(a > 0.0)) throw std::invalid_argument("a must be positive");
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
    // For r >= a, log r <= log a + (r - a)/a and r^2 >= a^2 + 2a(r - a),
    // so the integrand is dominated by a^{n-1} e^{-alpha a^2} times a
    // decaying exponential with rate 2 alpha a - (n - 1)/a.
    const double rate = 2.0 * alpha * a - static_cast<double>(n - 1) / a;
    if (!(rate > 0.0)) {
        throw std::domain_error("tail bound requires a^2 > (n - 1) / (2 alpha)");
    }
    return std::pow(a, n - 1) * std::exp(-alpha * a * a) / rate;
}

double sphere_measure(int n) {
    if (n < 1) throw std::invalid_argument("n must be at least 1");
    return 2.0 * std::pow(M_PI, 0.5 * n) / std::tgamma(0.5 * n);
}

RadialWindow window_preset(WindowKind kind, const DerivedParams& dp, int n,
                           double t, double mu6, double rho1, double eps0) {
    check_finite(t, "t");
    check_finite(eps0, "eps0");
    if (!(t > 0.0)) throw std::invalid_argument("t must be positive");
    if (!(eps0 > 0.0)) throw std::invalid_argument("eps0 must be positive");
    if (n < 1) throw std::invalid_argument("n must be at least 1");

    const bool origin_window = (kind == WindowKind::ChiC1 && (n == 1 || n == 3)) ||
                               (kind == WindowKind::ChiC2 && n == 1);
    const bool sqrt_window = (kind == WindowKind::ChiC1 && n == 4) ||
                             (kind == WindowKind::ChiC2 && n == 2);
    const bool half_line = (kind == WindowKind::ChiC1 && n == 2);
    if (!origin_window && !sqrt_window && !half_line) {
        throw std::invalid_argument("no preset window is defined for this kind and dimension");
    }

    RadialWindow w;
    w.gaussian_weight = true;
    if (origin_window) {
        check_finite(mu6, "mu6");
        if (!(mu6 > 0.0)) throw std::invalid_argument("mu6 must be positive");
        if (dp.nu1 * mu6 > 0.1) {
            throw std::invalid_argument("mu6 must satisfy nu1 * mu6 <= 0.1");
        }
        w.r_lo = 0.0;
        w.r_hi = mu6 / t;
        w.label = WindowLabel::Small;
        if (w.r_hi > eps0 * (1.0 + 1e-12)) {
            throw std::invalid_argument("t is too small: the window must fit inside the small zone");
        }
    } else if (sqrt_window) {
        if (!(t > 1.0)) throw std::invalid_argument("t must exceed 1 for this window");
        w.r_lo = 1.0 / t;
        w.r_hi = 1.0 / std::sqrt(t);
        w.label = WindowLabel::Small;
        if (w.r_hi > eps0 * (1.0 + 1e-12)) {
            throw std::invalid_argument("t is too small: the window must fit inside the small zone");
        }
    } else {
        check_finite(rho1, "rho1");
        if (!(rho1 > 0.0)) throw std::invalid_argument("rho1 must be positive");
        const double lo = 0.75 * M_PI / dp.nu1;
        const double hi = 0.75 * M_PI / dp.nu2;
        if (!(rho1 > lo && rho1 < hi)) {
            throw std::invalid_argument(
                "rho1 must lie strictly between 3 pi / (4 nu1) and 3 pi / (4 nu2)");
        }
        double a = 3.5;
        while (a < 12.0 && gaussian_tail_bound(a, n, 2.0) > 1e-13) a += 0.25;
        w.r_lo = rho1 / t;
        w.r_hi = a;
        w.label = WindowLabel::Large;
        w.tail_bound = gaussian_tail_bound(a, n, 2.0);
        if (!(w.r_lo < w.r_hi)) {
            throw std::invalid_argument("t is too small for the half-line window");
        }
    }
    return w;
}

// ============================================================
// adaptive engine
// ============================================================

QuadratureResult integrate_radial_batch(const BatchIntegrand& f,
                                        const RadialWindow& window, double t,
                                        double osc_freq_hint,
                                        const QuadratureControl& ctl) {
    if (!f) throw std::invalid_argument("integrand must not be empty");
    check_bounds(window.r_lo, window.r_hi);
    check_finite(t, "t");
    check_finite(osc_freq_hint, "osc_freq_hint");
    if (t < 0.0) throw std::invalid_argument("t must be nonnegative");
    if (osc_freq_hint < 0.0) {
        throw std::invalid_argument("osc_freq_hint must be nonnegative");
    }
    if (!(ctl.rel_tol >= 0.0) || !(ctl.abs_tol >= 0.0) ||
        !(ctl.rel_tol + ctl.abs_tol > 0.0)) {
        throw std::invalid_argument("tolerances must be nonnegative and not both zero");
    }
    if (ctl.panel_cap < 8) throw std::invalid_argument("panel_cap is too small");

    const double width = window.r_hi - window.r_lo;
    double w0 = width / 8.0;
    if (osc_freq_hint > 0.0) {
        w0 = std::min(w0, 0.25 * M_PI / osc_freq_hint);
    }
    bool overflowed = false;
    std::size_t n_init = static_cast<std::size_t>(std::ceil(width / w0));
    n_init = std::max<std::size_t>(1, n_init);
    if (n_init > ctl.panel_cap) {
        n_init = ctl.panel_cap;
        overflowed = true;
    }

    auto boundary = [&](std::size_t k) {
        return window.r_lo +
               width * (static_cast<double>(k) / static_cast<double>(n_init));
    };

    const PanelEvaluator eval(f, window.gaussian_weight);

    // Coarse pass: one Gauss value per initial panel, which doubles as
    // the scale estimate for the first refinement tolerance.
    std::vector<double> whole(n_init);
    parallel_for(n_init, ctl.threads, [&](std::size_t i) {
        whole[i] = eval.gauss8(boundary(i), boundary(i + 1));
    });
    const double scale0 = std::abs(pairwise_sum(whole.data(), n_init));

    std::vector<PanelState> panels(n_init);
    for (std::size_t i = 0; i < n_init; ++i) {
        // A run that could not honor the quarter-oscillation rule is going
        // to be reported as failed anyway; zero budgets keep its cost at
        // one split per panel instead of a futile deep refinement.
        const double share = (boundary(i + 1) - boundary(i)) / width;
        panels[i].budget =
            overflowed ? 0
                       : std::max<std::size_t>(
                             64, static_cast<std::size_t>(
                                     share * static_cast<double>(ctl.panel_cap)));
    }

    double tol_scale = 0.5 * std::max(ctl.abs_tol, ctl.rel_tol * scale0);
    double value = 0.0;
    double est = 0.0;
    std::size_t leaf_count = 0;
    bool converged = false;

    for (int attempt = 0; attempt < 6; ++attempt) {
        const double per_width = tol_scale / width;
        parallel_for(n_init, ctl.threads, [&](std::size_t i) {
            PanelState& st = panels[i];
            if (st.leaves.empty()) {
                refine_into(eval, {boundary(i), boundary(i + 1), whole[i], 0},
                            per_width, st.budget, st.leaves);
                return;
            }
            bool needs_work = false;
            for (const Leaf& lf : st.leaves) {
                if (lf.err > per_width * (lf.b - lf.a)) {
                    needs_work = true;
                    break;
                }
            }
            if (!needs_work) return;
            std::vector<Leaf> next;
            next.reserve(st.leaves.size() * 2);
            for (const Leaf& lf : st.leaves) {
                if (lf.err <= per_width * (lf.b - lf.a) || lf.depth >= kMaxDepth ||
                    st.budget == 0) {
                    next.push_back(lf);
                } else {
                    refine_into(eval, {lf.a, lf.b, lf.value, lf.depth}, per_width,
                                st.budget, next);
                }
            }
            st.leaves = std::move(next);
        });

        std::vector<double> vals;
        std::vector<double> errs;
        for (const PanelState& st : panels) {
            for (const Leaf& lf : st.leaves) {
                vals.push_back(lf.value);
                errs.push_back(lf.err);
            }
        }
        leaf_count = vals.size();
        value = pairwise_sum(vals.data(), vals.size());
        est = pairwise_sum(errs.data(), errs.size());

        const double target = ctl.rel_tol * std::abs(value) + ctl.abs_tol;
        if (est <= target && !overflowed) {
            converged = true;
            break;
        }
        if (leaf_count >= ctl.panel_cap || overflowed) break;
        bool any_budget = false;
        for (const PanelState& st : panels) any_budget |= st.budget > 0;
        if (!any_budget) break;
        tol_scale = std::min(0.25 * target, 0.25 * tol_scale);
    }

    return {value, est, leaf_count, converged};
}

QuadratureResult integrate_radial(const std::function<double(double)>& f,
                                  const RadialWindow& window, double t,
                                  double osc_freq_hint,
                                  const QuadratureControl& ctl) {
    if (!f) throw std::invalid_argument("integrand must not be empty");
    const BatchIntegrand batch = [&f](const double* r, double* out,
                                      std::size_t count) {
        for (std::size_t i = 0; i < count; ++i) out[i] = f(r[i]);
    };
    return integrate_radial_batch(batch, window, t, osc_freq_hint, ctl);
}

// ============================================================
// named integrals
// ============================================================

namespace {

/// Raise r to the small integer power n - 1 without calling pow.
double radial_weight(double r, int weight_pow) {
    double w = 1.0;
    for (int p = 0; p < weight_pow; ++p) w *= r;
    return w;
}

/// value -> sqrt(angular * value) with first-order error propagation.
QuadratureResult to_norm(const QuadratureResult& base, double angular) {
    QuadratureResult out = base;
    const double sq = angular * std::max(0.0, base.value);
    out.value = std::sqrt(sq);
    out.est_error = out.value > 0.0
                        ? angular * base.est_error / (2.0 * out.value)
                        : std::sqrt(angular * base.est_error);
    return out;
}

}  // namespace

QuadratureResult i_of_t(const DoubleKernelSpec& spec, int n, double t,
                        double eps0, const QuadratureControl& ctl) {
    if (n < 1) throw std::invalid_argument("n must be at least 1");
    check_finite(eps0, "eps0");
    if (!(eps0 > 0.0)) throw std::invalid_argument("eps0 must be positive");
    if (n < 1 + 2 * spec.sigma && spec.l1 != spec.l2) {
        throw std::domain_error(
            "the second moment diverges at r = 0 when n < 1 + 2 sigma with "
            "unequal amplitudes; use blowup_probe over a punctured window");
    }
    const int weight_pow = n - 1;
    const BatchIntegrand f = [spec, t, weight_pow](const double* r, double* out,
                                                   std::size_t count) {
        double buf[16];
        std::size_t done = 0;
        while (done < count) {
            const std::size_t chunk = std::min<std::size_t>(16, count - done);
            double_kernel_batch(spec, t, r + done, buf, chunk);
            for (std::size_t k = 0; k < chunk; ++k) {
                out[done + k] =
                    buf[k] * buf[k] * radial_weight(r[done + k], weight_pow);
            }
            done += chunk;
        }
    };
    const double osc = std::max(spec.beta1, spec.beta2) * t;
    return integrate_radial_batch(f, window_custom(0.0, eps0), t, osc, ctl);
}

QuadratureResult kernel_l2_norm(KernelId id, const DerivedParams& dp, int n,
                                double t, const RadialWindow& window,
                                const QuadratureControl& ctl) {
    if (n < 1) throw std::invalid_argument("n must be at least 1");
    const double angular =
        sphere_measure(n) /
        (angular_tag(id) == AngularTag::VectorDirection ? static_cast<double>(n)
                                                        : 1.0);
    const int weight_pow = n - 1;
    const BatchIntegrand f = [id, dp, t, weight_pow](const double* r, double* out,
                                                     std::size_t count) {
        double buf[16];
        std::size_t done = 0;
        while (done < count) {
            const std::size_t chunk = std::min<std::size_t>(16, count - done);
            kernel_radial_batch(id, dp, t, r + done, buf, chunk);
            for (std::size_t k = 0; k < chunk; ++k) {
                out[done + k] =
                    buf[k] * buf[k] * radial_weight(r[done + k], weight_pow);
            }
            done += chunk;
        }
    };
    const double osc = dp.nu1 * t;
    return to_norm(integrate_radial_batch(f, window, t, osc, ctl), angular);
}

SpectralState data_state(const DataProfile& data, double r) {
    auto sample = [r](const std::function<double(double)>& g) {
        return g ? g(r) : 0.0;
    };
    SpectralState state;
    state.r = r;
    state.u0_amp = Complex(r * sample(data.g0), 0.0);
    state.u1_amp = Complex(r * sample(data.g1), 0.0);
    state.th0 = Complex(sample(data.h0), 0.0);
    state.th1 = Complex(sample(data.h1), 0.0);
    return state;
}

QuadratureResult solution_l2_norm(const ModelParams& params,
                                  const DerivedParams& dp,
                                  const DataProfile& data, ModelKind model,
                                  TargetField target, int n, double t,
                                  const RadialWindow& window,
                                  const QuadratureControl& ctl) {
    if (n < 1) throw std::invalid_argument("n must be at least 1");
    const int weight_pow = n - 1;
    auto f = [&](double r) {
        const SpectralState state = data_state(data, r);
        const SolutionPair sol = evaluate_solution(params, dp, state, model, t);
        const double mag =
            target == TargetField::U ? std::abs(sol.u_amp) : std::abs(sol.theta);
        return mag * mag * radial_weight(r, weight_pow);
    };
    // The fast pair oscillates at nu1 r t in the small zone and at b r t
    // far out; cover both.
    const double osc = std::max(dp.nu1, params.b) * t;
    return to_norm(integrate_radial(f, window, t, osc, ctl),
                   sphere_measure(n));
}

}  // namespace speclab
