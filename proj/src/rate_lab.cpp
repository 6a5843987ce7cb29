#include "speclab/rate_lab.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>

#include "speclab/char_roots.hpp"

namespace speclab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) {
        throw std::invalid_argument(std::string(what) + " must be finite");
    }
}

}  // namespace

// ============================================================
// reference rates
// ============================================================

double reference_rate(RateFamily family, int n, double t) {
    if (n < 1) throw std::invalid_argument("dimension must be at least 1");
    require_finite(t, "t");
    if (t < 0.0) throw std::invalid_argument("t must be non-negative");

    const double base = 1.0 + t;
    const double slog = std::sqrt(std::log(std::exp(1.0) + t));
    if (family == RateFamily::DispD) {
        if (n == 1) return base * std::sqrt(base);
        if (n == 2) return base * slog;
        if (n == 3) return std::sqrt(base);
        if (n == 4) return slog;
        return std::pow(base, 1.0 - 0.25 * n);
    }
    if (n == 1) return std::sqrt(base);
    if (n == 2) return slog;
    return std::pow(base, 0.5 - 0.25 * n);
}

// ============================================================
// fitting
// ============================================================

std::vector<double> log_spaced(double lo, double hi, std::size_t points) {
    require_finite(lo, "lo");
    require_finite(hi, "hi");
    if (!(lo > 0.0) || !(hi > lo)) {
        throw std::invalid_argument("log grid needs 0 < lo < hi");
    }
    if (points < 2) throw std::invalid_argument("log grid needs at least 2 points");
    std::vector<double> out(points);
    const double step = std::log(hi / lo) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) {
        out[i] = lo * std::exp(step * static_cast<double>(i));
    }
    out.front() = lo;
    out.back() = hi;
    return out;
}

LinearFit fit_linear(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) {
        throw std::invalid_argument("fit_linear needs equally long vectors");
    }
    if (x.size() < 2) throw std::invalid_argument("fit_linear needs at least 2 points");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        require_finite(x[i], "x");
        require_finite(y[i], "y");
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_linear: x values all coincide");
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return fit;
}

namespace {

double sse_against(const std::vector<double>& x, const std::vector<double>& y,
                   const LinearFit& fit) {
    double sse = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double res = y[i] - (fit.intercept + fit.slope * x[i]);
        sse += res * res;
    }
    return sse;
}

}  // namespace

RateFit fit_rate_model(const std::vector<double>& t,
                       const std::vector<double>& value, FitModel model) {
    if (t.size() != value.size()) {
        throw std::invalid_argument("rate fit needs equally long vectors");
    }
    if (t.size() < 8) throw std::invalid_argument("rate fit needs at least 8 samples");
    double t_min = t.front(), t_max = t.front();
    for (std::size_t i = 0; i < t.size(); ++i) {
        require_finite(t[i], "t");
        require_finite(value[i], "value");
        if (!(t[i] > 0.0)) throw std::invalid_argument("rate fit needs positive times");
        if (!(value[i] > 0.0)) {
            throw std::invalid_argument("rate fit needs positive values");
        }
        t_min = std::min(t_min, t[i]);
        t_max = std::max(t_max, t[i]);
    }
    if (t_max < 100.0 * t_min) {
        throw std::invalid_argument("rate fit needs at least two decades of time");
    }

    std::vector<double> x(t.size()), y(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        x[i] = std::log(t[i]);
        y[i] = std::log(value[i]);
        if (model == FitModel::PowerSqrtLog) {
            if (!(t[i] > 1.0)) {
                throw std::invalid_argument(
                    "the sqrt-log model needs every time above 1");
            }
            y[i] -= 0.5 * std::log(std::log(t[i]));
        }
    }
    const LinearFit lf = fit_linear(x, y);
    RateFit fit;
    fit.exponent = lf.slope;
    fit.log_flag = model == FitModel::PowerSqrtLog ? LogFlag::SqrtLog : LogFlag::None;
    fit.r_squared = lf.r_squared;
    fit.t_min = t_min;
    fit.t_max = t_max;
    fit.sse_power = model == FitModel::Power ? sse_against(x, y, lf) : kNaN;
    fit.sse_sqrt_log = model == FitModel::PowerSqrtLog ? sse_against(x, y, lf) : kNaN;
    return fit;
}

RateFit fit_rate(const std::vector<double>& t, const std::vector<double>& value) {
    RateFit power = fit_rate_model(t, value, FitModel::Power);
    const bool log_usable =
        std::all_of(t.begin(), t.end(), [](double ti) { return ti > 1.0; });
    if (!log_usable) return power;

    RateFit slog = fit_rate_model(t, value, FitModel::PowerSqrtLog);
    power.sse_sqrt_log = slog.sse_sqrt_log;
    slog.sse_power = power.sse_power;
    // The log factor must pay for itself: keep the plain power unless the
    // sqrt-log residual is at least twice smaller.
    if (power.sse_power >= 2.0 * slog.sse_sqrt_log) return slog;
    return power;
}

// ============================================================
// blow-up probe
// ============================================================

BlowupProbe blowup_probe(const DoubleKernelSpec& spec, int n, double t_fixed,
                         const std::vector<double>& eps1_list, double eps0,
                         const QuadratureControl& ctl) {
    if (spec.sigma != 1) {
        throw std::invalid_argument("blow-up probe needs singularity order 1");
    }
    if (n != 1 && n != 2) {
        throw std::invalid_argument("blow-up probe covers dimensions 1 and 2 only");
    }
    if (spec.l1 == spec.l2) {
        throw std::invalid_argument(
            "equal amplitudes give a convergent moment; use i_of_t instead");
    }
    require_finite(t_fixed, "t_fixed");
    if (!(t_fixed > 0.0)) throw std::invalid_argument("t_fixed must be positive");
    require_finite(eps0, "eps0");
    if (eps1_list.size() < 8) {
        throw std::invalid_argument("blow-up probe needs at least 8 puncture radii");
    }

    BlowupProbe probe;
    probe.eps1 = eps1_list;
    std::sort(probe.eps1.begin(), probe.eps1.end());
    for (double e : probe.eps1) {
        require_finite(e, "eps1");
        if (!(e > 0.0) || !(e < eps0)) {
            throw std::invalid_argument("puncture radii must lie in (0, eps0)");
        }
    }

    const int weight_pow = n - 1;
    const BatchIntegrand f = [&spec, t_fixed, weight_pow](const double* r, double* out,
                                                          std::size_t count) {
        double buf[16];
        std::size_t done = 0;
        while (done < count) {
            const std::size_t chunk = std::min<std::size_t>(16, count - done);
            double_kernel_batch(spec, t_fixed, r + done, buf, chunk);
            for (std::size_t k = 0; k < chunk; ++k) {
                double w = 1.0;
                for (int p = 0; p < weight_pow; ++p) w *= r[done + k];
                out[done + k] = buf[k] * buf[k] * w;
            }
            done += chunk;
        }
    };
    const double osc = std::max(spec.beta1, spec.beta2) * t_fixed;

    probe.partial.reserve(probe.eps1.size());
    for (double e : probe.eps1) {
        const RadialWindow win = window_custom(e, eps0);
        const QuadratureResult res = integrate_radial_batch(f, win, t_fixed, osc, ctl);
        probe.partial.push_back(res.value);
    }

    if (n == 1) {
        // partial ~ A / eps1 + B: a power fit in eps1 recovers the -1 law and
        // a linear regression against 1/eps1 recovers A.
        probe.fit = fit_rate(probe.eps1, probe.partial);
        std::vector<double> inv(probe.eps1.size());
        for (std::size_t i = 0; i < inv.size(); ++i) inv[i] = 1.0 / probe.eps1[i];
        probe.leading_coefficient = fit_linear(inv, probe.partial).slope;
    } else {
        // partial ~ A log(1/eps1) + B.
        std::vector<double> lg(probe.eps1.size());
        for (std::size_t i = 0; i < lg.size(); ++i) lg[i] = std::log(1.0 / probe.eps1[i]);
        const LinearFit lf = fit_linear(lg, probe.partial);
        probe.fit.exponent = 0.0;
        probe.fit.log_flag = LogFlag::Log;
        probe.fit.r_squared = lf.r_squared;
        probe.fit.t_min = probe.eps1.front();
        probe.fit.t_max = probe.eps1.back();
        probe.fit.sse_power = kNaN;
        probe.fit.sse_sqrt_log = kNaN;
        probe.leading_coefficient = lf.slope;
    }
    return probe;
}

// ============================================================
// pointwise scans
// ============================================================

namespace {

bool small_zone_bound(BoundId b) {
    return b == BoundId::SmallU || b == BoundId::SmallUError ||
           b == BoundId::SmallTheta || b == BoundId::SmallThetaError;
}

bool large_zone_bound(BoundId b) {
    return b == BoundId::LargeU || b == BoundId::LargeTheta;
}

bool has_oscillation_term(BoundId b) {
    return b == BoundId::SmallU || b == BoundId::SmallUError;
}

struct ScanPoint {
    double t = 0.0;
    double r = 0.0;
    double lhs = 0.0;
    double xi0 = 0.0;    // aggregate data magnitude
    double g0k = 0.0;    // |G0| where the template carries it
    double g1k = 0.0;    // |G1| likewise
    double g2k = 0.0;    // |G2| likewise
    double wdata = 0.0;  // large-zone weighted data factor
};

}  // namespace

ScanReport pointwise_ratio_scan(const ModelParams& params, const DerivedParams& dp,
                                const DataProfile& data, BoundId bound,
                                const ScanGrid& grid, const ZoneConfig& zones) {
    if (!(params.delta > 0.0)) {
        throw std::invalid_argument(
            "the pointwise templates describe the damped model; delta must be positive");
    }
    if (grid.nt < 2 || grid.nr < 2) {
        throw std::invalid_argument("scan grid needs at least two points per axis");
    }
    if (small_zone_bound(bound) && grid.r_hi > zones.eps0 * (1.0 + 1e-12)) {
        throw std::invalid_argument("small-zone scan needs r_hi <= eps0");
    }
    if (large_zone_bound(bound) && grid.r_lo < zones.n0 * (1.0 - 1e-12)) {
        throw std::invalid_argument("large-zone scan needs r_lo >= n0");
    }

    const std::vector<double> tg = log_spaced(grid.t_lo, grid.t_hi, grid.nt);
    const std::vector<double> rg = log_spaced(grid.r_lo, grid.r_hi, grid.nr);

    // Precompute per-point solution magnitudes and the data factors the
    // template references, so the constant search only reevaluates cheap
    // exponentials.
    std::vector<ScanPoint> pts;
    pts.reserve(tg.size() * rg.size());
    for (double r : rg) {
        const SpectralState st = data_state(data, r);
        const double xi0 = data_magnitude(st);
        double wdata = 0.0;
        if (bound == BoundId::LargeU) {
            wdata = std::abs(st.u0_amp) + std::abs(st.u1_amp) / r +
                    std::abs(st.th0) / r + std::abs(st.th1) / (r * r * r);
        } else if (bound == BoundId::LargeTheta) {
            wdata = r * std::abs(st.u0_amp) + std::abs(st.u1_amp) / r +
                    std::abs(st.th0) + std::abs(st.th1);
        }
        for (double t : tg) {
            const SolutionPair sol =
                evaluate_solution(params, dp, st, ModelKind::TypeIII, t);
            ScanPoint p;
            p.t = t;
            p.r = r;
            p.xi0 = xi0;
            p.wdata = wdata;
            switch (bound) {
                case BoundId::SmallU:
                    p.lhs = std::abs(sol.u_amp);
                    p.g0k = std::abs(kernel_radial(KernelId::G0, dp, t, r));
                    p.g1k = std::abs(kernel_radial(KernelId::G1, dp, t, r));
                    break;
                case BoundId::SmallUError:
                    p.lhs = std::abs(sol.u_amp -
                                     kernel_radial(KernelId::G1, dp, t, r) * st.th1);
                    p.g0k = std::abs(kernel_radial(KernelId::G0, dp, t, r));
                    break;
                case BoundId::SmallTheta:
                    p.lhs = std::abs(sol.theta);
                    p.g2k = std::abs(kernel_radial(KernelId::G2, dp, t, r));
                    break;
                case BoundId::SmallThetaError:
                    p.lhs = std::abs(sol.theta -
                                     kernel_radial(KernelId::G2, dp, t, r) * st.th1);
                    break;
                case BoundId::BoundedU:
                case BoundId::LargeU:
                    p.lhs = std::abs(sol.u_amp);
                    break;
                case BoundId::BoundedTheta:
                case BoundId::LargeTheta:
                    p.lhs = std::abs(sol.theta);
                    break;
            }
            pts.push_back(p);
        }
    }

    // Decay-constant scale from the actual spectrum on the scan radii: the
    // small-zone envelope is exp(-c r^2 t), so divide the gap by r^2 there.
    double c_base = std::numeric_limits<double>::infinity();
    for (double r : rg) {
        const RootSet roots = solve_quartic(params, dp, r);
        double max_re = -std::numeric_limits<double>::infinity();
        for (const Complex& lam : roots.roots) max_re = std::max(max_re, lam.real());
        double gap = -max_re;
        if (small_zone_bound(bound)) gap /= r * r;
        c_base = std::min(c_base, gap);
    }
    if (!(c_base > 0.0)) {
        throw std::runtime_error("no spectral gap on the scan radii");
    }

    const auto rhs = [&](const ScanPoint& p, double ctil, double c) {
        switch (bound) {
            case BoundId::SmallU:
                return ((1.0 + p.r * p.t + std::abs(std::sin(ctil * p.r * p.t)) / p.r) *
                            std::exp(-c * p.r * p.r * p.t) +
                        p.g0k + p.g1k) *
                       p.xi0;
            case BoundId::SmallUError:
                return ((1.0 + p.r * p.t + std::abs(std::sin(ctil * p.r * p.t)) / p.r) *
                            std::exp(-c * p.r * p.r * p.t) +
                        p.g0k) *
                       p.xi0;
            case BoundId::SmallTheta:
                return (p.g2k + std::exp(-c * p.r * p.r * p.t)) * p.xi0;
            case BoundId::SmallThetaError:
                return std::exp(-c * p.r * p.r * p.t) * p.xi0;
            case BoundId::BoundedU:
            case BoundId::BoundedTheta:
                return std::exp(-c * p.t) * p.xi0;
            case BoundId::LargeU:
            case BoundId::LargeTheta:
                return std::exp(-c * p.t) * p.wdata;
        }
        return 0.0;
    };

    struct SupResult {
        double sup = 0.0;
        double t_at = 0.0;
        double r_at = 0.0;
        std::size_t zero_flags = 0;
    };
    const auto sup_for = [&](double ctil, double c) {
        SupResult s;
        for (const ScanPoint& p : pts) {
            const double denom = rhs(p, ctil, c);
            if (!(denom > 0.0)) {
                if (p.lhs > 0.0) ++s.zero_flags;
                continue;
            }
            const double ratio = p.lhs / denom;
            if (ratio > s.sup) {
                s.sup = ratio;
                s.t_at = p.t;
                s.r_at = p.r;
            }
        }
        return s;
    };

    // Coarse 8x8 search over the candidate constants, then one refinement
    // pass around the winner; templates without a sine term collapse the
    // oscillation axis to the single value 0.
    const bool osc = has_oscillation_term(bound);
    const auto candidates = [](double lo, double hi) {
        return log_spaced(lo, hi, 8);
    };
    std::vector<double> ct_list =
        osc ? candidates(0.5 * dp.nu2, 1.5 * dp.nu1) : std::vector<double>{0.0};
    std::vector<double> c_list = candidates(0.2 * c_base, 0.95 * c_base);

    double best_ct = ct_list.front();
    double best_c = c_list.front();
    SupResult best = sup_for(best_ct, best_c);
    const auto search = [&](const std::vector<double>& cts,
                            const std::vector<double>& cs) {
        for (double ct : cts) {
            for (double c : cs) {
                const SupResult s = sup_for(ct, c);
                if (s.sup < best.sup) {
                    best = s;
                    best_ct = ct;
                    best_c = c;
                }
            }
        }
    };
    search(ct_list, c_list);
    if (osc) ct_list = candidates(best_ct / 1.6, best_ct * 1.6);
    c_list = candidates(std::max(0.05 * c_base, best_c / 1.6),
                        std::min(0.999 * c_base, best_c * 1.6));
    search(ct_list, c_list);

    ScanReport report;
    report.sup_ratio = best.sup;
    report.c_tilde = osc ? best_ct : 0.0;
    report.c_decay = best_c;
    report.t_at_sup = best.t_at;
    report.r_at_sup = best.r_at;
    report.rhs_zero_flags = best.zero_flags;
    return report;
}

EnvelopeFit exponential_envelope_fit(const ModelParams& params,
                                     const DerivedParams& dp, const DataProfile& data,
                                     ModelKind model, TargetField target,
                                     double r_fixed, double t_lo, double t_hi,
                                     std::size_t samples, std::size_t blocks) {
    require_finite(r_fixed, "r_fixed");
    if (!(r_fixed > 0.0)) throw std::invalid_argument("r_fixed must be positive");
    if (!(t_lo >= 0.0) || !(t_hi > t_lo)) {
        throw std::invalid_argument("envelope fit needs 0 <= t_lo < t_hi");
    }
    if (blocks < 3) throw std::invalid_argument("envelope fit needs at least 3 blocks");
    if (samples < 4 * blocks) {
        throw std::invalid_argument("envelope fit needs at least 4 samples per block");
    }

    const SpectralState st = data_state(data, r_fixed);
    const double dt = (t_hi - t_lo) / static_cast<double>(samples - 1);

    // Block maxima of |amplitude| step over the oscillation zeros; the t of
    // each maximum anchors the regression.
    std::vector<double> bt, bv;
    for (std::size_t j = 0; j < blocks; ++j) {
        const std::size_t begin = j * samples / blocks;
        const std::size_t end = (j + 1) * samples / blocks;
        double vmax = 0.0, tmax = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            const double t = t_lo + dt * static_cast<double>(i);
            const SolutionPair sol = evaluate_solution(params, dp, st, model, t);
            const double mag =
                target == TargetField::U ? std::abs(sol.u_amp) : std::abs(sol.theta);
            if (mag > vmax) {
                vmax = mag;
                tmax = t;
            }
        }
        if (vmax > 0.0) {
            bt.push_back(tmax);
            bv.push_back(std::log(vmax));
        }
    }
    if (bt.size() < 3) {
        throw std::runtime_error("fewer than 3 blocks carried a nonzero envelope");
    }
    const LinearFit lf = fit_linear(bt, bv);
    EnvelopeFit fit;
    fit.decay_constant = -lf.slope;
    fit.r_squared = lf.r_squared;
    fit.blocks = bt.size();
    return fit;
}

// ============================================================
// profile errors
// ============================================================

std::vector<ProfileErrorPoint> profile_error_experiment(
    const ModelParams& params, const DerivedParams& dp, const DataProfile& data,
    double mean_theta1, ModelKind model, TargetField target, int n,
    const std::vector<double>& t_grid, const QuadratureControl& ctl, double eps0,
    double mu6, double rho1) {
    if (n < 1) throw std::invalid_argument("dimension must be at least 1");
    if (t_grid.empty()) throw std::invalid_argument("time grid is empty");
    require_finite(mean_theta1, "mean_theta1");

    const bool damped = model == ModelKind::TypeIII;
    const ProfileId pid = damped
                              ? (target == TargetField::U ? ProfileId::Phi
                                                          : ProfileId::Psi)
                              : (target == TargetField::U ? ProfileId::PhiTilde
                                                          : ProfileId::PsiTilde);
    const RateFamily family =
        target == TargetField::U ? RateFamily::DispD : RateFamily::TempE;
    const int weight_pow = n - 1;

    std::vector<ProfileErrorPoint> out;
    out.reserve(t_grid.size());
    for (double t : t_grid) {
        require_finite(t, "t");
        if (!(t > 0.0)) throw std::invalid_argument("profile errors need t > 0");

        // Damped runs compare on the fixed interior window; undamped runs
        // use the localized windows with the Gaussian weight built in.
        const RadialWindow win =
            damped ? window_small(eps0)
                   : window_preset(target == TargetField::U ? WindowKind::ChiC1
                                                            : WindowKind::ChiC2,
                                   dp, n, t, mu6, rho1, eps0);

        const BatchIntegrand f = [&](const double* r, double* wout,
                                     std::size_t count) {
            for (std::size_t i = 0; i < count; ++i) {
                const SpectralState st = data_state(data, r[i]);
                const SolutionPair sol = evaluate_solution(params, dp, st, model, t);
                const Complex field =
                    target == TargetField::U ? sol.u_amp : sol.theta;
                const double prof = profile_amplitude(pid, dp, mean_theta1, t, r[i]);
                const double diff = std::abs(field - prof);
                double w = 1.0;
                for (int p = 0; p < weight_pow; ++p) w *= r[i];
                wout[i] = diff * diff * w;
            }
        };
        const double osc = std::max(dp.nu1, params.b) * t;
        const QuadratureResult res = integrate_radial_batch(f, win, t, osc, ctl);

        ProfileErrorPoint pt;
        pt.t = t;
        pt.error_norm = std::sqrt(std::max(res.value, 0.0));
        pt.rate = reference_rate(family, n, t);
        pt.ratio = pt.error_norm / pt.rate;
        pt.converged = res.converged;
        out.push_back(pt);
    }
    return out;
}

TrendCheck o_rate_check(const std::vector<ProfileErrorPoint>& series) {
    if (series.size() < 3) {
        throw std::invalid_argument("trend check needs at least 3 samples");
    }
    for (std::size_t i = 0; i + 1 < series.size(); ++i) {
        if (!(series[i + 1].t > series[i].t)) {
            throw std::invalid_argument("trend check needs strictly increasing times");
        }
    }

    // Longest suffix on which the ratio is non-increasing with 2% slack.
    std::size_t s = series.size() - 1;
    while (s > 0 && series[s].ratio <= series[s - 1].ratio * 1.02) --s;

    TrendCheck check;
    check.t_star = series[s].t;
    check.eventually_decreasing =
        (series.size() - 1 - s) >= 2 && series.back().ratio < series[s].ratio;
    check.decay_factor = series.front().ratio / series.back().ratio;
    const double span = series.back().t / series.front().t;
    check.five_fold_decay = span >= 1e4 * (1.0 - 1e-9) && check.decay_factor >= 5.0;
    return check;
}

// ============================================================
// the rate table
// ============================================================

const char* to_string(WaveRow row) {
    switch (row) {
        case WaveRow::Transversal: return "transversal";
        case WaveRow::LongitudinalII: return "longitudinal-undamped";
        case WaveRow::LongitudinalIII: return "longitudinal-damped";
        case WaveRow::ThermalII: return "thermal-undamped";
        case WaveRow::ThermalIII: return "thermal-damped";
    }
    return "unknown";
}

namespace {

struct PredictedCell {
    double exponent = 0.0;
    LogFlag flag = LogFlag::None;
    bool bounded = false;
};

/// Predicted norm-scale growth/decay per row and dimension. Undamped rows
/// saturate (bounded) once the moment converges; damped rows keep decaying
/// on the diffusive scale.
PredictedCell predict_cell(WaveRow row, int n) {
    switch (row) {
        case WaveRow::Transversal:
        case WaveRow::ThermalII:
            if (n == 1) return {0.5, LogFlag::None, false};
            if (n == 2) return {0.0, LogFlag::SqrtLog, false};
            return {0.0, LogFlag::None, true};
        case WaveRow::ThermalIII:
            if (n == 1) return {0.5, LogFlag::None, false};
            if (n == 2) return {0.0, LogFlag::SqrtLog, false};
            return {0.5 - 0.25 * n, LogFlag::None, false};
        case WaveRow::LongitudinalII:
            if (n == 1) return {1.5, LogFlag::None, false};
            if (n == 2) return {1.0, LogFlag::SqrtLog, false};
            if (n == 3) return {0.5, LogFlag::None, false};
            if (n == 4) return {0.0, LogFlag::SqrtLog, false};
            return {0.0, LogFlag::None, true};
        case WaveRow::LongitudinalIII:
            if (n == 1) return {1.5, LogFlag::None, false};
            if (n == 2) return {1.0, LogFlag::SqrtLog, false};
            if (n == 3) return {0.5, LogFlag::None, false};
            if (n == 4) return {0.0, LogFlag::SqrtLog, false};
            return {1.0 - 0.25 * n, LogFlag::None, false};
    }
    return {};
}

/// Fits one table cell and decides whether a sqrt-log factor rides on top
/// of the power law. Every clean rate in this family sits on a
/// quarter-integer lattice, so the measured exponent is snapped to that
/// lattice, the power is stripped, and the squared norm is tested for a
/// linear drift in log t. A genuine log factor gives a*log(t) + b with
/// a > 0 and near-perfect linearity whatever the offset b; the fixed-form
/// model contest in fit_rate misses exactly the large-offset cells (damped
/// kernels push the effective log origin far from 1) and over a short
/// window can confuse a mild transient with the log model, so the drift
/// test is the decision maker whenever the snap succeeds.
RateFit classify_cell(const std::vector<double>& tg, const std::vector<double>& norm) {
    const RateFit power = fit_rate_model(tg, norm, FitModel::Power);
    const bool log_usable =
        std::all_of(tg.begin(), tg.end(), [](double ti) { return ti > 1.0; });
    if (!log_usable) return power;

    RateFit slog = fit_rate_model(tg, norm, FitModel::PowerSqrtLog);
    slog.sse_power = power.sse_power;

    const double snapped = std::round(power.exponent * 4.0) / 4.0;
    if (std::abs(power.exponent - snapped) <= 0.1) {
        std::vector<double> lt(tg.size()), depowered(tg.size());
        for (std::size_t i = 0; i < tg.size(); ++i) {
            lt[i] = std::log(tg[i]);
            depowered[i] = norm[i] * norm[i] / std::pow(tg[i], 2.0 * snapped);
        }
        const LinearFit drift = fit_linear(lt, depowered);
        if (drift.slope > 0.0 && drift.r_squared > 0.99) return slog;
        RateFit plain = power;
        plain.sse_sqrt_log = slog.sse_sqrt_log;
        return plain;
    }

    // Off-lattice exponent: fall back to the residual contest.
    if (power.sse_power >= 2.0 * slog.sse_sqrt_log) return slog;
    RateFit plain = power;
    plain.sse_sqrt_log = slog.sse_sqrt_log;
    return plain;
}

}  // namespace

std::vector<TableCell> table1(const ModelParams& params, const DerivedParams& dp,
                              double t_min, double t_max, std::size_t points,
                              const QuadratureControl& ctl) {
    if (points < 8) throw std::invalid_argument("table needs at least 8 time samples");
    require_finite(t_min, "t_min");
    require_finite(t_max, "t_max");
    if (!(t_min > 0.0) || !(t_max >= 1000.0 * t_min)) {
        throw std::invalid_argument("table window must span at least three decades");
    }

    const ThermalAmplitudes amps = thermal_amplitudes(dp);
    struct RowSpec {
        WaveRow id;
        DoubleKernelSpec spec;
    };
    const RowSpec rows[5] = {
        {WaveRow::Transversal, {1.0, 0.0, params.b, params.b, 0.0, 0.0, 0}},
        {WaveRow::LongitudinalII, {1.0, 1.0, dp.nu1, dp.nu2, 0.0, 0.0, 1}},
        {WaveRow::LongitudinalIII, {1.0, 1.0, dp.nu1, dp.nu2, dp.c1, dp.c2, 1}},
        {WaveRow::ThermalII, {amps.ell1, amps.ell2, dp.nu1, dp.nu2, 0.0, 0.0, 0}},
        {WaveRow::ThermalIII, {amps.ell1, amps.ell2, dp.nu1, dp.nu2, dp.c1, dp.c2, 0}},
    };

    const std::vector<double> tg = log_spaced(t_min, t_max, points);
    std::vector<TableCell> cells;
    cells.reserve(30);
    for (const RowSpec& row : rows) {
        for (int n = 1; n <= 6; ++n) {
            std::vector<double> norm(tg.size());
            for (std::size_t i = 0; i < tg.size(); ++i) {
                const QuadratureResult res = i_of_t(row.spec, n, tg[i], 0.1, ctl);
                norm[i] = std::sqrt(std::max(res.value, 0.0));
            }
            const RateFit fit = classify_cell(tg, norm);
            const PredictedCell pred = predict_cell(row.id, n);

            TableCell cell;
            cell.row = row.id;
            cell.n = n;
            cell.fitted_exponent = fit.exponent;
            cell.fitted_flag = fit.log_flag;
            cell.r_squared = fit.r_squared;
            cell.predicted_exponent = pred.exponent;
            cell.predicted_flag = pred.flag;
            cell.predicted_bounded = pred.bounded;
            if (pred.bounded) {
                cell.matches = std::abs(cell.fitted_exponent) <= 0.05 &&
                               cell.fitted_flag == LogFlag::None;
            } else {
                cell.matches = cell.fitted_flag == pred.flag &&
                               std::abs(cell.fitted_exponent - pred.exponent) <= 0.05;
            }
            cells.push_back(cell);
        }
    }
    return cells;
}

}  // namespace speclab
