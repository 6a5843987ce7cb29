#include "speclab/cli.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "speclab/char_roots.hpp"
#include "speclab/quadrature.hpp"
#include "speclab/rate_lab.hpp"
#include "speclab/spectral_solution.hpp"
#include "speclab/wave_kernels.hpp"

namespace speclab {

namespace {

/// Post-parse problems that are the user's fault (invalid config values,
/// inconsistent flag combinations). Mapped to exit code 2, like flag
/// parse errors, and raised before any output file is opened.
struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

// ------------------------------------------------------------
// formatting and CSV assembly
// ------------------------------------------------------------

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt(std::size_t v) { return std::to_string(v); }
std::string fmt(int v) { return std::to_string(v); }
const char* fmt(bool v) { return v ? "true" : "false"; }

std::string join_doubles(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += fmt(v[i]);
    }
    return s;
}

std::string join_ints(const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(v[i]);
    }
    return s;
}

const char* flag_name(LogFlag f) {
    switch (f) {
        case LogFlag::None: return "none";
        case LogFlag::SqrtLog: return "sqrt_log";
        case LogFlag::Log: return "log";
    }
    return "unknown";
}

LogFlag parse_flag_name(const std::string& name) {
    if (name == "none") return LogFlag::None;
    if (name == "sqrt_log") return LogFlag::SqrtLog;
    if (name == "log") return LogFlag::Log;
    throw UsageError("unknown log flag name: " + name);
}

/// The whole document is built in memory and written in one shot, so a
/// computation that throws halfway leaves no partial file behind.
struct CsvDoc {
    std::string text;

    void comment(const std::string& line) {
        text += "# ";
        text += line;
        text += '\n';
    }
    void line(const std::string& l) {
        text += l;
        text += '\n';
    }
};

void emit(const ExperimentConfig& cfg, const CsvDoc& doc) {
    if (cfg.out.empty()) {
        std::cout << doc.text;
        std::cout.flush();
        return;
    }
    std::ofstream f(cfg.out, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open output file: " + cfg.out);
    f << doc.text;
    f.flush();
    if (!f) throw std::runtime_error("failed writing output file: " + cfg.out);
}

// ------------------------------------------------------------
// shared flags
// ------------------------------------------------------------

/// Storage plus option handles for the flags every subcommand accepts.
/// resolve() layers them: defaults, then the --config file, then any
/// flag the user actually passed.
struct SharedFlags {
    std::string config_path;
    ModelParams params;
    std::vector<int> dims;
    double t_min = 0.0;
    double t_max = 0.0;
    std::size_t points = 0;
    double rel_tol = 0.0;
    double abs_tol = 0.0;
    unsigned threads = 0;
    std::string out;
    unsigned long long seed = 0;

    CLI::Option* o_config = nullptr;
    CLI::Option* o_b = nullptr;
    CLI::Option* o_kappa = nullptr;
    CLI::Option* o_gamma = nullptr;
    CLI::Option* o_delta = nullptr;
    CLI::Option* o_dims = nullptr;
    CLI::Option* o_t_min = nullptr;
    CLI::Option* o_t_max = nullptr;
    CLI::Option* o_points = nullptr;
    CLI::Option* o_rel_tol = nullptr;
    CLI::Option* o_abs_tol = nullptr;
    CLI::Option* o_threads = nullptr;
    CLI::Option* o_out = nullptr;
    CLI::Option* o_seed = nullptr;

    void attach(CLI::App* sc) {
        o_config = sc->add_option("--config", config_path,
                                  "JSON config file; explicit flags override it");
        o_b = sc->add_option("--b", params.b, "elastic wave speed (> 0)");
        o_kappa = sc->add_option("--kappa", params.kappa, "thermal conductivity (> 0)");
        o_gamma = sc->add_option("--gamma", params.gamma, "coupling constant (!= 0)");
        o_delta = sc->add_option("--delta", params.delta, "damping strength (>= 0)");
        o_dims = sc->add_option("--dims", dims, "dimensions for sweeping commands");
        o_t_min = sc->add_option("--t-min", t_min, "first time of the log-spaced grid");
        o_t_max = sc->add_option("--t-max", t_max, "last time of the log-spaced grid");
        o_points = sc->add_option("--points", points, "grid size (>= 8)");
        o_rel_tol = sc->add_option("--rel-tol", rel_tol, "quadrature relative tolerance");
        o_abs_tol = sc->add_option("--abs-tol", abs_tol, "quadrature absolute tolerance");
        o_threads = sc->add_option("--threads", threads,
                                   "quadrature worker threads (0 = hardware)");
        o_out = sc->add_option("--out", out, "output CSV path (default stdout)");
        o_seed = sc->add_option("--seed", seed, "seed recorded for randomized sweeps");
    }

    ExperimentConfig resolve() const {
        ExperimentConfig cfg;
        if (o_config->count() > 0) {
            try {
                cfg = load_config(config_path);
            } catch (const std::runtime_error& e) {
                throw UsageError(e.what());
            }
        }
        if (o_b->count()) cfg.params.b = params.b;
        if (o_kappa->count()) cfg.params.kappa = params.kappa;
        if (o_gamma->count()) cfg.params.gamma = params.gamma;
        if (o_delta->count()) cfg.params.delta = params.delta;
        if (o_dims->count()) cfg.dims = dims;
        if (o_t_min->count()) cfg.t_min = t_min;
        if (o_t_max->count()) cfg.t_max = t_max;
        if (o_points->count()) cfg.points = points;
        if (o_rel_tol->count()) cfg.rel_tol = rel_tol;
        if (o_abs_tol->count()) cfg.abs_tol = abs_tol;
        if (o_threads->count()) cfg.threads = threads;
        if (o_out->count()) cfg.out = out;
        if (o_seed->count()) cfg.seed = seed;

        const std::string problem = validate_config(cfg);
        if (!problem.empty()) throw UsageError(problem);
        return cfg;
    }
};

QuadratureControl control_for(const ExperimentConfig& cfg) {
    QuadratureControl ctl;
    ctl.rel_tol = cfg.rel_tol;
    ctl.abs_tol = cfg.abs_tol;
    ctl.threads = cfg.threads;
    return ctl;
}

/// Canonical dimension list for a sweep: the --n override when present,
/// otherwise the config dims; sorted with duplicates removed.
std::vector<int> sweep_dims(const ExperimentConfig& cfg, const std::vector<int>& n_override) {
    std::vector<int> dims = n_override.empty() ? cfg.dims : n_override;
    std::sort(dims.begin(), dims.end());
    dims.erase(std::unique(dims.begin(), dims.end()), dims.end());
    for (int n : dims) {
        if (n < 1) throw UsageError("--n values must be at least 1");
    }
    return dims;
}

std::vector<double> sorted_radii(std::vector<double> r) {
    for (double v : r) {
        if (!std::isfinite(v) || v < 0.0) {
            throw UsageError("--r values must be finite and nonnegative");
        }
    }
    std::sort(r.begin(), r.end());
    return r;
}

DataProfile make_profile(const std::string& name) {
    auto gauss = [](double r) { return std::exp(-r * r); };
    DataProfile d;
    if (name == "theta1") {
        d.h1 = gauss;
    } else if (name == "all") {
        d.g0 = gauss;
        d.g1 = gauss;
        d.h0 = gauss;
        d.h1 = gauss;
    } else {
        throw UsageError("unknown data profile: " + name);
    }
    return d;
}

ModelKind parse_model(const std::string& name, double delta) {
    if (name == "iii") return ModelKind::TypeIII;
    if (name != "ii") throw UsageError("unknown model: " + name);
    if (delta != 0.0) {
        throw UsageError("--model ii needs delta = 0 (got delta = " + fmt(delta) + ")");
    }
    return ModelKind::TypeII;
}

KernelId parse_kernel(const std::string& name) {
    std::string low = name;
    std::transform(low.begin(), low.end(), low.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (low == "g0") return KernelId::G0;
    if (low == "g1") return KernelId::G1;
    if (low == "g2") return KernelId::G2;
    if (low == "g3") return KernelId::G3;
    if (low == "g4") return KernelId::G4;
    throw UsageError("unknown kernel: " + name);
}

// ------------------------------------------------------------
// kernel-spec flags (i-of-t, rate-fit, blowup-probe)
// ------------------------------------------------------------

/// Double-kernel parameters as flags. Defaults that the user leaves
/// untouched are filled from the derived constants: the damped
/// longitudinal pair for the moment commands, amplitudes (1, 2) for the
/// blow-up probe so the singular case is reachable without typing.
struct KernelFlags {
    double l1 = 0.0, l2 = 0.0, beta1 = 0.0, beta2 = 0.0, c1 = 0.0, c2 = 0.0;
    int sigma = 1;

    CLI::Option* o_l1 = nullptr;
    CLI::Option* o_l2 = nullptr;
    CLI::Option* o_beta1 = nullptr;
    CLI::Option* o_beta2 = nullptr;
    CLI::Option* o_c1 = nullptr;
    CLI::Option* o_c2 = nullptr;
    CLI::Option* o_sigma = nullptr;

    void attach(CLI::App* sc) {
        o_l1 = sc->add_option("--l1", l1, "first wave amplitude");
        o_l2 = sc->add_option("--l2", l2, "second wave amplitude");
        o_beta1 = sc->add_option("--beta1", beta1, "first propagation speed");
        o_beta2 = sc->add_option("--beta2", beta2, "second propagation speed");
        o_c1 = sc->add_option("--c1", c1, "first diffusion coefficient");
        o_c2 = sc->add_option("--c2", c2, "second diffusion coefficient");
        o_sigma = sc->add_option("--sigma", sigma, "singularity order of r^-sigma");
    }

    DoubleKernelSpec resolve(const DerivedParams& dp, double default_l2) const {
        DoubleKernelSpec spec;
        spec.l1 = o_l1->count() ? l1 : 1.0;
        spec.l2 = o_l2->count() ? l2 : default_l2;
        spec.beta1 = o_beta1->count() ? beta1 : dp.nu1;
        spec.beta2 = o_beta2->count() ? beta2 : dp.nu2;
        spec.c1 = o_c1->count() ? c1 : dp.c1;
        spec.c2 = o_c2->count() ? c2 : dp.c2;
        spec.sigma = o_sigma->count() ? sigma : 1;
        return spec;
    }
};

std::string spec_summary(const DoubleKernelSpec& s) {
    return "l1=" + fmt(s.l1) + " l2=" + fmt(s.l2) + " beta1=" + fmt(s.beta1) +
           " beta2=" + fmt(s.beta2) + " c1=" + fmt(s.c1) + " c2=" + fmt(s.c2) +
           " sigma=" + std::to_string(s.sigma);
}

std::string fit_summary(const RateFit& fit) {
    return "fit: exponent=" + fmt(fit.exponent) + " log_flag=" + flag_name(fit.log_flag) +
           " r_squared=" + fmt(fit.r_squared) + " sse_power=" + fmt(fit.sse_power) +
           " sse_sqrt_log=" + fmt(fit.sse_sqrt_log);
}

// ------------------------------------------------------------
// subcommand bodies
// ------------------------------------------------------------

int run_roots(const ExperimentConfig& cfg, const std::vector<double>& radii) {
    const DerivedParams dp = derive(cfg.params);
    CsvDoc doc;
    doc.comment(config_json(cfg));
    doc.comment("command: roots r=" + join_doubles(radii));
    doc.line("r,re1,im1,re2,im2,re3,im3,re4,im4,zone");
    for (double r : radii) {
        const RootSet set = solve_quartic(cfg.params, dp, r);
        std::string row = fmt(r);
        for (const Complex& lam : set.roots) {
            row += ',' + fmt(lam.real()) + ',' + fmt(lam.imag());
        }
        row += ',';
        row += to_string(set.zone);
        doc.line(row);
    }
    emit(cfg, doc);
    return 0;
}

int run_simulate(const ExperimentConfig& cfg, const std::vector<double>& radii,
                 const std::string& model_name, const std::string& data_name) {
    const DerivedParams dp = derive(cfg.params);
    const ModelKind model = parse_model(model_name, cfg.params.delta);
    const DataProfile data = make_profile(data_name);
    const std::vector<double> tg = log_spaced(cfg.t_min, cfg.t_max, cfg.points);

    CsvDoc doc;
    doc.comment(config_json(cfg));
    doc.comment("command: simulate model=" + model_name + " data=" + data_name +
                " r=" + join_doubles(radii));
    doc.line("t,r,re_u,im_u,re_theta,im_theta,model");
    for (double t : tg) {
        for (double r : radii) {
            const SpectralState st = data_state(data, r);
            const SolutionPair sol = evaluate_solution(cfg.params, dp, st, model, t);
            doc.line(fmt(t) + ',' + fmt(r) + ',' + fmt(sol.u_amp.real()) + ',' +
                     fmt(sol.u_amp.imag()) + ',' + fmt(sol.theta.real()) + ',' +
                     fmt(sol.theta.imag()) + ',' + model_name);
        }
    }
    emit(cfg, doc);
    return 0;
}

int run_kernel(const ExperimentConfig& cfg, const std::vector<double>& radii,
               const std::string& kernel_name) {
    const DerivedParams dp = derive(cfg.params);
    const KernelId id = parse_kernel(kernel_name);
    const std::vector<double> tg = log_spaced(cfg.t_min, cfg.t_max, cfg.points);

    CsvDoc doc;
    doc.comment(config_json(cfg));
    doc.comment(std::string("command: kernel kernel=") + to_string(id) +
                " r=" + join_doubles(radii));
    doc.line("t,r,value,kernel");
    for (double t : tg) {
        for (double r : radii) {
            doc.line(fmt(t) + ',' + fmt(r) + ',' + fmt(kernel_radial(id, dp, t, r)) +
                     ',' + to_string(id));
        }
    }
    emit(cfg, doc);
    return 0;
}

int run_kernel_norm(const ExperimentConfig& cfg, const std::string& kernel_name,
                    const std::string& window_name, const std::vector<int>& n_override) {
    const DerivedParams dp = derive(cfg.params);
    const KernelId id = parse_kernel(kernel_name);
    const std::vector<int> dims = sweep_dims(cfg, n_override);
    const QuadratureControl ctl = control_for(cfg);
    const std::vector<double> tg = log_spaced(cfg.t_min, cfg.t_max, cfg.points);

    RadialWindow window;
    if (window_name == "small") {
        window = window_small();
    } else if (window_name == "bounded") {
        window = window_bounded();
    } else if (window_name == "large") {
        window = window_large();
    } else {
        throw UsageError("unknown window: " + window_name);
    }

    CsvDoc doc;
    doc.comment(config_json(cfg));
    doc.comment(std::string("command: kernel-norm kernel=") + to_string(id) +
                " window=" + window_name + " dims=" + join_ints(dims));
    doc.line("n,t,value,est_error,panels,converged");
    for (int n : dims) {
        for (double t : tg) {
            const QuadratureResult res = kernel_l2_norm(id, dp, n, t, window, ctl);
            doc.line(fmt(n) + ',' + fmt(t) + ',' + fmt(res.value) + ',' +
                     fmt(res.est_error) + ',' + fmt(res.panels) + ',' +
                     fmt(res.converged));
        }
    }
    emit(cfg, doc);
    return 0;
}

int run_i_of_t(const ExperimentConfig& cfg, const DoubleKernelSpec& spec, double eps0,
               const std::vector<int>& n_override) {
    const std::vector<int> dims = sweep_dims(cfg, n_override);
    const QuadratureControl ctl = control_for(cfg);
    const std::vector<double> tg = log_spaced(cfg.t_min, cfg.t_max, cfg.points);

    CsvDoc doc;
    doc.comment(config_json(cfg));
    doc.comment("command: i-of-t " + spec_summary(spec) + " eps0=" + fmt(eps0) +
                " dims=" + join_ints(dims));
    doc.line("n,t,value,est_error,panels,converged");
    for (int n : dims) {
        for (double t : tg) {
            const QuadratureResult res = i_of_t(spec, n, t, eps0, ctl);
            doc.line(fmt(n) + ',' + fmt(t) + ',' + fmt(res.value) + ',' +
                     fmt(res.est_error) + ',' + fmt(res.panels) + ',' +
                     fmt(res.converged));
        }
    }
    emit(cfg, doc);
    return 0;
}

int run_rate_fit(const ExperimentConfig& cfg, const DoubleKernelSpec& spec, double eps0,
                 int n, const CLI::Option* o_expect_exp, double expect_exp,
                 const CLI::Option* o_expect_flag, const std::string& expect_flag,
                 double tol) {
    if (n < 1) throw UsageError("--n must be at least 1");
    if (cfg.t_max < 100.0 * cfg.t_min) {
        throw UsageError("rate-fit needs a time window of at least two decades");
    }
    const QuadratureControl ctl = control_for(cfg);
    const std::vector<double> tg = log_spaced(cfg.t_min, cfg.t_max, cfg.points);

    std::vector<double> norm(tg.size());
    for (std::size_t i = 0; i < tg.size(); ++i) {
        norm[i] = std::sqrt(std::max(i_of_t(spec, n, tg[i], eps0, ctl).value, 0.0));
    }
    const RateFit fit = fit_rate(tg, norm);

    CsvDoc doc;
    doc.comment(config_json(cfg));
    doc.comment("command: rate-fit " + spec_summary(spec) + " eps0=" + fmt(eps0) +
                " n=" + std::to_string(n));
    doc.comment(fit_summary(fit));
    doc.line("n,t,value");
    for (std::size_t i = 0; i < tg.size(); ++i) {
        doc.line(fmt(n) + ',' + fmt(tg[i]) + ',' + fmt(norm[i]));
    }
    emit(cfg, doc);
    std::cerr << "rate-fit: exponent=" << fmt(fit.exponent)
              << " log_flag=" << flag_name(fit.log_flag)
              << " r_squared=" << fmt(fit.r_squared) << '\n';

    bool ok = true;
    if (o_expect_exp->count() > 0 && std::abs(fit.exponent - expect_exp) > tol) {
        std::cerr << "rate-fit: exponent " << fmt(fit.exponent) << " misses expected "
                  << fmt(expect_exp) << " by more than " << fmt(tol) << '\n';
        ok = false;
    }
    if (o_expect_flag->count() > 0 && fit.log_flag != parse_flag_name(expect_flag)) {
        std::cerr << "rate-fit: log flag " << flag_name(fit.log_flag)
                  << " differs from expected " << expect_flag << '\n';
        ok = false;
    }
    return ok ? 0 : 1;
}

int run_blowup_probe(const ExperimentConfig& cfg, const DoubleKernelSpec& spec, int n,
                     double t_fixed, double eps1_lo, double eps1_hi,
                     std::size_t eps1_points, double eps0) {
    if (!(eps1_lo > 0.0) || !(eps1_lo < eps1_hi) || !(eps1_hi < eps0)) {
        throw UsageError("need 0 < eps1-lo < eps1-hi < eps0");
    }
    if (eps1_points < 8) throw UsageError("--eps1-points must be at least 8");
    const QuadratureControl ctl = control_for(cfg);
    const std::vector<double> eps1 = log_spaced(eps1_lo, eps1_hi, eps1_points);
    const BlowupProbe probe = blowup_probe(spec, n, t_fixed, eps1, eps0, ctl);

    CsvDoc doc;
    doc.comment(config_json(cfg));
    doc.comment("command: blowup-probe " + spec_summary(spec) + " n=" + std::to_string(n) +
                " t=" + fmt(t_fixed) + " eps1_lo=" + fmt(eps1_lo) + " eps1_hi=" +
                fmt(eps1_hi) + " eps1_points=" + fmt(eps1_points) + " eps0=" + fmt(eps0));
    doc.comment(fit_summary(probe.fit) +
                " leading_coefficient=" + fmt(probe.leading_coefficient));
    doc.line("eps1,partial");
    for (std::size_t i = 0; i < probe.eps1.size(); ++i) {
        doc.line(fmt(probe.eps1[i]) + ',' + fmt(probe.partial[i]));
    }
    emit(cfg, doc);
    std::cerr << "blowup-probe: exponent=" << fmt(probe.fit.exponent)
              << " log_flag=" << flag_name(probe.fit.log_flag)
              << " leading_coefficient=" << fmt(probe.leading_coefficient) << '\n';
    return 0;
}

struct BoundName {
    const char* name;
    BoundId id;
};

constexpr BoundName kBoundNames[] = {
    {"small-u", BoundId::SmallU},
    {"small-u-error", BoundId::SmallUError},
    {"small-theta", BoundId::SmallTheta},
    {"small-theta-error", BoundId::SmallThetaError},
    {"bounded-u", BoundId::BoundedU},
    {"bounded-theta", BoundId::BoundedTheta},
    {"large-u", BoundId::LargeU},
    {"large-theta", BoundId::LargeTheta},
};

BoundId parse_bound(const std::string& name) {
    for (const BoundName& b : kBoundNames) {
        if (name == b.name) return b.id;
    }
    throw UsageError("unknown bound: " + name);
}

const char* bound_name(BoundId id) {
    for (const BoundName& b : kBoundNames) {
        if (id == b.id) return b.name;
    }
    return "unknown";
}

/// Default radius range of a template's home zone.
void default_r_range(BoundId id, double& r_lo, double& r_hi) {
    switch (id) {
        case BoundId::SmallU:
        case BoundId::SmallUError:
        case BoundId::SmallTheta:
        case BoundId::SmallThetaError:
            r_lo = 1e-3;
            r_hi = 0.1;
            return;
        case BoundId::BoundedU:
        case BoundId::BoundedTheta:
            r_lo = 0.1;
            r_hi = 10.0;
            return;
        case BoundId::LargeU:
        case BoundId::LargeTheta:
            r_lo = 10.0;
            r_hi = 100.0;
            return;
    }
}

int run_pointwise_scan(const ExperimentConfig& cfg, std::vector<std::string> bound_names,
                       const std::string& data_name, double t_lo, double t_hi,
                       std::size_t nt, std::size_t nr, const CLI::Option* o_r_lo,
                       double r_lo_flag, const CLI::Option* o_r_hi, double r_hi_flag) {
    if (cfg.params.delta <= 0.0) {
        throw UsageError("pointwise-scan needs delta > 0");
    }
    if (!(t_lo > 0.0) || !(t_lo < t_hi)) throw UsageError("need 0 < t-lo < t-hi");
    if (nt < 2 || nr < 2) throw UsageError("--nt and --nr must be at least 2");

    const DerivedParams dp = derive(cfg.params);
    const DataProfile data = make_profile(data_name);

    std::vector<BoundId> bounds;
    if (bound_names.empty()) {
        for (const BoundName& b : kBoundNames) bounds.push_back(b.id);
    } else {
        for (const std::string& name : bound_names) bounds.push_back(parse_bound(name));
        std::sort(bounds.begin(), bounds.end());
        bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());
    }

    CsvDoc doc;
    doc.comment(config_json(cfg));
    doc.comment("command: pointwise-scan data=" + data_name + " t_lo=" + fmt(t_lo) +
                " t_hi=" + fmt(t_hi) + " nt=" + fmt(nt) + " nr=" + fmt(nr));
    doc.line("bound,r_lo,r_hi,sup_ratio,c_tilde,c_decay,t_at_sup,r_at_sup,rhs_zero_flags");
    for (BoundId id : bounds) {
        ScanGrid grid;
        grid.t_lo = t_lo;
        grid.t_hi = t_hi;
        grid.nt = nt;
        grid.nr = nr;
        default_r_range(id, grid.r_lo, grid.r_hi);
        if (o_r_lo->count()) grid.r_lo = r_lo_flag;
        if (o_r_hi->count()) grid.r_hi = r_hi_flag;
        if (!(grid.r_lo > 0.0) || !(grid.r_lo < grid.r_hi)) {
            throw UsageError("need 0 < r-lo < r-hi");
        }
        const ScanReport rep = pointwise_ratio_scan(cfg.params, dp, data, id, grid);
        doc.line(std::string(bound_name(id)) + ',' + fmt(grid.r_lo) + ',' +
                 fmt(grid.r_hi) + ',' + fmt(rep.sup_ratio) + ',' + fmt(rep.c_tilde) +
                 ',' + fmt(rep.c_decay) + ',' + fmt(rep.t_at_sup) + ',' +
                 fmt(rep.r_at_sup) + ',' + fmt(rep.rhs_zero_flags));
    }
    emit(cfg, doc);
    return 0;
}

/// Dimensions a profile-error run supports: the damped model is compared
/// on the fixed interior window in any dimension, the undamped model only
/// where a localized comparison window exists.
bool profile_dim_supported(ModelKind model, TargetField target, int n) {
    if (model == ModelKind::TypeIII) return n >= 1;
    if (target == TargetField::U) return n >= 1 && n <= 4;
    return n == 1 || n == 2;
}

int run_profile_error(const ExperimentConfig& cfg, const std::string& model_name,
                      const std::string& target_name, const std::string& data_name,
                      const std::vector<int>& n_override, double eps0, double mu6,
                      double rho1) {
    const DerivedParams dp = derive(cfg.params);
    const ModelKind model = parse_model(model_name, cfg.params.delta);
    const TargetField target =
        target_name == "u" ? TargetField::U : TargetField::Theta;
    const DataProfile data = make_profile(data_name);
    const double mean_theta1 = data.h1 ? data.h1(0.0) : 0.0;
    const QuadratureControl ctl = control_for(cfg);
    const std::vector<double> tg = log_spaced(cfg.t_min, cfg.t_max, cfg.points);

    std::vector<int> dims = sweep_dims(cfg, n_override);
    if (n_override.empty()) {
        // The config dims are a generic sweep list; silently keep the
        // supported ones. Explicit --n values must all be valid.
        dims.erase(std::remove_if(dims.begin(), dims.end(),
                                  [&](int n) {
                                      return !profile_dim_supported(model, target, n);
                                  }),
                   dims.end());
        if (dims.empty()) throw UsageError("no config dimension fits this model/target");
    } else {
        for (int n : dims) {
            if (!profile_dim_supported(model, target, n)) {
                throw UsageError("--n " + std::to_string(n) +
                                 " has no comparison window for model " + model_name +
                                 " target " + target_name);
            }
        }
    }

    CsvDoc doc;
    doc.comment(config_json(cfg));
    doc.comment("command: profile-error model=" + model_name + " target=" + target_name +
                " data=" + data_name + " eps0=" + fmt(eps0) + " mu6=" + fmt(mu6) +
                " rho1=" + fmt(rho1) + " dims=" + join_ints(dims));

    std::vector<std::string> rows;
    for (int n : dims) {
        const std::vector<ProfileErrorPoint> series = profile_error_experiment(
            cfg.params, dp, data, mean_theta1, model, target, n, tg, ctl, eps0, mu6,
            rho1);
        for (const ProfileErrorPoint& p : series) {
            rows.push_back(fmt(n) + ',' + fmt(p.t) + ',' + fmt(p.error_norm) + ',' +
                           fmt(p.rate) + ',' + fmt(p.ratio) + ',' + fmt(p.converged));
        }
        const TrendCheck trend = o_rate_check(series);
        doc.comment("trend n=" + std::to_string(n) + ": eventually_decreasing=" +
                    fmt(trend.eventually_decreasing) + " five_fold_decay=" +
                    fmt(trend.five_fold_decay) + " decay_factor=" +
                    fmt(trend.decay_factor) + " t_star=" + fmt(trend.t_star));
    }
    doc.line("n,t,error_norm,rate,ratio,converged");
    for (const std::string& row : rows) doc.line(row);
    emit(cfg, doc);
    return 0;
}

int run_table1(const ExperimentConfig& cfg) {
    if (cfg.t_max < 1000.0 * cfg.t_min) {
        throw UsageError("table1 needs a time window of at least three decades");
    }
    const DerivedParams dp = derive(cfg.params);
    const QuadratureControl ctl = control_for(cfg);
    const std::vector<TableCell> cells =
        table1(cfg.params, dp, cfg.t_min, cfg.t_max, cfg.points, ctl);

    CsvDoc doc;
    doc.comment(config_json(cfg));
    doc.comment("command: table1");
    doc.line("row,n,fitted_exponent,fitted_flag,r_squared,predicted_exponent,"
             "predicted_flag,predicted_bounded,matches");
    std::size_t matched = 0;
    for (const TableCell& cell : cells) {
        if (cell.matches) ++matched;
        doc.line(std::string(to_string(cell.row)) + ',' + fmt(cell.n) + ',' +
                 fmt(cell.fitted_exponent) + ',' + flag_name(cell.fitted_flag) + ',' +
                 fmt(cell.r_squared) + ',' + fmt(cell.predicted_exponent) + ',' +
                 flag_name(cell.predicted_flag) + ',' + fmt(cell.predicted_bounded) +
                 ',' + fmt(cell.matches));
    }
    emit(cfg, doc);
    std::cerr << "table1: " << matched << '/' << cells.size()
              << " cells match the predicted rates\n";
    for (const TableCell& cell : cells) {
        if (!cell.matches) {
            std::cerr << "table1: mismatch at row=" << to_string(cell.row)
                      << " n=" << cell.n << " fitted=" << fmt(cell.fitted_exponent)
                      << '/' << flag_name(cell.fitted_flag)
                      << " predicted=" << fmt(cell.predicted_exponent) << '/'
                      << flag_name(cell.predicted_flag)
                      << (cell.predicted_bounded ? " (bounded)" : "") << '\n';
        }
    }
    return matched == cells.size() ? 0 : 1;
}

}  // namespace

// ------------------------------------------------------------
// config plumbing
// ------------------------------------------------------------

ExperimentConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read config file: " + path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("malformed config JSON in " + path + ": " + e.what());
    }
    if (!j.is_object()) {
        throw std::runtime_error("config file must hold a JSON object: " + path);
    }

    ExperimentConfig cfg;
    for (const auto& item : j.items()) {
        const std::string& key = item.key();
        const nlohmann::json& value = item.value();
        try {
            if (key == "b") {
                cfg.params.b = value.get<double>();
            } else if (key == "kappa") {
                cfg.params.kappa = value.get<double>();
            } else if (key == "gamma") {
                cfg.params.gamma = value.get<double>();
            } else if (key == "delta") {
                cfg.params.delta = value.get<double>();
            } else if (key == "dims") {
                cfg.dims = value.get<std::vector<int>>();
            } else if (key == "t_min") {
                cfg.t_min = value.get<double>();
            } else if (key == "t_max") {
                cfg.t_max = value.get<double>();
            } else if (key == "points") {
                cfg.points = value.get<std::size_t>();
            } else if (key == "rel_tol") {
                cfg.rel_tol = value.get<double>();
            } else if (key == "abs_tol") {
                cfg.abs_tol = value.get<double>();
            } else if (key == "threads") {
                cfg.threads = value.get<unsigned>();
            } else if (key == "out") {
                cfg.out = value.get<std::string>();
            } else if (key == "seed") {
                cfg.seed = value.get<unsigned long long>();
            } else {
                throw std::runtime_error("unknown config key: " + key);
            }
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error("config key '" + key + "' in " + path + ": " +
                                     e.what());
        }
    }
    return cfg;
}

std::string validate_config(const ExperimentConfig& config) {
    const ModelParams& p = config.params;
    if (!std::isfinite(p.b) || !(p.b > 0.0)) return "b must be positive";
    if (!std::isfinite(p.kappa) || !(p.kappa > 0.0)) return "kappa must be positive";
    if (!std::isfinite(p.gamma) || p.gamma == 0.0) return "gamma must be nonzero";
    if (!std::isfinite(p.delta) || p.delta < 0.0) return "delta must be nonnegative";
    if (!std::isfinite(config.t_min) || !(config.t_min > 0.0)) {
        return "t_min must be positive";
    }
    if (!std::isfinite(config.t_max) || !(config.t_min < config.t_max)) {
        return "t_min must be less than t_max";
    }
    if (config.points < 8) return "points must be at least 8";
    if (config.dims.empty()) return "dims must be nonempty";
    for (int n : config.dims) {
        if (n < 1) return "every dimension must be at least 1";
    }
    if (!std::isfinite(config.rel_tol) || !(config.rel_tol > 0.0)) {
        return "rel_tol must be positive";
    }
    if (!std::isfinite(config.abs_tol) || !(config.abs_tol > 0.0)) {
        return "abs_tol must be positive";
    }
    return "";
}

std::string config_json(const ExperimentConfig& config) {
    nlohmann::json j;
    j["b"] = config.params.b;
    j["kappa"] = config.params.kappa;
    j["gamma"] = config.params.gamma;
    j["delta"] = config.params.delta;
    j["dims"] = config.dims;
    j["t_min"] = config.t_min;
    j["t_max"] = config.t_max;
    j["points"] = config.points;
    j["rel_tol"] = config.rel_tol;
    j["abs_tol"] = config.abs_tol;
    j["threads"] = config.threads;
    j["out"] = config.out;
    j["seed"] = config.seed;
    return j.dump();
}

// ------------------------------------------------------------
// entry point
// ------------------------------------------------------------

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"spectral laboratory for coupled elastic-thermal waves"};
    app.require_subcommand(1);

    // roots
    auto* sc_roots = app.add_subcommand("roots", "characteristic roots at given radii");
    SharedFlags sh_roots;
    sh_roots.attach(sc_roots);
    std::vector<double> roots_r;
    sc_roots->add_option("--r", roots_r, "radial frequencies")->required();

    // simulate
    auto* sc_sim = app.add_subcommand("simulate", "exact solution on the time grid");
    SharedFlags sh_sim;
    sh_sim.attach(sc_sim);
    std::vector<double> sim_r;
    std::string sim_model = "iii";
    std::string sim_data = "theta1";
    sc_sim->add_option("--r", sim_r, "radial frequencies")->required();
    sc_sim->add_option("--model", sim_model, "evolution law (default iii)")
        ->check(CLI::IsMember({"ii", "iii"}));
    sc_sim->add_option("--data", sim_data, "initial data profile (default theta1)")
        ->check(CLI::IsMember({"theta1", "all"}));

    // kernel
    auto* sc_kernel = app.add_subcommand("kernel", "radial kernel values on the grid");
    SharedFlags sh_kernel;
    sh_kernel.attach(sc_kernel);
    std::vector<double> kernel_r;
    std::string kernel_name;
    sc_kernel->add_option("--r", kernel_r, "radial frequencies")->required();
    sc_kernel->add_option("--kernel", kernel_name, "kernel id (g0..g4)")
        ->required()
        ->check(CLI::IsMember({"g0", "g1", "g2", "g3", "g4"}, CLI::ignore_case));

    // kernel-norm
    auto* sc_knorm = app.add_subcommand("kernel-norm", "windowed L2 norm of a kernel");
    SharedFlags sh_knorm;
    sh_knorm.attach(sc_knorm);
    std::string knorm_name;
    std::string knorm_window = "small";
    std::vector<int> knorm_n;
    sc_knorm->add_option("--kernel", knorm_name, "kernel id (g0..g4)")
        ->required()
        ->check(CLI::IsMember({"g0", "g1", "g2", "g3", "g4"}, CLI::ignore_case));
    sc_knorm->add_option("--window", knorm_window, "frequency window (default small)")
        ->check(CLI::IsMember({"small", "bounded", "large"}));
    sc_knorm->add_option("--n", knorm_n, "dimensions (default: config dims)");

    // i-of-t
    auto* sc_iot = app.add_subcommand(
        "i-of-t", "squared interior moment of a double kernel on the grid");
    SharedFlags sh_iot;
    sh_iot.attach(sc_iot);
    KernelFlags kf_iot;
    kf_iot.attach(sc_iot);
    std::vector<int> iot_n;
    double iot_eps0 = 0.1;
    sc_iot->add_option("--n", iot_n, "dimensions (default: config dims)");
    sc_iot->add_option("--eps0", iot_eps0, "interior window radius (default 0.1)");

    // rate-fit
    auto* sc_rfit = app.add_subcommand(
        "rate-fit", "fit the growth rate of an interior moment norm");
    SharedFlags sh_rfit;
    sh_rfit.attach(sc_rfit);
    KernelFlags kf_rfit;
    kf_rfit.attach(sc_rfit);
    int rfit_n = 3;
    double rfit_eps0 = 0.1;
    double rfit_expect_exp = 0.0;
    std::string rfit_expect_flag;
    double rfit_tol = 0.05;
    sc_rfit->add_option("--n", rfit_n, "dimension (default 3)");
    sc_rfit->add_option("--eps0", rfit_eps0, "interior window radius (default 0.1)");
    CLI::Option* o_expect_exp = sc_rfit->add_option(
        "--expect-exponent", rfit_expect_exp, "fail (exit 1) unless the fit matches");
    CLI::Option* o_expect_flag =
        sc_rfit
            ->add_option("--expect-flag", rfit_expect_flag,
                         "fail (exit 1) unless the log flag matches")
            ->check(CLI::IsMember({"none", "sqrt_log", "log"}));
    sc_rfit->add_option("--tol", rfit_tol, "exponent tolerance (default 0.05)");

    // blowup-probe
    auto* sc_blow = app.add_subcommand(
        "blowup-probe", "divergence law of the singular moment near the origin");
    SharedFlags sh_blow;
    sh_blow.attach(sc_blow);
    KernelFlags kf_blow;
    kf_blow.attach(sc_blow);
    int blow_n = 2;
    double blow_t = 10.0;
    double blow_eps1_lo = 1e-6;
    double blow_eps1_hi = 1e-3;
    std::size_t blow_eps1_points = 12;
    double blow_eps0 = 0.1;
    sc_blow->add_option("--n", blow_n, "dimension, 1 or 2 (default 2)")
        ->check(CLI::Range(1, 2));
    sc_blow->add_option("--t", blow_t, "fixed time (default 10)");
    sc_blow->add_option("--eps1-lo", blow_eps1_lo, "smallest puncture radius");
    sc_blow->add_option("--eps1-hi", blow_eps1_hi, "largest puncture radius");
    sc_blow->add_option("--eps1-points", blow_eps1_points, "puncture count (>= 8)");
    sc_blow->add_option("--eps0", blow_eps0, "outer window radius (default 0.1)");

    // pointwise-scan
    auto* sc_scan = app.add_subcommand(
        "pointwise-scan", "sup of solution against decay envelope templates");
    SharedFlags sh_scan;
    sh_scan.attach(sc_scan);
    std::vector<std::string> scan_bounds;
    std::string scan_data = "all";
    double scan_t_lo = 1.0;
    double scan_t_hi = 1e3;
    std::size_t scan_nt = 16;
    std::size_t scan_nr = 16;
    double scan_r_lo = 0.0;
    double scan_r_hi = 0.0;
    sc_scan->add_option("--bound", scan_bounds, "templates to scan (default: all)")
        ->check(CLI::IsMember({"small-u", "small-u-error", "small-theta",
                               "small-theta-error", "bounded-u", "bounded-theta",
                               "large-u", "large-theta"}));
    sc_scan->add_option("--data", scan_data, "initial data profile (default all)")
        ->check(CLI::IsMember({"theta1", "all"}));
    sc_scan->add_option("--t-lo", scan_t_lo, "scan start time (default 1)");
    sc_scan->add_option("--t-hi", scan_t_hi, "scan end time (default 1e3)");
    sc_scan->add_option("--nt", scan_nt, "time grid size (default 16)");
    sc_scan->add_option("--nr", scan_nr, "radius grid size (default 16)");
    CLI::Option* o_scan_r_lo = sc_scan->add_option(
        "--r-lo", scan_r_lo, "radius range start (default: template zone)");
    CLI::Option* o_scan_r_hi = sc_scan->add_option(
        "--r-hi", scan_r_hi, "radius range end (default: template zone)");

    // profile-error
    auto* sc_perr = app.add_subcommand(
        "profile-error", "windowed distance to the large-time profile, over the rate");
    SharedFlags sh_perr;
    sh_perr.attach(sc_perr);
    std::string perr_model = "iii";
    std::string perr_target = "u";
    std::string perr_data = "theta1";
    std::vector<int> perr_n;
    double perr_eps0 = 0.1;
    double perr_mu6 = 0.05;
    double perr_rho1 = 2.0;
    sc_perr->add_option("--model", perr_model, "evolution law (default iii)")
        ->check(CLI::IsMember({"ii", "iii"}));
    sc_perr->add_option("--target", perr_target, "field to compare (default u)")
        ->check(CLI::IsMember({"u", "theta"}));
    sc_perr->add_option("--data", perr_data, "initial data profile (default theta1)")
        ->check(CLI::IsMember({"theta1", "all"}));
    sc_perr->add_option("--n", perr_n, "dimensions (default: supported config dims)");
    sc_perr->add_option("--eps0", perr_eps0, "interior window radius (default 0.1)");
    sc_perr->add_option("--mu6", perr_mu6, "comparison window constant (default 0.05)");
    sc_perr->add_option("--rho1", perr_rho1, "half-line window constant (default 2)");

    // table1
    auto* sc_table = app.add_subcommand(
        "table1", "regenerate the five-row optimal-rate table and check every cell");
    SharedFlags sh_table;
    sh_table.attach(sc_table);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        if (sc_roots->parsed()) {
            return run_roots(sh_roots.resolve(), sorted_radii(roots_r));
        }
        if (sc_sim->parsed()) {
            return run_simulate(sh_sim.resolve(), sorted_radii(sim_r), sim_model,
                                sim_data);
        }
        if (sc_kernel->parsed()) {
            return run_kernel(sh_kernel.resolve(), sorted_radii(kernel_r), kernel_name);
        }
        if (sc_knorm->parsed()) {
            return run_kernel_norm(sh_knorm.resolve(), knorm_name, knorm_window,
                                   knorm_n);
        }
        if (sc_iot->parsed()) {
            const ExperimentConfig cfg = sh_iot.resolve();
            const DerivedParams dp = derive(cfg.params);
            return run_i_of_t(cfg, kf_iot.resolve(dp, 1.0), iot_eps0, iot_n);
        }
        if (sc_rfit->parsed()) {
            const ExperimentConfig cfg = sh_rfit.resolve();
            const DerivedParams dp = derive(cfg.params);
            return run_rate_fit(cfg, kf_rfit.resolve(dp, 1.0), rfit_eps0, rfit_n,
                                o_expect_exp, rfit_expect_exp, o_expect_flag,
                                rfit_expect_flag, rfit_tol);
        }
        if (sc_blow->parsed()) {
            const ExperimentConfig cfg = sh_blow.resolve();
            const DerivedParams dp = derive(cfg.params);
            return run_blowup_probe(cfg, kf_blow.resolve(dp, 2.0), blow_n, blow_t,
                                    blow_eps1_lo, blow_eps1_hi, blow_eps1_points,
                                    blow_eps0);
        }
        if (sc_scan->parsed()) {
            return run_pointwise_scan(sh_scan.resolve(), scan_bounds, scan_data,
                                      scan_t_lo, scan_t_hi, scan_nt, scan_nr,
                                      o_scan_r_lo, scan_r_lo, o_scan_r_hi, scan_r_hi);
        }
        if (sc_perr->parsed()) {
            return run_profile_error(sh_perr.resolve(), perr_model, perr_target,
                                     perr_data, perr_n, perr_eps0, perr_mu6, perr_rho1);
        }
        if (sc_table->parsed()) {
            return run_table1(sh_table.resolve());
        }
        std::cerr << "speclab: no subcommand selected\n";
        return 2;
    } catch (const UsageError& e) {
        std::cerr << "speclab " << command << ": " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "speclab " << command << ": " << e.what() << '\n';
        return 1;
    }
}

}  // namespace speclab
