#include "semiper/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace semiper {

std::string to_string(InitialDataMode m) {
    return m == InitialDataMode::H1Converging ? "H1_converging" : "L2_only_converging";
}

InitialDataMode initial_data_mode_from_string(const std::string& s) {
    if (s == "H1_converging" || s == "h1_converging") return InitialDataMode::H1Converging;
    if (s == "L2_only_converging" || s == "l2_only_converging") return InitialDataMode::L2OnlyConverging;
    throw std::invalid_argument("unknown initial data mode '" + s + "'");
}

std::string to_string(Theorem t) { return t == Theorem::Thm11 ? "Thm11" : "Thm12"; }

Theorem theorem_from_string(const std::string& s) {
    if (s == "Thm11" || s == "thm11") return Theorem::Thm11;
    if (s == "Thm12" || s == "thm12") return Theorem::Thm12;
    throw std::invalid_argument("unknown theorem '" + s + "'");
}

std::string to_string(CheckStatus s) {
    switch (s) {
        case CheckStatus::Pass: return "pass";
        case CheckStatus::Fail: return "fail";
        case CheckStatus::Uncertified: return "uncertified";
    }
    return "unknown";
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Theorem11Applicable: return "Theorem11_applicable";
        case Verdict::Theorem12Applicable: return "Theorem12_applicable";
        case Verdict::Inconclusive: return "inconclusive";
    }
    return "unknown";
}

Field high_frequency_noise(const GridPtr& grid, double lambda, double lambda_min, double h1_size,
                           std::uint64_t seed) {
    if (!(lambda_min > 0.0) || lambda < lambda_min) throw std::invalid_argument("need 0 < lambda_min <= lambda");
    const int m = grid->points_per_axis();
    const int top = std::max(4, static_cast<int>(0.9 * m));
    const int center = std::max(1, static_cast<int>(std::lround(top * std::sqrt(lambda_min / lambda))));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::vector<double> c(grid->size(), 0.0);
    std::vector<int> modes(grid->dimension(), 0);
    for (int j = std::max(0, center - 3); j <= std::min(m - 1, center + 2); ++j) {
        modes[0] = j;
        c[grid->flatten(modes)] = normal(rng);
    }
    Field u = inverse_sine_transform(grid, c);
    const double n = norm_h1(u);
    if (n > 0.0) u *= h1_size / n;
    return u;
}

AveragingReport averaging_convergence(const Nonlinearity& nl, const Field& u0, const AveragingOptions& opts) {
    if (opts.lambdas.empty()) throw std::invalid_argument("averaging needs at least one lambda");
    for (std::size_t i = 0; i < opts.lambdas.size(); ++i) {
        if (!(opts.lambdas[i] > 0.0 && opts.lambdas[i] <= 1.0))
            throw std::invalid_argument("lambda values must lie in (0, 1]");
        if (i > 0 && !(opts.lambdas[i] < opts.lambdas[i - 1]))
            throw std::invalid_argument("lambda list must be strictly decreasing");
    }
    if (opts.steps_per_period < 1 || opts.samples_per_period < 1 || opts.reference_steps_per_period < 1)
        throw std::invalid_argument("step and sample counts must be positive");
    if (!(opts.noise_h1 >= 0.0)) throw std::invalid_argument("noise_h1 must be nonnegative");

    const double period = nl.period();
    AveragingReport rep;
    rep.lambdas = opts.lambdas;
    rep.mode = opts.mode;
    rep.t_obs = opts.t_obs > 0.0 ? opts.t_obs : period;
    rep.delta = opts.delta > 0.0 ? opts.delta : rep.t_obs / 10.0;
    if (rep.delta >= rep.t_obs) throw std::invalid_argument("delta must be below t_obs");

    const long samples = std::max(1L, std::lround(opts.samples_per_period * rep.t_obs / period));
    const double sample_dt = rep.t_obs / static_cast<double>(samples);
    // Steps per sample interval so every run lands exactly on the common sample times.
    auto step_for = [&](double target) { return sample_dt / std::ceil(sample_dt / target * (1.0 - 1e-12)); };

    AveragedProblem avg(std::make_shared<Nonlinearity>(nl), opts.quadrature_intervals);
    EvolutionConfig avg_cfg;
    avg_cfg.dt = step_for(period / opts.reference_steps_per_period);
    const Trajectory ref = evolve(u0, 0.0, rep.t_obs, avg_cfg, avg, sample_dt);

    const double lambda_min = opts.lambdas.back();
    for (std::size_t li = 0; li < opts.lambdas.size(); ++li) {
        const double lambda = opts.lambdas[li];
        Field start = u0;
        if (opts.mode == InitialDataMode::L2OnlyConverging && opts.noise_h1 > 0.0) {
            const Field noise = high_frequency_noise(u0.grid(), lambda, lambda_min, opts.noise_h1, opts.seed + li);
            rep.noise_l2.push_back(norm_l2(noise));
            rep.noise_h1.push_back(norm_h1(noise));
            start += noise;
        } else {
            rep.noise_l2.push_back(0.0);
            rep.noise_h1.push_back(0.0);
        }
        EvolutionConfig cfg;
        cfg.lambda = lambda;
        cfg.dt = step_for(lambda * period / opts.steps_per_period);
        try {
            const Trajectory run = evolve(start, 0.0, rep.t_obs, cfg, nl, sample_dt);
            if (run.size() != ref.size()) throw std::logic_error("sample times differ from the averaged run");
            double sup = 0.0;
            double first = std::numeric_limits<double>::quiet_NaN();
            for (std::size_t k = 0; k < run.size(); ++k) {
                if (run.times[k] < rep.delta * (1.0 - 1e-12)) continue;
                const double e = norm_h1(run.fields[k] - ref.fields[k]);
                if (std::isnan(first)) first = e;
                sup = std::max(sup, e);
            }
            rep.errors.push_back(sup);
            rep.errors_at_delta.push_back(first);
            rep.failures.emplace_back();
        } catch (const EvolutionError& e) {
            rep.errors.push_back(std::numeric_limits<double>::quiet_NaN());
            rep.errors_at_delta.push_back(std::numeric_limits<double>::quiet_NaN());
            rep.failures.emplace_back(e.what());
        }
    }
    rep.strictly_decreasing = true;
    for (std::size_t i = 1; i < rep.errors.size(); ++i)
        if (!(rep.errors[i] < rep.errors[i - 1])) rep.strictly_decreasing = false;
    return rep;
}

double trajectory_h1_bound(const Trajectory& traj) {
    double r = 0.0;
    for (double v : traj.h1) r = std::max(r, v);
    return r;
}

TailReport tail_estimate(const Trajectory& traj, double a, double R, double floor) {
    if (traj.tail_radii.empty()) throw std::invalid_argument("trajectory was recorded without tail radii");
    if (!(a > 0.0) || !(R >= 0.0)) throw std::invalid_argument("tail estimate needs a > 0 and R >= 0");
    TailReport rep;
    rep.radii = traj.tail_radii;
    rep.times = traj.times;
    rep.tails = traj.tails;
    rep.bound_R = R;
    rep.rate_a = a;
    rep.floor = floor;
    rep.alpha.assign(rep.radii.size(), 0.0);
    for (std::size_t k = 0; k < rep.times.size(); ++k) {
        const double envelope = R * R * std::exp(-2.0 * a * (rep.times[k] - rep.times.front()));
        for (std::size_t r = 0; r < rep.radii.size(); ++r)
            rep.alpha[r] = std::max(rep.alpha[r], rep.tails[k][r] - envelope);
    }
    rep.decreasing = true;
    for (std::size_t r = 1; r < rep.alpha.size(); ++r) {
        const bool both_zero = rep.alpha[r] == 0.0 && rep.alpha[r - 1] == 0.0;
        if (!(rep.alpha[r] < rep.alpha[r - 1] || both_zero)) rep.decreasing = false;
    }
    rep.passes = rep.decreasing && rep.alpha.back() <= floor;
    return rep;
}

ContractionReport contraction_test(const Nonlinearity& nl, const Field& u1, const Field& u2,
                                   const std::vector<double>& times, const EvolutionConfig& cfg, double tolerance) {
    const auto b = nl.dissipativity_perturbation().values();
    if (std::any_of(b.begin(), b.end(), [](double v) { return v != 0.0; }))
        throw std::invalid_argument("contraction_test requires b = 0");
    ContractionReport rep;
    rep.times = times;
    rep.rate_a = nl.dissipativity_rate();
    rep.tolerance = tolerance;
    const double d0 = norm_l2(u1 - u2);
    EvolutionConfig fine = cfg;
    fine.dt = cfg.dt / 2.0;
    for (double t : times) {
        if (!(t > 0.0)) throw std::invalid_argument("contraction times must be positive");
        auto ratio = [&](const EvolutionConfig& c) {
            if (d0 == 0.0) return 0.0;
            const double d = norm_l2(translation_operator(u1, t, c, nl) - translation_operator(u2, t, c, nl));
            return d / (std::exp(-rep.rate_a * t) * d0);
        };
        rep.ratios.push_back(ratio(cfg));
        rep.refined_ratios.push_back(ratio(fine));
        rep.max_ratio = std::max(rep.max_ratio, rep.ratios.back());
    }
    rep.passes = rep.max_ratio <= 1.0 + tolerance;
    return rep;
}

double sobolev_constant(int N) {
    if (N < 3) throw std::invalid_argument("the Sobolev constant needs N >= 3");
    const double n = N;
    return std::sqrt(1.0 / (std::numbers::pi * n * (n - 2.0))) * std::pow(std::tgamma(n) / std::tgamma(n / 2.0), 1.0 / n);
}

Remark52Result remark52_bound(double alpha0_sup_lp, double alpha_inf_bar, double p, int N, double C_N) {
    if (N < 3) throw std::invalid_argument("remark52_bound needs N >= 3");
    if (!(p >= N) || !std::isfinite(p)) throw std::invalid_argument("remark52_bound needs N <= p < infinity");
    if (!(alpha_inf_bar > 0.0)) throw std::invalid_argument("remark52_bound needs alpha_inf_bar > 0");
    if (!(alpha0_sup_lp >= 0.0)) throw std::invalid_argument("the L^p norm must be nonnegative");
    Remark52Result r;
    r.sobolev_constant = C_N > 0.0 ? C_N : sobolev_constant(N);
    const double q = N / (2.0 * p);
    const double base = std::pow(alpha_inf_bar, 1.0 - q) / std::pow(q, q);
    r.lhs = alpha0_sup_lp;
    r.rhs = base / std::pow(r.sobolev_constant, N / p);
    r.rhs_printed_variant = base / std::pow(r.sobolev_constant, q * q);
    r.margin = r.rhs - r.lhs;
    r.holds = r.lhs < r.rhs;
    r.holds_printed_variant = r.lhs < r.rhs_printed_variant;
    return r;
}

namespace {

double sup_lp(const Nonlinearity& nl, Field (Nonlinearity::*coef)(double) const) {
    double s = 0.0;
    for (int k = 0; k < kPeriodSamples; ++k) {
        const double t = nl.period() * k / (kPeriodSamples - 1);
        s = std::max(s, norm_lp((nl.*coef)(t), nl.integrability_exponent()));
    }
    return s;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

HypothesisCheck make_check(std::string name, bool ok, double margin, std::string detail, CheckRole role) {
    return {std::move(name), ok ? CheckStatus::Pass : CheckStatus::Fail, margin, std::move(detail), role};
}

// Nonexistence of nonzero periodic solutions of u' = lambda (Delta u + c(t,x) u), lambda in (0,1].
HypothesisCheck nonexistence_check(const std::string& name, bool time_independent, const SchrodingerReport& rep,
                                   const std::optional<Remark52Result>& bound, int N, CheckRole role) {
    if (time_independent) {
        // Self-adjoint autonomous problem: periodic solutions live in the kernel.
        return {name, rep.kernel_condition ? CheckStatus::Pass : CheckStatus::Fail, rep.kernel_gap - rep.gap_tol,
                "coefficient independent of t; reduces to the kernel condition", role};
    }
    if (bound && bound->holds)
        return {name, CheckStatus::Pass, bound->margin, "certified by remark52_bound", role};
    std::string why = N < 3 ? "coefficient depends on t and remark52_bound needs N >= 3"
                            : "coefficient depends on t and remark52_bound does not hold";
    return {name, CheckStatus::Uncertified, std::numeric_limits<double>::quiet_NaN(), why, role};
}

HypothesisCheck remark52_check(const std::string& name, const std::optional<Remark52Result>& r, int N) {
    if (!r) {
        return {name, CheckStatus::Uncertified, std::numeric_limits<double>::quiet_NaN(),
                "not evaluated: needs N >= 3 (N = " + std::to_string(N) + ")", CheckRole::Informational};
    }
    return {name, r->holds ? CheckStatus::Pass : CheckStatus::Fail, r->margin,
            "lhs " + fmt(r->lhs) + ", rhs " + fmt(r->rhs) + ", rhs with the printed exponent " +
                fmt(r->rhs_printed_variant),
            CheckRole::Informational};
}

}  // namespace

double sup_lp_norm_alpha0(const Nonlinearity& nl) { return sup_lp(nl, &Nonlinearity::alpha0); }
double sup_lp_norm_omega0(const Nonlinearity& nl) { return sup_lp(nl, &Nonlinearity::omega0); }

const HypothesisCheck* HypothesisVerdict::find(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

HypothesisVerdict check_theorem_hypotheses(const Nonlinearity& nl, Theorem which, const HypothesisOptions& opts) {
    HypothesisVerdict v;
    v.which = which;
    const int N = nl.grid()->dimension();
    const double p = nl.integrability_exponent();
    const auto base = CheckRole::Theorem11;
    const auto extra = CheckRole::Theorem12;

    const auto per = periodicity_check(nl, opts.periodicity_samples, -opts.u_range, opts.u_range, opts.seed);
    v.checks.push_back(make_check("periodicity", per.passes, 1e-12 * per.scale - per.max_violation,
                                  "max |f(t+T) - f(t)| = " + fmt(per.max_violation), base));
    v.checks.push_back({"regularity", CheckStatus::Pass, std::numeric_limits<double>::quiet_NaN(),
                        "composition-tree structure validated at construction", base});
    const auto dis = dissipativity_check(nl, opts.dissipativity_samples, -opts.u_range, opts.u_range, opts.seed + 1);
    v.checks.push_back(make_check("dissipativity", dis.passes, 1e-10 * dis.scale - dis.max_violation,
                                  "max violation " + fmt(dis.max_violation), base));
    v.checks.push_back(make_check("dissipativity_rate", nl.dissipativity_rate() > 0.0, nl.dissipativity_rate(),
                                  "a = " + fmt(nl.dissipativity_rate()), base));
    const auto sinf = slope_check_at_infinity(nl);
    v.checks.push_back(make_check("slope_at_infinity", sinf.passes, 1e-6 - sinf.max_deviation,
                                  "max deviation " + fmt(sinf.max_deviation), base));
    v.checks.push_back(make_check("omega_inf_positive", nl.omega_inf_lower_bound() > 0.0, nl.omega_inf_lower_bound(),
                                  "min omega_inf = " + fmt(nl.omega_inf_lower_bound()), base));

    AveragedProblem avg(std::make_shared<Nonlinearity>(nl), opts.quadrature_intervals);
    v.at_infinity = analyze(avg, PotentialTag::AtInfinity, opts.gap_tol, opts.eigen);
    v.checks.push_back(make_check("kernel_at_infinity", v.at_infinity->kernel_condition,
                                  v.at_infinity->kernel_gap - v.at_infinity->gap_tol,
                                  "gap " + fmt(v.at_infinity->kernel_gap) + ", m_minus " +
                                      std::to_string(v.at_infinity->m_minus),
                                  base));
    if (N >= 3 && nl.omega_inf_lower_bound() > 0.0)
        v.remark52_infinity = remark52_bound(sup_lp_norm_omega0(nl), nl.omega_inf_lower_bound(), p, N);
    v.checks.push_back(nonexistence_check("nonexistence_at_infinity", nl.omega_time_independent(), *v.at_infinity,
                                          v.remark52_infinity, N, base));
    v.checks.push_back(remark52_check("remark52_at_infinity", v.remark52_infinity, N));

    if (which == Theorem::Thm12) {
        v.checks.push_back(make_check("zero_preserving", nl.zero_preserving(), std::numeric_limits<double>::quiet_NaN(),
                                      nl.zero_preserving() ? "f(t,x,0) = 0" : "source terms present", extra));
        const auto s0 = slope_check_at_zero(nl);
        v.checks.push_back(make_check("slope_at_zero", s0.passes, 1e-6 - s0.max_deviation,
                                      "max deviation " + fmt(s0.max_deviation), extra));
        v.checks.push_back(make_check("alpha_inf_positive", nl.alpha_inf_lower_bound() > 0.0,
                                      nl.alpha_inf_lower_bound(),
                                      "min alpha_inf = " + fmt(nl.alpha_inf_lower_bound()), extra));
        if (nl.zero_preserving()) {
            v.at_zero = analyze(avg, PotentialTag::AtZero, opts.gap_tol, opts.eigen);
            v.checks.push_back(make_check("kernel_at_zero", v.at_zero->kernel_condition,
                                          v.at_zero->kernel_gap - v.at_zero->gap_tol,
                                          "gap " + fmt(v.at_zero->kernel_gap) + ", m_minus " +
                                              std::to_string(v.at_zero->m_minus),
                                          extra));
            if (N >= 3 && nl.alpha_inf_lower_bound() > 0.0)
                v.remark52_zero = remark52_bound(sup_lp_norm_alpha0(nl), nl.alpha_inf_lower_bound(), p, N);
            v.checks.push_back(nonexistence_check("nonexistence_at_zero", nl.alpha_time_independent(), *v.at_zero,
                                                  v.remark52_zero, N, extra));
            v.checks.push_back(remark52_check("remark52_at_zero", v.remark52_zero, N));
            try {
                v.parity = parity_condition(*v.at_zero, *v.at_infinity);
                v.checks.push_back(make_check("parity", v.parity->holds, std::numeric_limits<double>::quiet_NaN(),
                                              "m_minus(0) = " + std::to_string(v.parity->m_minus_zero) +
                                                  ", m_minus(inf) = " + std::to_string(v.parity->m_minus_infinity),
                                              extra));
            } catch (const ResonanceError& e) {
                v.checks.push_back({"parity", CheckStatus::Fail, std::numeric_limits<double>::quiet_NaN(), e.what(),
                                    extra});
            }
        } else {
            const double nan = std::numeric_limits<double>::quiet_NaN();
            for (const char* name : {"kernel_at_zero", "nonexistence_at_zero", "parity"})
                v.checks.push_back({name, CheckStatus::Fail, nan, "requires f(t,x,0) = 0", extra});
        }
    }

    auto all_pass = [&](std::initializer_list<CheckRole> roles) {
        for (const auto& c : v.checks)
            if (std::find(roles.begin(), roles.end(), c.role) != roles.end() && c.status != CheckStatus::Pass)
                return false;
        return true;
    };
    if (which == Theorem::Thm12 && all_pass({base, extra}))
        v.verdict = Verdict::Theorem12Applicable;
    else if (all_pass({base}))
        v.verdict = Verdict::Theorem11Applicable;
    else
        v.verdict = Verdict::Inconclusive;
    return v;
}

}  // namespace semiper
