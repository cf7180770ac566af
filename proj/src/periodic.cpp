#include "semiper/periodic.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <memory>
#include <random>
#include <stdexcept>

#include "krylov.hpp"

namespace semiper {

std::string to_string(PeriodicMethod m) {
    switch (m) {
        case PeriodicMethod::Picard: return "picard";
        case PeriodicMethod::Anderson: return "anderson";
        case PeriodicMethod::NewtonKrylov: return "newton_krylov";
    }
    return "unknown";
}

PeriodicMethod periodic_method_from_string(const std::string& s) {
    if (s == "picard") return PeriodicMethod::Picard;
    if (s == "anderson") return PeriodicMethod::Anderson;
    if (s == "newton_krylov" || s == "newton-krylov") return PeriodicMethod::NewtonKrylov;
    throw std::invalid_argument("unknown periodic method '" + s + "'");
}

std::string to_string(SweepDirection d) {
    return d == SweepDirection::LargeNorm ? "large_norm" : "small_norm";
}

SweepDirection sweep_direction_from_string(const std::string& s) {
    if (s == "large_norm" || s == "large") return SweepDirection::LargeNorm;
    if (s == "small_norm" || s == "small") return SweepDirection::SmallNorm;
    throw std::invalid_argument("unknown sweep direction '" + s + "'");
}

namespace {

constexpr int kDivergenceRun = 10;

void validate(const PeriodicOptions& o) {
    if (!(o.tol > 0.0)) throw std::invalid_argument("periodic tol must be positive");
    if (o.max_iter < 0) throw std::invalid_argument("periodic max_iter must be nonnegative");
    if (o.orbit_samples < 0) throw std::invalid_argument("orbit_samples must be nonnegative");
}

// Spectral coefficients weighted by sqrt(1 + mu): Euclidean norm equals the H1 norm.
std::vector<double> h1_coordinates(const Field& u) {
    auto c = sine_transform(u).coefficients;
    const auto mu = u.grid()->laplacian_eigenvalues();
    for (std::size_t k = 0; k < c.size(); ++k) c[k] *= std::sqrt(1.0 + mu[k]);
    return c;
}

Field from_h1_coordinates(const GridPtr& grid, std::vector<double> c) {
    const auto mu = grid->laplacian_eigenvalues();
    for (std::size_t k = 0; k < c.size(); ++k) c[k] /= std::sqrt(1.0 + mu[k]);
    return inverse_sine_transform(grid, c);
}

double decay_estimate(const std::vector<double>& r) {
    if (r.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    const std::size_t last = r.size() - 1;
    const std::size_t first = last >= 3 ? last - 3 : 0;
    if (r[first] <= 0.0 || r[last] <= 0.0) return 0.0;
    return std::pow(r[last] / r[first], 1.0 / static_cast<double>(last - first));
}

// Tracks consecutive residual growth.
struct GrowthWatch {
    int run = 0;
    bool update(const std::vector<double>& r) {
        if (r.size() >= 2 && r.back() > r[r.size() - 2])
            ++run;
        else
            run = 0;
        return run >= kDivergenceRun;
    }
};

void finish(PeriodicSolveReport& rep, const EvolutionConfig& cfg, const Reaction& f, const PeriodicOptions& opts) {
    rep.decay_ratio = decay_estimate(rep.residuals);
    rep.iterations = static_cast<int>(rep.residuals.empty() ? 0 : rep.residuals.size() - 1);
    if (opts.orbit_samples > 0 && rep.solution.all_finite()) {
        try {
            rep.orbit = evolve(rep.solution, 0.0, rep.period, cfg, f, rep.period / opts.orbit_samples);
        } catch (const EvolutionError& e) {
            rep.message += (rep.message.empty() ? "" : "; ") + std::string("orbit: ") + e.what();
        }
    }
}

PeriodicSolveReport start_report(PeriodicMethod m, const EvolutionConfig& cfg, const Reaction& f) {
    cfg.validate();
    PeriodicSolveReport rep;
    rep.method = m;
    rep.period = cfg.lambda * f.period();
    return rep;
}

}  // namespace

Field period_map(const Field& u, const EvolutionConfig& cfg, const Reaction& f) {
    return translation_operator(u, cfg.lambda * f.period(), cfg, f);
}

PeriodicSolveReport picard_solve(const Field& u0, const EvolutionConfig& cfg, const Reaction& f,
                                 const PeriodicOptions& opts) {
    validate(opts);
    auto rep = start_report(PeriodicMethod::Picard, cfg, f);
    Field u = u0;
    GrowthWatch watch;
    try {
        for (int k = 0;; ++k) {
            Field next = period_map(u, cfg, f);
            ++rep.map_evaluations;
            rep.residuals.push_back(norm_h1(next - u));
            if (rep.residuals.back() <= opts.tol) {
                rep.converged = true;
                break;
            }
            if (watch.update(rep.residuals)) {
                rep.diverged = true;
                rep.message = "residual grew over 10 consecutive iterations";
                break;
            }
            if (k >= opts.max_iter) {
                rep.message = "max_iter reached";
                break;
            }
            u = std::move(next);
        }
    } catch (const EvolutionError& e) {
        rep.diverged = true;
        rep.message = e.what();
    }
    rep.solution = u;
    finish(rep, cfg, f, opts);
    return rep;
}

PeriodicSolveReport anderson_solve(const Field& u0, const EvolutionConfig& cfg, const Reaction& f,
                                   const PeriodicOptions& opts) {
    validate(opts);
    if (opts.anderson_window < 2 || opts.anderson_window > 5)
        throw std::invalid_argument("anderson_window must lie in [2, 5]");
    auto rep = start_report(PeriodicMethod::Anderson, cfg, f);
    const GridPtr& grid = u0.grid();

    // History in H1 coordinates: G_j = Phi(u_j), F_j = G_j - u_j.
    std::deque<std::vector<double>> g_hist, f_hist;
    std::vector<double> x = h1_coordinates(u0);
    Field u = u0;
    GrowthWatch watch;
    double best = std::numeric_limits<double>::infinity();
    try {
        for (int k = 0;; ++k) {
            std::vector<double> g = h1_coordinates(period_map(u, cfg, f));
            ++rep.map_evaluations;
            std::vector<double> fk(g.size());
            double r2 = 0.0;
            for (std::size_t i = 0; i < g.size(); ++i) {
                fk[i] = g[i] - x[i];
                r2 += fk[i] * fk[i];
            }
            rep.residuals.push_back(std::sqrt(r2));
            const double r = rep.residuals.back();
            if (r <= opts.tol) {
                rep.converged = true;
                break;
            }
            if (watch.update(rep.residuals)) {
                rep.diverged = true;
                rep.message = "residual grew over 10 consecutive iterations";
                break;
            }
            if (k >= opts.max_iter) {
                rep.message = "max_iter reached";
                break;
            }
            // A large jump means the extrapolation misbehaved; drop the history.
            if (r > 10.0 * best) {
                g_hist.clear();
                f_hist.clear();
            }
            best = std::min(best, r);

            g_hist.push_back(g);
            f_hist.push_back(fk);
            if (static_cast<int>(g_hist.size()) > opts.anderson_window + 1) {
                g_hist.pop_front();
                f_hist.pop_front();
            }

            const int m = static_cast<int>(f_hist.size()) - 1;
            if (m == 0) {
                x = g;
            } else {
                const Eigen::Index n = static_cast<Eigen::Index>(g.size());
                Eigen::MatrixXd dF(n, m), dG(n, m);
                for (int j = 0; j < m; ++j)
                    for (Eigen::Index i = 0; i < n; ++i) {
                        dF(i, j) = f_hist[j + 1][i] - f_hist[j][i];
                        dG(i, j) = g_hist[j + 1][i] - g_hist[j][i];
                    }
                Eigen::Map<const Eigen::VectorXd> fv(fk.data(), n);
                Eigen::VectorXd gamma = dF.completeOrthogonalDecomposition().solve(fv);
                if (!gamma.allFinite()) gamma.setZero();
                Eigen::VectorXd next = Eigen::Map<const Eigen::VectorXd>(g.data(), n) - dG * gamma;
                x.assign(next.data(), next.data() + n);
            }
            u = from_h1_coordinates(grid, x);
        }
    } catch (const EvolutionError& e) {
        rep.diverged = true;
        rep.message = e.what();
    }
    rep.solution = u;
    finish(rep, cfg, f, opts);
    return rep;
}

PeriodicSolveReport newton_krylov_solve(const Field& u0, const EvolutionConfig& cfg, const Reaction& f,
                                        const PeriodicOptions& opts) {
    validate(opts);
    auto rep = start_report(PeriodicMethod::NewtonKrylov, cfg, f);
    const GridPtr& grid = u0.grid();
    const double eps = std::sqrt(std::numeric_limits<double>::epsilon());

    // G(u) = u - Phi(u), all in H1 coordinates.
    auto residual = [&](const Field& field, const std::vector<double>& xc) {
        std::vector<double> r = h1_coordinates(period_map(field, cfg, f));
        ++rep.map_evaluations;
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = xc[i] - r[i];
        return r;
    };
    auto euclid = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double e : v) s += e * e;
        return std::sqrt(s);
    };

    Field u = u0;
    std::vector<double> x = h1_coordinates(u0);
    try {
        std::vector<double> r = residual(u, x);
        rep.residuals.push_back(euclid(r));
        for (int k = 0;; ++k) {
            if (rep.residuals.back() <= opts.tol) {
                rep.converged = true;
                break;
            }
            if (k >= opts.max_iter) {
                rep.message = "max_iter reached";
                break;
            }
            const double xnorm = euclid(x);
            detail::LinearMap jvp = [&](const std::vector<double>& v, std::vector<double>& out) {
                const double vn = euclid(v);
                out.assign(v.size(), 0.0);
                if (vn == 0.0) return;
                const double h = eps * (1.0 + xnorm) / vn;
                std::vector<double> xp(x.size());
                for (std::size_t i = 0; i < x.size(); ++i) xp[i] = x[i] + h * v[i];
                const auto rp = residual(from_h1_coordinates(grid, xp), xp);
                for (std::size_t i = 0; i < v.size(); ++i) out[i] = (rp[i] - r[i]) / h;
            };
            std::vector<double> rhs(r.size());
            for (std::size_t i = 0; i < r.size(); ++i) rhs[i] = -r[i];
            const auto lin = detail::gmres(jvp, rhs, opts.krylov_rtol, opts.krylov_restart, opts.krylov_max_iter);
            if (lin.breakdown && lin.relative_residual > 0.5) {
                rep.message = "Krylov breakdown";
                break;
            }

            // Backtracking on ||G||.
            const double r0 = rep.residuals.back();
            bool accepted = false;
            for (double s = 1.0; s >= 1.0 / 64.0; s *= 0.5) {
                std::vector<double> xt(x.size());
                for (std::size_t i = 0; i < x.size(); ++i) xt[i] = x[i] + s * lin.x[i];
                Field ut = from_h1_coordinates(grid, xt);
                std::vector<double> rt;
                try {
                    rt = residual(ut, xt);
                } catch (const EvolutionError&) {
                    continue;
                }
                const double rn = euclid(rt);
                if (std::isfinite(rn) && rn < (1.0 - 1e-4 * s) * r0) {
                    x = std::move(xt);
                    u = std::move(ut);
                    r = std::move(rt);
                    rep.residuals.push_back(rn);
                    accepted = true;
                    break;
                }
            }
            if (!accepted) {
                rep.message = "line search failed";
                break;
            }
        }
    } catch (const EvolutionError& e) {
        rep.diverged = true;
        rep.message = e.what();
    }
    rep.solution = u;
    finish(rep, cfg, f, opts);
    return rep;
}

PeriodicSolveReport solve_periodic(PeriodicMethod method, const Field& u0, const EvolutionConfig& cfg,
                                   const Reaction& f, const PeriodicOptions& opts) {
    switch (method) {
        case PeriodicMethod::Picard: return picard_solve(u0, cfg, f, opts);
        case PeriodicMethod::Anderson: return anderson_solve(u0, cfg, f, opts);
        case PeriodicMethod::NewtonKrylov: return newton_krylov_solve(u0, cfg, f, opts);
    }
    throw std::invalid_argument("unknown periodic method");
}

double stationary_residual(const Field& u, const Reaction& f) {
    Field r = laplacian(u);
    std::vector<double> fu(u.size());
    f.evaluate(0.0, u.values(), fu);
    for (std::size_t i = 0; i < u.size(); ++i) r[i] += fu[i];
    return norm_l2(r);
}

StationaryReport averaged_stationary_solve(const Reaction& avg, const Field& u0, const StationaryOptions& opts) {
    if (!(opts.tol > 0.0)) throw std::invalid_argument("stationary tol must be positive");
    if (opts.relax_time < 0.0 || !(opts.relax_dt > 0.0))
        throw std::invalid_argument("relaxation time must be nonnegative and relax_dt positive");
    StationaryReport rep;
    const GridPtr& grid = u0.grid();
    const std::size_t n = u0.size();
    Field u = u0;

    try {
        if (opts.relax_time > 0.0) {
            EvolutionConfig relax;
            relax.dt = opts.relax_dt;
            u = integrate(u, 0.0, opts.relax_time, relax, avg);
        }
    } catch (const EvolutionError& e) {
        rep.solution = u0;
        rep.residual = stationary_residual(u0, avg);
        rep.message = std::string("relaxation failed: ") + e.what();
        return rep;
    }

    const auto mu = grid->laplacian_eigenvalues();
    const double dv = std::sqrt(grid->cell_volume());
    std::vector<double> fu(n), df(n);

    // R(u) = Delta u + fhat(u), scaled by sqrt(h^N) so the Euclidean norm is the L2 norm.
    auto elliptic_residual = [&](const Field& w) {
        Field r = laplacian(w);
        avg.evaluate(0.0, w.values(), fu);
        std::vector<double> out(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = dv * (r[i] + fu[i]);
        return out;
    };
    auto euclid = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double e : v) s += e * e;
        return std::sqrt(s);
    };

    std::vector<double> r = elliptic_residual(u);
    rep.residuals.push_back(euclid(r));
    for (int k = 0;; ++k) {
        if (rep.residuals.back() <= opts.tol) {
            rep.converged = true;
            break;
        }
        if (!std::isfinite(rep.residuals.back())) {
            rep.message = "non-finite residual";
            break;
        }
        if (k >= opts.newton_max_iter) {
            rep.message = "newton_max_iter reached";
            break;
        }
        avg.derivative(0.0, u.values(), df);
        double sigma = 1.0;
        for (double d : df) sigma = std::max(sigma, 1.0 + std::abs(d));

        // Right preconditioner P^{-1} = (Delta - sigma)^{-1}, diagonal in the sine basis.
        auto precondition = [&](const std::vector<double>& y) {
            auto c = sine_transform(Field(grid, y)).coefficients;
            for (std::size_t q = 0; q < c.size(); ++q) c[q] /= -(mu[q] + sigma);
            auto z = inverse_sine_transform(grid, c);
            return std::vector<double>(z.values().begin(), z.values().end());
        };
        detail::LinearMap jp = [&](const std::vector<double>& y, std::vector<double>& out) {
            const auto z = precondition(y);
            Field zf(grid, z);
            Field lz = laplacian(zf);
            out.resize(n);
            for (std::size_t i = 0; i < n; ++i) out[i] = lz[i] + df[i] * z[i];
        };
        std::vector<double> rhs(n);
        for (std::size_t i = 0; i < n; ++i) rhs[i] = -r[i] / dv;
        const auto lin = detail::gmres(jp, rhs, opts.krylov_rtol, opts.krylov_restart, opts.krylov_max_iter);
        const auto delta = precondition(lin.x);

        const double r0 = rep.residuals.back();
        bool accepted = false;
        for (double s = 1.0; s >= 1.0 / 256.0; s *= 0.5) {
            Field ut = u;
            for (std::size_t i = 0; i < n; ++i) ut[i] += s * delta[i];
            auto rt = elliptic_residual(ut);
            const double rn = euclid(rt);
            if (std::isfinite(rn) && rn < (1.0 - 1e-4 * s) * r0) {
                u = std::move(ut);
                r = std::move(rt);
                rep.residuals.push_back(rn);
                accepted = true;
                break;
            }
        }
        ++rep.newton_iterations;
        if (!accepted) {
            rep.message = "line search failed";
            break;
        }
    }
    rep.solution = u;
    rep.residual = rep.residuals.back();
    return rep;
}

LambdaSweepReport lambda_sweep(std::vector<double> lambdas, const Field& u0, const Nonlinearity& nl,
                               const EvolutionConfig& base, const LambdaSweepOptions& opts) {
    if (lambdas.empty()) throw std::invalid_argument("lambda list is empty");
    for (double l : lambdas)
        if (!(l > 0.0 && l <= 1.0)) throw std::invalid_argument("lambda values must lie in (0, 1]");
    if (opts.steps_per_period < 1) throw std::invalid_argument("steps_per_period must be positive");
    std::sort(lambdas.begin(), lambdas.end(), std::greater<>());
    if (std::adjacent_find(lambdas.begin(), lambdas.end()) != lambdas.end())
        throw std::invalid_argument("lambda values must be distinct");

    LambdaSweepReport rep;
    rep.lambdas = lambdas;
    Field start = u0;
    for (double l : lambdas) {
        EvolutionConfig cfg = base;
        cfg.lambda = l;
        cfg.dt = l * nl.period() / opts.steps_per_period;
        auto s = solve_periodic(opts.method, start, cfg, nl, opts.periodic);
        if (s.converged) start = s.solution;
        rep.solves.push_back(std::move(s));
    }

    const auto avg = std::make_shared<Nonlinearity>(nl);
    AveragedProblem problem(avg, opts.quadrature_intervals);
    rep.stationary = averaged_stationary_solve(problem, rep.solves.back().solution, opts.stationary);
    for (const auto& s : rep.solves) rep.distances.push_back(norm_h1(s.solution - rep.stationary.solution));
    rep.monotone = true;
    for (std::size_t i = 1; i < rep.distances.size(); ++i)
        if (!(rep.distances[i] < rep.distances[i - 1])) rep.monotone = false;
    return rep;
}

Field random_sphere_point(const GridPtr& grid, double h1_radius, std::uint64_t seed) {
    if (!(h1_radius >= 0.0)) throw std::invalid_argument("radius must be nonnegative");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    const auto mu = grid->laplacian_eigenvalues();
    std::vector<double> c(grid->size());
    for (std::size_t k = 0; k < c.size(); ++k) c[k] = normal(rng) / (1.0 + mu[k]);
    Field u = inverse_sine_transform(grid, c);
    const double nrm = norm_h1(u);
    if (nrm > 0.0) u *= h1_radius / nrm;
    return u;
}

AprioriReport apriori_sweep(const std::vector<double>& radii, SweepDirection direction, const EvolutionConfig& cfg,
                            const Reaction& f, std::uint64_t seed, int directions, PeriodicMethod method,
                            const PeriodicOptions& opts) {
    for (double r : radii)
        if (!(r > 0.0)) throw std::invalid_argument("radii must be positive");
    if (directions < 1) throw std::invalid_argument("directions must be positive");

    AprioriReport rep;
    rep.direction = direction;
    rep.radii = radii;
    rep.seed = seed;
    rep.zero_threshold = std::max(100.0 * opts.tol, 1e-6);
    PeriodicOptions run_opts = opts;
    run_opts.orbit_samples = 0;

    std::mt19937_64 master(seed);
    bool any = false;
    for (double radius : radii) {
        for (int d = 0; d < directions; ++d) {
            const Field u0 = random_sphere_point(f.grid(), radius, master());
            const auto s = solve_periodic(method, u0, cfg, f, run_opts);
            AprioriRun run;
            run.radius = radius;
            run.direction = d;
            run.converged = s.converged;
            run.solution_norm = norm_h1(s.solution);
            run.residual = s.residuals.empty() ? 0.0 : s.residuals.back();
            run.iterations = s.iterations;
            rep.runs.push_back(run);
            if (!s.converged) continue;
            if (run.solution_norm > rep.zero_threshold) rep.found_nonzero = true;
            if (direction == SweepDirection::LargeNorm) {
                rep.extreme_norm = std::max(rep.extreme_norm, run.solution_norm);
            } else if (run.solution_norm > rep.zero_threshold) {
                rep.extreme_norm = any ? std::min(rep.extreme_norm, run.solution_norm) : run.solution_norm;
                any = true;
            }
        }
    }
    return rep;
}

}  // namespace semiper
