#include "semiper/evolution.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace semiper {

std::string to_string(Scheme s) {
    switch (s) {
        case Scheme::StrangSplitting: return "strang";
        case Scheme::IMEXEuler: return "imex_euler";
    }
    return "?";
}

Scheme scheme_from_string(const std::string& s) {
    if (s == "strang") return Scheme::StrangSplitting;
    if (s == "imex_euler") return Scheme::IMEXEuler;
    throw std::invalid_argument("unknown scheme '" + s + "' (expected strang or imex_euler)");
}

void EvolutionConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive and finite");
    if (!(lambda > 0.0 && lambda <= 1.0)) throw std::invalid_argument("lambda must lie in (0, 1]");
    if (!(diffusion > 0.0) || !std::isfinite(diffusion)) throw std::invalid_argument("diffusion must be positive");
    if (!std::isfinite(reaction_scale)) throw std::invalid_argument("reaction scale must be finite");
    if (!(max_time > 0.0)) throw std::invalid_argument("max_time must be positive");
}

EvolutionConfig default_evolution_config(double period, double lambda) {
    EvolutionConfig cfg;
    cfg.lambda = lambda;
    cfg.dt = lambda * period / 256.0;
    return cfg;
}

namespace {

class Stepper {
public:
    Stepper(const GridPtr& grid, const EvolutionConfig& cfg, const Reaction& f)
        : grid_(grid), cfg_(cfg), f_(f), n_(grid->size()), spec_(n_), k1_(n_), k2_(n_), k3_(n_), k4_(n_), tmp_(n_) {
        if (!f.grid()->same_as(*grid)) throw std::invalid_argument("reaction and field live on different grids");
    }

    // Multiplies the spectral coefficients of u by mult[k] (the transforms' scale folded in).
    void apply_multiplier(std::vector<double>& u, const std::vector<double>& mult) {
        grid_->raw_sine_transform(u, spec_);
        for (std::size_t k = 0; k < n_; ++k) spec_[k] *= mult[k];
        grid_->raw_sine_transform(spec_, u);
    }

    std::vector<double> heat_multiplier(double t) const {
        const auto mu = grid_->laplacian_eigenvalues();
        const double scale = grid_->forward_scale() * grid_->inverse_scale();
        std::vector<double> m(n_);
        for (std::size_t k = 0; k < n_; ++k) m[k] = scale * std::exp(-cfg_.diffusion * t * mu[k]);
        return m;
    }

    std::vector<double> resolvent_multiplier(double t) const {
        const auto mu = grid_->laplacian_eigenvalues();
        const double scale = grid_->forward_scale() * grid_->inverse_scale();
        std::vector<double> m(n_);
        for (std::size_t k = 0; k < n_; ++k) m[k] = scale / (1.0 + cfg_.diffusion * t * mu[k]);
        return m;
    }

    void reaction(double t, const std::vector<double>& u, std::vector<double>& out) {
        f_.evaluate(t / cfg_.lambda, u, out);
        if (cfg_.reaction_scale != 1.0)
            for (auto& v : out) v *= cfg_.reaction_scale;
    }

    // RK4 for du/dtau = rho f((t + tau)/lambda, u) on [0, dt].
    void ode(std::vector<double>& u, double t, double dt) {
        reaction(t, u, k1_);
        for (std::size_t i = 0; i < n_; ++i) tmp_[i] = u[i] + 0.5 * dt * k1_[i];
        reaction(t + 0.5 * dt, tmp_, k2_);
        for (std::size_t i = 0; i < n_; ++i) tmp_[i] = u[i] + 0.5 * dt * k2_[i];
        reaction(t + 0.5 * dt, tmp_, k3_);
        for (std::size_t i = 0; i < n_; ++i) tmp_[i] = u[i] + dt * k3_[i];
        reaction(t + dt, tmp_, k4_);
        for (std::size_t i = 0; i < n_; ++i) u[i] += dt / 6.0 * (k1_[i] + 2.0 * (k2_[i] + k3_[i]) + k4_[i]);
        check(u, t + dt);
    }

    static void check(const std::vector<double>& u, double t) {
        for (double v : u) {
            if (!std::isfinite(v)) {
                char buf[96];
                std::snprintf(buf, sizeof buf, "non-finite value in nonlinear substep at t=%.9g", t);
                throw EvolutionError(buf, t);
            }
        }
    }

    // Advances u by `steps` steps of size dt starting at time t0. Adjacent
    // Strang half-steps are fused into one full heat step.
    void advance(std::vector<double>& u, double t0, long steps, double dt) {
        if (steps <= 0) return;
        if (cfg_.scheme == Scheme::StrangSplitting) {
            if (half_.empty()) {
                half_ = heat_multiplier(0.5 * dt);
                full_ = heat_multiplier(dt);
            }
            apply_multiplier(u, half_);
            for (long k = 0; k < steps; ++k) {
                ode(u, t0 + k * dt, dt);
                apply_multiplier(u, k + 1 < steps ? full_ : half_);
            }
        } else {
            if (full_.empty()) full_ = resolvent_multiplier(dt);
            for (long k = 0; k < steps; ++k) {
                const double t = t0 + k * dt;
                reaction(t, u, k1_);
                for (std::size_t i = 0; i < n_; ++i) u[i] += dt * k1_[i];
                check(u, t + dt);
                apply_multiplier(u, full_);
            }
        }
    }

private:
    GridPtr grid_;
    const EvolutionConfig& cfg_;
    const Reaction& f_;
    std::size_t n_;
    std::vector<double> spec_, k1_, k2_, k3_, k4_, tmp_;
    std::vector<double> half_, full_;
};

std::vector<double> copy_values(const Field& u) {
    if (!u.grid()) throw std::invalid_argument("field has no grid");
    if (!u.all_finite()) throw std::invalid_argument("initial field has non-finite values");
    return {u.values().begin(), u.values().end()};
}

}  // namespace

Field heat_semigroup(const Field& u, double t) {
    if (!(t >= 0.0)) throw std::invalid_argument("heat_semigroup requires t >= 0");
    if (t == 0.0) return u;
    auto spec = sine_transform(u);
    const auto mu = u.grid()->laplacian_eigenvalues();
    for (std::size_t k = 0; k < spec.coefficients.size(); ++k) spec.coefficients[k] *= std::exp(-t * mu[k]);
    return inverse_sine_transform(spec);
}

Field step(const Field& u, double t, const EvolutionConfig& cfg, const Reaction& f) {
    cfg.validate();
    auto v = copy_values(u);
    Stepper s(u.grid(), cfg, f);
    s.advance(v, t, 1, cfg.dt);
    return Field(u.grid(), std::move(v));
}

StepPlan plan_steps(double duration, double dt) {
    if (!(duration >= 0.0) || !std::isfinite(duration)) throw std::invalid_argument("duration must be finite and >= 0");
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
    StepPlan p;
    if (duration == 0.0) return p;
    p.steps = static_cast<long>(std::ceil(duration / dt * (1.0 - 1e-12)));
    if (p.steps < 1) p.steps = 1;
    p.dt = duration / static_cast<double>(p.steps);
    p.adjusted = std::abs(p.dt - dt) > 1e-12 * dt;
    return p;
}

Field integrate(const Field& u0, double t0, double duration, const EvolutionConfig& cfg, const Reaction& f,
                StepPlan* plan) {
    cfg.validate();
    if (duration > cfg.max_time) throw std::invalid_argument("requested duration exceeds max_time");
    const auto p = plan_steps(duration, cfg.dt);
    if (plan) *plan = p;
    auto v = copy_values(u0);
    Stepper s(u0.grid(), cfg, f);
    s.advance(v, t0, p.steps, p.dt);
    return Field(u0.grid(), std::move(v));
}

Field translation_operator(const Field& u0, double t, const EvolutionConfig& cfg, const Reaction& f,
                           StepPlan* plan) {
    if (!(t > 0.0)) throw std::invalid_argument("translation_operator requires t > 0");
    return integrate(u0, 0.0, t, cfg, f, plan);
}

Trajectory evolve(const Field& u0, double t0, double t1, const EvolutionConfig& cfg, const Reaction& f,
                  double sample_every, std::vector<double> tail_radii) {
    cfg.validate();
    if (!(t1 > t0)) throw std::invalid_argument("evolve requires t1 > t0");
    if (t1 - t0 > cfg.max_time) throw std::invalid_argument("requested duration exceeds max_time");
    if (!(sample_every > 0.0)) throw std::invalid_argument("sample_every must be positive");

    Trajectory traj;
    traj.plan = plan_steps(t1 - t0, cfg.dt);
    traj.tail_radii = std::move(tail_radii);
    const long stride = std::max(1L, std::lround(sample_every / traj.plan.dt));

    auto record = [&](double t, std::vector<double> v) {
        Field u(u0.grid(), std::move(v));
        traj.times.push_back(t);
        traj.l2.push_back(norm_l2(u));
        traj.h1.push_back(norm_h1(u));
        std::vector<double> tails;
        for (double r : traj.tail_radii) tails.push_back(tail_mass(u, r));
        traj.tails.push_back(std::move(tails));
        traj.fields.push_back(std::move(u));
    };

    auto v = copy_values(u0);
    record(t0, v);
    Stepper s(u0.grid(), cfg, f);
    const double dt = traj.plan.dt;
    for (long k = 0; k < traj.plan.steps;) {
        const long n = std::min(stride, traj.plan.steps - k);
        s.advance(v, t0 + k * dt, n, dt);
        k += n;
        record(k == traj.plan.steps ? t1 : t0 + k * dt, v);
    }
    return traj;
}

void Trajectory::write_csv(std::ostream& out) const {
    out << "t,L2,H1";
    for (double r : tail_radii) {
        char buf[48];
        std::snprintf(buf, sizeof buf, ",tail@%g", r);
        out << buf;
    }
    out << '\n';
    char buf[32];
    for (std::size_t k = 0; k < times.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.17g", times[k]);
        out << buf;
        std::snprintf(buf, sizeof buf, ",%.17g", l2[k]);
        out << buf;
        std::snprintf(buf, sizeof buf, ",%.17g", h1[k]);
        out << buf;
        for (double m : tails[k]) {
            std::snprintf(buf, sizeof buf, ",%.17g", m);
            out << buf;
        }
        out << '\n';
    }
}

}  // namespace semiper
