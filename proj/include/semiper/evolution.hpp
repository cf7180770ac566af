#pragma once

#include <iosfwd>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "semiper/field.hpp"
#include "semiper/reaction.hpp"

namespace semiper {

/// Raised when the nonlinear substep produces NaN or overflows.
class EvolutionError : public std::runtime_error {
public:
    EvolutionError(const std::string& what, double time) : std::runtime_error(what), time_(time) {}
    double time() const { return time_; }

private:
    double time_;
};

enum class Scheme { StrangSplitting, IMEXEuler };
enum class SubstepMethod { RK4 };

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

/**
 * Integrates u' = kappa Delta u + rho f(t/lambda, x, u).
 * The plain problem has kappa = rho = 1; the other two exist for the
 * time-rescaled form lambda Delta u + lambda f(t).
 */
struct EvolutionConfig {
    double dt = 0.0;
    Scheme scheme = Scheme::StrangSplitting;
    double lambda = 1.0;
    SubstepMethod substep = SubstepMethod::RK4;
    double max_time = std::numeric_limits<double>::infinity();
    double diffusion = 1.0;
    double reaction_scale = 1.0;

    void validate() const;
};

/// dt = lambda T / 256, the default for periodic runs.
EvolutionConfig default_evolution_config(double period, double lambda = 1.0);

/// e^{t Delta} u, exact for the discrete operator.
Field heat_semigroup(const Field& u, double t);

/// One step from time t to t + dt.
Field step(const Field& u, double t, const EvolutionConfig& cfg, const Reaction& f);

/// Uniform step count covering [0, duration] with a step no larger than dt.
struct StepPlan {
    long steps = 0;
    double dt = 0.0;
    bool adjusted = false;
};

StepPlan plan_steps(double duration, double dt);

/// u(t0 + duration) from u(t0) = u0, without intermediate storage.
Field integrate(const Field& u0, double t0, double duration, const EvolutionConfig& cfg, const Reaction& f,
                StepPlan* plan = nullptr);

/// Phi_t(u0): evolve from time 0 to t.
Field translation_operator(const Field& u0, double t, const EvolutionConfig& cfg, const Reaction& f,
                           StepPlan* plan = nullptr);

struct Trajectory {
    std::vector<double> times;
    std::vector<Field> fields;
    std::vector<double> l2;
    std::vector<double> h1;
    std::vector<double> tail_radii;
    /// tails[k][r] = tail mass at times[k] outside tail_radii[r]
    std::vector<std::vector<double>> tails;
    StepPlan plan;

    std::size_t size() const { return times.size(); }
    void write_csv(std::ostream& out) const;
};

/// Samples every `sample_every` time units (rounded to a whole number of steps),
/// always including t0 and t1.
Trajectory evolve(const Field& u0, double t0, double t1, const EvolutionConfig& cfg, const Reaction& f,
                  double sample_every, std::vector<double> tail_radii = {});

}  // namespace semiper
