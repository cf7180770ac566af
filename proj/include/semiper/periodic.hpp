#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "semiper/evolution.hpp"
#include "semiper/nonlinearity.hpp"

namespace semiper {

enum class PeriodicMethod { Picard, Anderson, NewtonKrylov };
std::string to_string(PeriodicMethod m);
PeriodicMethod periodic_method_from_string(const std::string& s);

struct PeriodicOptions {
    double tol = 1e-8;
    int max_iter = 200;
    int anderson_window = 3;
    double krylov_rtol = 1e-3;
    int krylov_restart = 30;
    int krylov_max_iter = 120;
    /// Samples per period of the stored orbit; 0 skips the orbit.
    int orbit_samples = 32;
};

/**
 * Fixed-point search for u = Phi(u), Phi the translation over one period
 * lambda T of u' = Delta u + f(t/lambda, x, u). Residuals are
 * ||Phi(u_k) - u_k||_{H1}.
 */
struct PeriodicSolveReport {
    PeriodicMethod method = PeriodicMethod::Picard;
    std::vector<double> residuals;
    bool converged = false;
    bool diverged = false;
    std::string message;
    Field solution;
    int iterations = 0;
    /// Geometric mean of the last few residual ratios (NaN when fewer than two residuals).
    double decay_ratio = 0.0;
    double period = 0.0;
    long map_evaluations = 0;
    Trajectory orbit;
};

/// Phi(u): one period lambda T from t = 0.
Field period_map(const Field& u, const EvolutionConfig& cfg, const Reaction& f);

PeriodicSolveReport picard_solve(const Field& u0, const EvolutionConfig& cfg, const Reaction& f,
                                 const PeriodicOptions& opts = {});
PeriodicSolveReport anderson_solve(const Field& u0, const EvolutionConfig& cfg, const Reaction& f,
                                   const PeriodicOptions& opts = {});
PeriodicSolveReport newton_krylov_solve(const Field& u0, const EvolutionConfig& cfg, const Reaction& f,
                                        const PeriodicOptions& opts = {});
PeriodicSolveReport solve_periodic(PeriodicMethod method, const Field& u0, const EvolutionConfig& cfg,
                                   const Reaction& f, const PeriodicOptions& opts = {});

/// ||Delta u + f(0, x, u)||_{L2}
double stationary_residual(const Field& u, const Reaction& f);

struct StationaryOptions {
    double tol = 1e-9;
    /// Time of averaged-flow relaxation before the Newton polish.
    double relax_time = 20.0;
    double relax_dt = 0.05;
    int newton_max_iter = 40;
    double krylov_rtol = 1e-6;
    int krylov_restart = 50;
    int krylov_max_iter = 400;
};

struct StationaryReport {
    Field solution;
    double residual = 0.0;
    bool converged = false;
    int newton_iterations = 0;
    std::vector<double> residuals;
    std::string message;
};

/// Solves Delta u + fhat(x, u) = 0 for an autonomous reaction (fhat evaluated at t = 0).
StationaryReport averaged_stationary_solve(const Reaction& avg, const Field& u0,
                                           const StationaryOptions& opts = {});

struct LambdaSweepReport {
    std::vector<double> lambdas;  // in the order solved (decreasing)
    std::vector<PeriodicSolveReport> solves;
    std::vector<double> distances;  // H1 distance to the averaged stationary solution
    StationaryReport stationary;
    bool monotone = false;  // distances strictly decrease as lambda decreases
};

struct LambdaSweepOptions {
    PeriodicMethod method = PeriodicMethod::Anderson;
    PeriodicOptions periodic;
    StationaryOptions stationary;
    int quadrature_intervals = 256;
    /// Time steps per period lambda T.
    int steps_per_period = 256;
};

/// Continuation in lambda: each fixed point warm-starts the next smaller lambda.
/// The averaged stationary solution is polished from the smallest-lambda fixed point.
LambdaSweepReport lambda_sweep(std::vector<double> lambdas, const Field& u0, const Nonlinearity& nl,
                               const EvolutionConfig& base, const LambdaSweepOptions& opts = {});

enum class SweepDirection { LargeNorm, SmallNorm };
std::string to_string(SweepDirection d);
SweepDirection sweep_direction_from_string(const std::string& s);

struct AprioriRun {
    double radius = 0.0;
    int direction = 0;
    bool converged = false;
    double solution_norm = 0.0;  // ||u(0)||_{H1} of the periodic solution found
    double residual = 0.0;
    int iterations = 0;
};

/// Sampled evidence for a priori bounds; it does not prove them.
struct AprioriReport {
    SweepDirection direction = SweepDirection::LargeNorm;
    std::vector<double> radii;
    std::vector<AprioriRun> runs;
    /// Largest ||u(0)|| among the solutions found (LargeNorm) or smallest nonzero one (SmallNorm).
    double extreme_norm = 0.0;
    bool found_nonzero = false;
    double zero_threshold = 0.0;
    std::uint64_t seed = 0;
    std::string label = "numerical evidence from sampled initial states, not a proof";
};

/// Starts Picard (or the given method) from `directions` random states on the H1 sphere of each radius.
AprioriReport apriori_sweep(const std::vector<double>& radii, SweepDirection direction, const EvolutionConfig& cfg,
                            const Reaction& f, std::uint64_t seed, int directions = 16,
                            PeriodicMethod method = PeriodicMethod::Picard, const PeriodicOptions& opts = {});

/// Random field with spectral coefficients N(0,1)/(1+mu_k), scaled to the given H1 norm.
Field random_sphere_point(const GridPtr& grid, double h1_radius, std::uint64_t seed);

}  // namespace semiper
