#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "semiper/evolution.hpp"
#include "semiper/nonlinearity.hpp"
#include "semiper/spectral.hpp"

namespace semiper {

enum class InitialDataMode { H1Converging, L2OnlyConverging };
std::string to_string(InitialDataMode m);
InitialDataMode initial_data_mode_from_string(const std::string& s);

struct AveragingOptions {
    std::vector<double> lambdas{1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125};
    /// Observation horizon; <= 0 means one period T.
    double t_obs = 0.0;
    /// Start of the compared window; <= 0 means t_obs / 10.
    double delta = 0.0;
    InitialDataMode mode = InitialDataMode::H1Converging;
    /// H1 size of the high-frequency perturbation in L2-only mode.
    double noise_h1 = 0.5;
    std::uint64_t seed = 1;
    int quadrature_intervals = 256;
    /// Time steps per fast period lambda T.
    int steps_per_period = 256;
    /// Time steps per period T for the averaged reference flow.
    int reference_steps_per_period = 2048;
    /// Comparison samples per period T.
    int samples_per_period = 256;
};

struct AveragingReport {
    std::vector<double> lambdas;
    /// sup over sampled t in [delta, t_obs] of ||u_lambda(t) - uhat(t)||_{H1}; NaN on failure
    std::vector<double> errors;
    /// Discrepancy at the first sample t >= delta.
    std::vector<double> errors_at_delta;
    std::vector<double> noise_l2;
    std::vector<double> noise_h1;
    /// One entry per lambda, empty when that run succeeded.
    std::vector<std::string> failures;
    double delta = 0.0;
    double t_obs = 0.0;
    InitialDataMode mode = InitialDataMode::H1Converging;
    bool strictly_decreasing = false;
};

/// Runs u' = Delta u + f(t/lambda, x, u) for each lambda against the averaged flow from the same data.
AveragingReport averaging_convergence(const Nonlinearity& nl, const Field& u0, const AveragingOptions& opts = {});

/// In L2-only mode: a band of sine modes along the first axis, centered at an index that grows
/// like lambda^{-1/2}, scaled to H1 norm noise_h1. Its L2 norm shrinks with lambda.
Field high_frequency_noise(const GridPtr& grid, double lambda, double lambda_min, double h1_size,
                           std::uint64_t seed);

struct TailReport {
    std::vector<double> radii;
    std::vector<double> times;
    std::vector<std::vector<double>> tails;  // tails[k][r]
    double bound_R = 0.0;
    double rate_a = 0.0;
    /// alpha_n = max_t (tail(n, t) - R^2 e^{-2at})_+
    std::vector<double> alpha;
    /// alpha strictly decreasing in n, or zero from some n on
    bool decreasing = false;
    double floor = 0.0;
    bool passes = false;
};

/// sup_t ||u(t)||_{H1} over the samples of a trajectory.
double trajectory_h1_bound(const Trajectory& traj);

/// Fits alpha_n from a trajectory recorded with tail radii. passes iff decreasing and the
/// last alpha is at most `floor`.
TailReport tail_estimate(const Trajectory& traj, double a, double R, double floor = 1e-8);

struct ContractionReport {
    std::vector<double> times;
    std::vector<double> ratios;
    /// The same ratios at dt / 2.
    std::vector<double> refined_ratios;
    double rate_a = 0.0;
    double max_ratio = 0.0;
    double tolerance = 0.0;
    bool passes = false;
};

/// ||Phi_t(u1) - Phi_t(u2)||_{L2} / (e^{-at} ||u1 - u2||_{L2}); requires b = 0.
ContractionReport contraction_test(const Nonlinearity& nl, const Field& u1, const Field& u2,
                                   const std::vector<double>& times, const EvolutionConfig& cfg,
                                   double tolerance = 0.01);

/// Best constant of ||u||_{2N/(N-2)} <= C(N) ||grad u||_{L2} (Aubin, Talenti), N >= 3.
double sobolev_constant(int N);

struct Remark52Result {
    double lhs = 0.0;
    /// abar^{1-N/2p} / ((N/2p)^{N/2p} C^{N/p}), the form produced by the energy estimate
    double rhs = 0.0;
    /// The same with C^{(N/2p)^2}, the exponent printed in the example discussion
    double rhs_printed_variant = 0.0;
    double margin = 0.0;
    bool holds = false;
    bool holds_printed_variant = false;
    double sobolev_constant = 0.0;
};

/// Sufficient nonexistence bound for the linear lambda-family. C_N <= 0 selects sobolev_constant(N).
Remark52Result remark52_bound(double alpha0_sup_lp, double alpha_inf_bar, double p, int N, double C_N = 0.0);

/// sup over kPeriodSamples times of ||alpha0(., t)||_{L^p} (or omega0), grid quadrature.
double sup_lp_norm_alpha0(const Nonlinearity& nl);
double sup_lp_norm_omega0(const Nonlinearity& nl);

enum class Theorem { Thm11, Thm12 };
std::string to_string(Theorem t);
Theorem theorem_from_string(const std::string& s);

enum class CheckStatus { Pass, Fail, Uncertified };
std::string to_string(CheckStatus s);

enum class Verdict { Theorem11Applicable, Theorem12Applicable, Inconclusive };
std::string to_string(Verdict v);

/// Which verdict a check feeds: the base existence list, the extra items for a nontrivial
/// solution, or neither.
enum class CheckRole { Theorem11, Theorem12, Informational };

struct HypothesisCheck {
    std::string name;
    CheckStatus status = CheckStatus::Fail;
    /// Positive when the check holds with room to spare; NaN when meaningless.
    double margin = 0.0;
    std::string detail;
    CheckRole role = CheckRole::Theorem11;
};

struct HypothesisOptions {
    int dissipativity_samples = 4000;
    int periodicity_samples = 1000;
    double u_range = 10.0;
    std::uint64_t seed = 1;
    int quadrature_intervals = 256;
    double gap_tol = 0.0;
    EigenOptions eigen;
};

struct HypothesisVerdict {
    Theorem which = Theorem::Thm11;
    std::vector<HypothesisCheck> checks;
    Verdict verdict = Verdict::Inconclusive;
    std::optional<SchrodingerReport> at_infinity;
    std::optional<SchrodingerReport> at_zero;
    std::optional<ParityResult> parity;
    std::optional<Remark52Result> remark52_infinity;
    std::optional<Remark52Result> remark52_zero;

    const HypothesisCheck* find(const std::string& name) const;
};

/**
 * Evaluates every checkable hypothesis of the existence theorems. Nonexistence of periodic
 * solutions for the linear lambda-families is certified only by time independence of the
 * coefficient or by remark52_bound; otherwise that item is Uncertified and the verdict
 * inconclusive.
 */
HypothesisVerdict check_theorem_hypotheses(const Nonlinearity& nl, Theorem which,
                                           const HypothesisOptions& opts = {});

}  // namespace semiper
