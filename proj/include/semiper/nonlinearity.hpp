#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "semiper/field.hpp"
#include "semiper/reaction.hpp"

namespace semiper {

class NonlinearityError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// phi(x): Constant (bounded part), Decay (1+|x|)^-s, Gaussian exp(-|x|^2 / 2 sigma^2).
enum class SpaceProfile { Constant, Decay, Gaussian };
/// tau(t): Constant, |cos(nu t)|, cos(nu t), sin(nu t).
enum class TimeProfile { Constant, AbsCos, Cos, Sin };
/// Bounded Lipschitz outer functions with g(0) = 0, g'(0) = 1, Lipschitz constant 1.
enum class OuterFunction { Sin, Tanh, Atan };

std::string to_string(SpaceProfile p);
std::string to_string(TimeProfile p);
std::string to_string(OuterFunction g);
SpaceProfile space_profile_from_string(const std::string& s);
TimeProfile time_profile_from_string(const std::string& s);
OuterFunction outer_function_from_string(const std::string& s);

/// coeff * phi(x) * tau(t). Constant profiles form the L^inf part of a
/// coefficient, decaying ones the L^p part.
struct Term {
    double coeff = 1.0;
    SpaceProfile space = SpaceProfile::Constant;
    double space_param = 0.0;
    TimeProfile time = TimeProfile::Constant;
    double frequency = 1.0;

    bool integrable() const { return space != SpaceProfile::Constant; }
    bool time_independent() const { return time == TimeProfile::Constant || coeff == 0.0; }
    double space_factor(double r) const;
    double time_factor(double t) const;

    bool operator==(const Term&) const = default;
};

using Coefficient = std::vector<Term>;

struct OuterTerm {
    OuterFunction function = OuterFunction::Sin;
    Coefficient inner;

    bool operator==(const OuterTerm&) const = default;
};

/// f(t,x,u) = U(t,x) + V(t,x) u + sum_j g_j(W_j(t,x) u).
struct CompositionTree {
    Coefficient source;
    Coefficient linear;
    std::vector<OuterTerm> outer;

    bool operator==(const CompositionTree&) const = default;
};

/// Hoelder data of the time regularity hypothesis. Stored, never used by the solvers.
struct HolderData {
    double theta = 0.5;
    double k = 0.0;
    double k_tilde = 0.0;
    double lipschitz = 0.0;
};

/// Number of time samples over one period used for sup/min over t.
inline constexpr int kPeriodSamples = 33;

/**
 * f(t,x,u) with period T on a fixed grid, plus the structural data derived
 * from its composition tree:
 *
 *   omega = lim_{|u|->inf} f/u = V = omega0 - omega_inf
 *   alpha = lim_{u->0} f/u     = V + sum_j g_j'(0) W_j = alpha0 - alpha_inf
 *
 * and the dissipativity data (rate a, perturbation b(x)) with
 * (f(u)-f(v))(u-v) <= (-a + b(x)) |u-v|^2.
 */
class Nonlinearity : public Reaction {
public:
    Nonlinearity(GridPtr grid, double period, CompositionTree tree, double p);

    const GridPtr& grid() const override { return grid_; }
    double period() const override { return period_; }
    bool autonomous() const override;
    void evaluate(double t, std::span<const double> u, std::span<double> out) const override;
    void derivative(double t, std::span<const double> u, std::span<double> out) const override;

    double integrability_exponent() const { return p_; }
    const CompositionTree& tree() const { return tree_; }

    /// f(t, x_i, u) at grid point i.
    double evaluate_point(double t, std::size_t index, double u) const;

    /// Coefficient fields at time t.
    Field omega0(double t) const;
    Field omega_inf(double t) const;
    Field alpha0(double t) const;
    Field alpha_inf(double t) const;
    Field omega(double t) const { return omega0(t) - omega_inf(t); }
    Field alpha(double t) const { return alpha0(t) - alpha_inf(t); }

    /// Minima of omega_inf, alpha_inf over the grid and kPeriodSamples times.
    double omega_inf_lower_bound() const { return omega_inf_min_; }
    double alpha_inf_lower_bound() const { return alpha_inf_min_; }

    double dissipativity_rate() const { return rate_; }
    const Field& dissipativity_perturbation() const { return perturbation_; }
    bool dissipativity_declared() const { return declared_; }

    /// f(t,x,0) = 0 for every t, x (no source terms).
    bool zero_preserving() const;
    bool omega_time_independent() const;
    bool alpha_time_independent() const;

    /// Replaces the derived dissipativity data with user-declared values.
    Nonlinearity with_dissipativity(double rate, Field perturbation) const;

    const std::optional<HolderData>& holder() const { return holder_; }
    void set_holder(HolderData h) { holder_ = h; }

    /// Sum of two nonlinearities on the same grid with the same period.
    friend Nonlinearity operator+(const Nonlinearity& a, const Nonlinearity& b);

private:
    enum class Part { All, Integrable, Bounded };
    void derive_structure();
    void coefficient_at(const Coefficient& c, const std::vector<std::vector<double>>& phi, double t,
                        std::vector<double>& out, Part part = Part::All) const;

    friend class AveragedProblem;

    GridPtr grid_;
    double period_;
    CompositionTree tree_;
    double p_;
    // Sampled spatial profiles per term: source, linear, then each outer term.
    std::vector<std::vector<double>> source_phi_, linear_phi_;
    std::vector<std::vector<std::vector<double>>> outer_phi_;
    double rate_ = 0.0;
    Field perturbation_;
    bool declared_ = false;
    double omega_inf_min_ = 0.0;
    double alpha_inf_min_ = 0.0;
    std::optional<HolderData> holder_;
};

double outer_value(OuterFunction g, double z);
double outer_slope(OuterFunction g, double z);
/// sup |g|
double outer_bound(OuterFunction g);

/**
 * f(t,x,u) = -2a u + sin(a u + b u (1+|x|)^-s |cos t|).
 * omega_inf = 2a, omega0 = 0, alpha_inf = a, alpha0 = b (1+|x|)^-s |cos t|.
 */
Nonlinearity make_demo_nonlinearity(double a, double b_coeff, double s, double p, const GridPtr& grid,
                                   double period = 2.0 * 3.14159265358979323846);

/**
 * Time average fhat(x,u) = (1/T) int_0^T f(t,x,u) dt by composite Simpson
 * over `intervals` subintervals, rounded up to a multiple of 8 so that the
 * quarter-period points are nodes at every Richardson level.
 */
class AveragedProblem : public Reaction {
public:
    AveragedProblem(std::shared_ptr<const Nonlinearity> nl, int intervals);

    const GridPtr& grid() const override { return nl_->grid(); }
    double period() const override { return nl_->period(); }
    bool autonomous() const override { return true; }
    void evaluate(double t, std::span<const double> u, std::span<double> out) const override;
    void derivative(double t, std::span<const double> u, std::span<double> out) const override;

    double evaluate_point(std::size_t index, double u) const;

    const Field& omega_hat() const { return omega_hat_; }
    const Field& alpha_hat() const { return alpha_hat_; }
    /// Time averages of the bounded parts omega_inf, alpha_inf.
    const Field& omega_inf_hat() const { return omega_inf_hat_; }
    const Field& alpha_inf_hat() const { return alpha_inf_hat_; }
    const Nonlinearity& source() const { return *nl_; }
    int intervals() const { return intervals_; }
    /// Richardson estimate |I_n - I_{n/2}| / 15, max over the averaged potentials and sampled fhat values.
    double quadrature_error() const { return quadrature_error_; }
    /// The same estimate one level down (I_{n/2} against I_{n/4}); error ratio diagnostic.
    double coarse_quadrature_error() const { return coarse_quadrature_error_; }

private:
    std::shared_ptr<const Nonlinearity> nl_;
    int intervals_;
    std::vector<double> weights_;
    std::vector<double> nodes_;
    std::vector<double> source_avg_, linear_avg_;
    // inner coefficient per outer term per node; a single entry when time independent
    std::vector<std::vector<std::vector<double>>> inner_;
    Field omega_hat_, alpha_hat_, omega_inf_hat_, alpha_inf_hat_;
    double quadrature_error_ = 0.0;
    double coarse_quadrature_error_ = 0.0;
};

AveragedProblem average_f(const Nonlinearity& nl, int quadrature_points);

struct DissipativityReport {
    double max_violation = 0.0;
    double scale = 0.0;
    bool passes = false;
    double worst_t = 0.0, worst_u = 0.0, worst_v = 0.0;
    std::size_t worst_index = 0;
};

/// Samples (t, x_i, u, v) uniformly and reports max of
/// (f(u)-f(v))(u-v) + a|u-v|^2 - b(x)|u-v|^2. Passes iff max <= 1e-10 scale.
DissipativityReport dissipativity_check(const Nonlinearity& nl, int sample_count, double u_min, double u_max,
                                        std::uint64_t seed);

struct PeriodicityReport {
    double max_violation = 0.0;
    double scale = 0.0;
    bool passes = false;
};

/// max |f(t+T,x,u) - f(t,x,u)| over random samples; passes iff <= 1e-12 scale.
PeriodicityReport periodicity_check(const Nonlinearity& nl, int sample_count, double u_min, double u_max,
                                    std::uint64_t seed);

struct SlopeReport {
    double max_deviation = 0.0;
    bool passes = false;
};

/// Checks f(t,x,u)/u -> omega(t,x) at |u| = u_large (O(1/u_large) residue from
/// bounded terms is allowed).
SlopeReport slope_check_at_infinity(const Nonlinearity& nl, double u_large = 1e8);
/// Checks (f(t,x,eps) - f(t,x,0))/eps -> alpha(t,x).
SlopeReport slope_check_at_zero(const Nonlinearity& nl, double eps = 1e-6);

}  // namespace semiper
