#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "semiper/field.hpp"
#include "semiper/nonlinearity.hpp"

namespace semiper {

class SpectralError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thrown by parity_condition when a kernel condition fails.
class ResonanceError : public SpectralError {
public:
    using SpectralError::SpectralError;
};

/// Matrix-free u -> -Delta u - V u.
class SchrodingerOperator {
public:
    SchrodingerOperator(GridPtr grid, Field potential);

    const GridPtr& grid() const { return grid_; }
    const Field& potential() const { return potential_; }
    std::size_t size() const { return grid_->size(); }

    void apply(std::span<const double> u, std::span<double> out) const;
    Field apply(const Field& u) const;

    /// out = (-Delta + sigma)^{-1} r
    void precondition(std::span<const double> r, std::span<double> out, double sigma) const;

private:
    GridPtr grid_;
    Field potential_;
};

SchrodingerOperator assemble_operator(GridPtr grid, Field potential);

enum class EigenMethod { Auto, Dense, Lobpcg };

struct EigenOptions {
    EigenMethod method = EigenMethod::Auto;
    double tol = 1e-8;
    int max_iterations = 2000;
    bool want_vectors = false;
    std::uint64_t seed = 20240611;
};

struct EigenResult {
    std::vector<double> values;  // ascending
    std::vector<Field> vectors;  // unit L2 norm, filled when requested
    std::vector<double> residuals;  // ||A psi - lambda psi|| for unit psi; dense fills these only with vectors
    int iterations = 0;
    EigenMethod method = EigenMethod::Dense;
};

/// The k smallest eigenvalues. Dense works only in one dimension; Auto picks
/// Dense for N = 1 and LOBPCG otherwise.
EigenResult eigen_lowest(const SchrodingerOperator& op, int k, const EigenOptions& opts = {});

/// Full dense spectrum for N = 1 from S diag(mu) S - diag(V), S the orthogonal sine matrix.
EigenResult eigen_dense(const SchrodingerOperator& op, bool want_vectors = false);

/// Block preconditioned conjugate gradient with (-Delta + sigma)^{-1} as preconditioner.
EigenResult eigen_lobpcg(const SchrodingerOperator& op, int k, const EigenOptions& opts = {});

enum class PotentialTag { AtZero, AtInfinity };
std::string to_string(PotentialTag tag);

struct SchrodingerReport {
    PotentialTag tag = PotentialTag::AtInfinity;
    std::vector<double> eigenvalues;  // localized ones, below essential_lower_bound - margin
    int m_minus = 0;
    double kernel_gap = 0.0;
    double essential_lower_bound = 0.0;
    double gap_tol = 0.0;
    double margin = 0.0;
    int parity = 1;
    bool kernel_condition = false;
    int discarded = 0;  // computed box modes above the cutoff
    EigenMethod method = EigenMethod::Dense;
    std::vector<Field> eigenvectors;
};

/// gap_tol <= 0 selects the default 1e-6 * essential bound (1e-6 when the bound is not positive).
SchrodingerReport analyze_potential(const GridPtr& grid, const Field& potential, double essential_lower_bound,
                                    PotentialTag tag, double gap_tol = 0.0, const EigenOptions& opts = {});

/// -Delta - alpha_hat (AtZero) or -Delta - omega_hat (AtInfinity) of an averaged problem.
SchrodingerReport analyze(const AveragedProblem& avg, PotentialTag which, double gap_tol = 0.0,
                          const EigenOptions& opts = {});

struct ParityResult {
    bool holds = false;
    int m_minus_zero = 0;
    int m_minus_infinity = 0;
    double kernel_gap_zero = 0.0;
    double kernel_gap_infinity = 0.0;
};

/// Parity test: holds iff m_minus at zero and at infinity differ mod 2.
ParityResult parity_condition(const SchrodingerReport& at_zero, const SchrodingerReport& at_infinity);

}  // namespace semiper
