#include "semiper/spectral.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace semiper {

SchrodingerOperator::SchrodingerOperator(GridPtr grid, Field potential)
    : grid_(std::move(grid)), potential_(std::move(potential)) {
    if (!grid_) throw std::invalid_argument("operator requires a grid");
    if (!potential_.grid() || !potential_.grid()->same_as(*grid_)) {
        throw std::invalid_argument("potential is sampled on a different grid");
    }
    if (!potential_.all_finite()) throw std::invalid_argument("potential has non-finite values");
}

void SchrodingerOperator::apply(std::span<const double> u, std::span<double> out) const {
    const std::size_t n = size();
    std::vector<double> c(n);
    grid_->raw_sine_transform(u, c);
    const auto mu = grid_->laplacian_eigenvalues();
    const double scale = grid_->forward_scale() * grid_->inverse_scale();
    for (std::size_t k = 0; k < n; ++k) c[k] *= scale * mu[k];
    grid_->raw_sine_transform(c, out);
    for (std::size_t i = 0; i < n; ++i) out[i] -= potential_[i] * u[i];
}

Field SchrodingerOperator::apply(const Field& u) const {
    if (!u.grid() || !u.grid()->same_as(*grid_)) throw std::invalid_argument("field is on a different grid");
    Field out(grid_);
    apply(u.values(), out.values());
    return out;
}

void SchrodingerOperator::precondition(std::span<const double> r, std::span<double> out, double sigma) const {
    const std::size_t n = size();
    std::vector<double> c(n);
    grid_->raw_sine_transform(r, c);
    const auto mu = grid_->laplacian_eigenvalues();
    const double scale = grid_->forward_scale() * grid_->inverse_scale();
    for (std::size_t k = 0; k < n; ++k) c[k] *= scale / (mu[k] + sigma);
    grid_->raw_sine_transform(c, out);
}

SchrodingerOperator assemble_operator(GridPtr grid, Field potential) {
    return SchrodingerOperator(std::move(grid), std::move(potential));
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

Field to_field(const GridPtr& g, const double* col) {
    Field f(g);
    const double s = 1.0 / std::sqrt(g->cell_volume());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = s * col[i];
    return f;
}

void apply_block(const SchrodingerOperator& op, const MatrixXd& x, MatrixXd& ax) {
    ax.resize(x.rows(), x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        op.apply(std::span<const double>(x.col(j).data(), x.rows()), std::span<double>(ax.col(j).data(), x.rows()));
    }
}

// Orthonormalizes the columns of `block` against `basis` (assumed orthonormal)
// and among themselves; columns that become negligible are dropped.
MatrixXd orthonormalize_against(const MatrixXd& basis, MatrixXd block) {
    std::vector<Eigen::Index> keep;
    for (Eigen::Index j = 0; j < block.cols(); ++j) {
        auto v = block.col(j);
        const double before = v.norm();
        if (before == 0.0) continue;
        for (int pass = 0; pass < 2; ++pass) {
            if (basis.cols() > 0) v -= basis * (basis.transpose() * v);
            for (Eigen::Index q : keep) v -= block.col(q) * block.col(q).dot(v);
        }
        const double after = v.norm();
        if (after <= 1e-10 * before) continue;
        v /= after;
        keep.push_back(j);
    }
    MatrixXd out(block.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t q = 0; q < keep.size(); ++q) out.col(static_cast<Eigen::Index>(q)) = block.col(keep[q]);
    return out;
}

}  // namespace

EigenResult eigen_dense(const SchrodingerOperator& op, bool want_vectors) {
    const auto& g = op.grid();
    if (g->dimension() != 1) throw SpectralError("dense diagonalization is only available in one dimension");
    const int m = g->points_per_axis();
    MatrixXd s(m, m);
    const double norm = std::sqrt(2.0 / (m + 1));
    for (int j = 0; j < m; ++j)
        for (int k = 0; k < m; ++k) s(j, k) = norm * std::sin(std::numbers::pi * (j + 1) * (k + 1) / (m + 1));
    const auto mu = g->axis_eigenvalues();
    VectorXd d(m);
    for (int k = 0; k < m; ++k) d(k) = mu[k];
    MatrixXd h = s * d.asDiagonal() * s;
    for (int i = 0; i < m; ++i) h(i, i) -= op.potential()[i];
    h = 0.5 * (h + h.transpose()).eval();

    Eigen::SelfAdjointEigenSolver<MatrixXd> es(h, want_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw SpectralError("dense eigensolver failed");
    EigenResult res;
    res.method = EigenMethod::Dense;
    res.values.assign(es.eigenvalues().data(), es.eigenvalues().data() + m);
    if (!want_vectors) return res;
    const MatrixXd& v = es.eigenvectors();
    MatrixXd av;
    apply_block(op, v, av);
    for (int j = 0; j < m; ++j) {
        res.residuals.push_back((av.col(j) - res.values[j] * v.col(j)).norm());
        res.vectors.push_back(to_field(g, v.col(j).data()));
    }
    return res;
}

EigenResult eigen_lobpcg(const SchrodingerOperator& op, int k, const EigenOptions& opts) {
    const auto n = static_cast<Eigen::Index>(op.size());
    if (k < 1) throw std::invalid_argument("eigen_lobpcg requires k >= 1");
    if (k > n / 3) throw std::invalid_argument("eigen_lobpcg requires k well below the problem size");
    const Eigen::Index m = std::min<Eigen::Index>(n / 3, k + std::max(2, k / 2));

    const auto& v = op.potential().values();
    double sigma = 1.0;
    for (double vi : v) sigma = std::max(sigma, 1.0 + std::abs(vi));

    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> dist;
    MatrixXd x(n, m);
    for (Eigen::Index j = 0; j < m; ++j)
        for (Eigen::Index i = 0; i < n; ++i) x(i, j) = dist(rng);
    x = orthonormalize_against(MatrixXd(n, 0), x);
    if (x.cols() < m) throw SpectralError("could not build an initial block");

    MatrixXd ax, p(n, 0);
    apply_block(op, x, ax);
    {
        MatrixXd h = x.transpose() * ax;
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (h + h.transpose()));
        x = x * es.eigenvectors();
        ax = ax * es.eigenvectors();
    }

    EigenResult res;
    res.method = EigenMethod::Lobpcg;
    VectorXd theta(m);
    for (int it = 0; it < opts.max_iterations; ++it) {
        for (Eigen::Index j = 0; j < m; ++j) theta(j) = x.col(j).dot(ax.col(j));
        MatrixXd r = ax - x * theta.asDiagonal();
        double worst = 0.0;
        for (Eigen::Index j = 0; j < k; ++j) worst = std::max(worst, r.col(j).norm());
        res.iterations = it;
        if (worst <= opts.tol) break;
        if (it + 1 == opts.max_iterations) {
            throw SpectralError("LOBPCG did not converge (residual " + std::to_string(worst) + ")");
        }

        MatrixXd w(n, m);
        for (Eigen::Index j = 0; j < m; ++j) {
            op.precondition(std::span<const double>(r.col(j).data(), n), std::span<double>(w.col(j).data(), n), sigma);
        }
        MatrixXd wp(n, w.cols() + p.cols());
        wp << w, p;
        MatrixXd extra = orthonormalize_against(x, wp);
        MatrixXd a_extra;
        apply_block(op, extra, a_extra);

        MatrixXd s(n, m + extra.cols()), as(n, m + extra.cols());
        s << x, extra;
        as << ax, a_extra;
        MatrixXd h = s.transpose() * as;
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (h + h.transpose()));
        if (es.info() != Eigen::Success) throw SpectralError("Rayleigh-Ritz step failed");
        const MatrixXd c = es.eigenvectors().leftCols(m);
        x = s * c;
        ax = as * c;
        // Search direction: the part of the update outside the old block.
        p = extra * c.bottomRows(extra.cols());
    }

    std::vector<Eigen::Index> order(m);
    for (Eigen::Index j = 0; j < m; ++j) order[j] = j;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return theta(a) < theta(b); });
    for (int j = 0; j < k; ++j) {
        const auto q = order[j];
        res.values.push_back(theta(q));
        res.residuals.push_back((ax.col(q) - theta(q) * x.col(q)).norm());
        if (opts.want_vectors) res.vectors.push_back(to_field(op.grid(), x.col(q).data()));
    }
    return res;
}

EigenResult eigen_lowest(const SchrodingerOperator& op, int k, const EigenOptions& opts) {
    if (k < 1) throw std::invalid_argument("eigen_lowest requires k >= 1");
    EigenMethod method = opts.method;
    if (method == EigenMethod::Auto) method = op.grid()->dimension() == 1 ? EigenMethod::Dense : EigenMethod::Lobpcg;
    if (method == EigenMethod::Lobpcg) return eigen_lobpcg(op, k, opts);
    auto res = eigen_dense(op, opts.want_vectors);
    const auto kk = std::min<std::size_t>(k, res.values.size());
    res.values.resize(kk);
    res.residuals.resize(kk);
    if (res.vectors.size() > kk) res.vectors.resize(kk);
    return res;
}

std::string to_string(PotentialTag tag) { return tag == PotentialTag::AtZero ? "at_zero" : "at_infinity"; }

SchrodingerReport analyze_potential(const GridPtr& grid, const Field& potential, double essential_lower_bound,
                                    PotentialTag tag, double gap_tol, const EigenOptions& opts) {
    SchrodingerReport rep;
    rep.tag = tag;
    rep.essential_lower_bound = essential_lower_bound;
    rep.gap_tol = gap_tol > 0.0 ? gap_tol : 1e-6 * (essential_lower_bound > 0.0 ? essential_lower_bound : 1.0);
    rep.margin = rep.gap_tol;
    const double cutoff = essential_lower_bound - rep.margin;

    const auto op = assemble_operator(grid, potential);
    EigenMethod method = opts.method;
    if (method == EigenMethod::Auto) method = grid->dimension() == 1 ? EigenMethod::Dense : EigenMethod::Lobpcg;
    rep.method = method;

    EigenResult res;
    if (method == EigenMethod::Dense) {
        res = eigen_dense(op, opts.want_vectors);
    } else {
        // Double k until the computed spectrum reaches past the cutoff.
        const int cap = static_cast<int>(grid->size() / 3);
        for (int k = std::min(8, cap);; k = std::min(2 * k, cap)) {
            res = eigen_lobpcg(op, k, opts);
            if (res.values.back() >= cutoff) break;
            if (k == cap) throw SpectralError("more localized eigenvalues than the block solver can resolve");
        }
    }
    for (std::size_t j = 0; j < res.values.size(); ++j) {
        if (res.values[j] < cutoff) {
            rep.eigenvalues.push_back(res.values[j]);
            if (j < res.vectors.size()) rep.eigenvectors.push_back(res.vectors[j]);
        } else {
            ++rep.discarded;
        }
    }
    rep.m_minus = static_cast<int>(
        std::count_if(rep.eigenvalues.begin(), rep.eigenvalues.end(), [&](double e) { return e < -rep.gap_tol; }));
    rep.kernel_gap = std::max(essential_lower_bound, 0.0);
    for (double e : rep.eigenvalues) rep.kernel_gap = std::min(rep.kernel_gap, std::abs(e));
    rep.kernel_condition = rep.kernel_gap > rep.gap_tol;
    rep.parity = rep.m_minus % 2 == 0 ? 1 : -1;
    return rep;
}

SchrodingerReport analyze(const AveragedProblem& avg, PotentialTag which, double gap_tol, const EigenOptions& opts) {
    const bool at_zero = which == PotentialTag::AtZero;
    if (at_zero && !avg.source().zero_preserving()) {
        throw std::invalid_argument("the linearization at zero requires f(t,x,0) = 0");
    }
    const Field& potential = at_zero ? avg.alpha_hat() : avg.omega_hat();
    const Field& bounded = at_zero ? avg.alpha_inf_hat() : avg.omega_inf_hat();
    const double ess = *std::min_element(bounded.values().begin(), bounded.values().end());
    return analyze_potential(avg.grid(), potential, ess, which, gap_tol, opts);
}

ParityResult parity_condition(const SchrodingerReport& at_zero, const SchrodingerReport& at_infinity) {
    for (const auto* r : {&at_zero, &at_infinity}) {
        if (!r->kernel_condition) {
            throw ResonanceError("kernel condition fails " + to_string(r->tag) + ": kernel gap " +
                                 std::to_string(r->kernel_gap) + " <= gap_tol " + std::to_string(r->gap_tol) +
                                 " (resonant; parity argument not applicable)");
        }
    }
    ParityResult pr;
    pr.m_minus_zero = at_zero.m_minus;
    pr.m_minus_infinity = at_infinity.m_minus;
    pr.kernel_gap_zero = at_zero.kernel_gap;
    pr.kernel_gap_infinity = at_infinity.kernel_gap;
    pr.holds = (at_zero.m_minus - at_infinity.m_minus) % 2 != 0;
    return pr;
}

}  // namespace semiper
