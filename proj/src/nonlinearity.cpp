#include "semiper/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace semiper {

std::string to_string(SpaceProfile p) {
    switch (p) {
        case SpaceProfile::Constant: return "const";
        case SpaceProfile::Decay: return "decay";
        case SpaceProfile::Gaussian: return "gaussian";
    }
    return "?";
}

std::string to_string(TimeProfile p) {
    switch (p) {
        case TimeProfile::Constant: return "const";
        case TimeProfile::AbsCos: return "abs_cos";
        case TimeProfile::Cos: return "cos";
        case TimeProfile::Sin: return "sin";
    }
    return "?";
}

std::string to_string(OuterFunction g) {
    switch (g) {
        case OuterFunction::Sin: return "sin";
        case OuterFunction::Tanh: return "tanh";
        case OuterFunction::Atan: return "atan";
    }
    return "?";
}

SpaceProfile space_profile_from_string(const std::string& s) {
    if (s == "const") return SpaceProfile::Constant;
    if (s == "decay") return SpaceProfile::Decay;
    if (s == "gaussian") return SpaceProfile::Gaussian;
    throw NonlinearityError("unknown space profile '" + s + "' (expected const, decay or gaussian)");
}

TimeProfile time_profile_from_string(const std::string& s) {
    if (s == "const") return TimeProfile::Constant;
    if (s == "abs_cos") return TimeProfile::AbsCos;
    if (s == "cos") return TimeProfile::Cos;
    if (s == "sin") return TimeProfile::Sin;
    throw NonlinearityError("unknown time profile '" + s + "' (expected const, abs_cos, cos or sin)");
}

OuterFunction outer_function_from_string(const std::string& s) {
    if (s == "sin") return OuterFunction::Sin;
    if (s == "tanh") return OuterFunction::Tanh;
    if (s == "atan") return OuterFunction::Atan;
    throw NonlinearityError("unknown outer function '" + s + "' (expected sin, tanh or atan)");
}

double Term::space_factor(double r) const {
    switch (space) {
        case SpaceProfile::Constant: return 1.0;
        case SpaceProfile::Decay: return std::pow(1.0 + r, -space_param);
        case SpaceProfile::Gaussian: return std::exp(-r * r / (2.0 * space_param * space_param));
    }
    return 0.0;
}

double Term::time_factor(double t) const {
    switch (time) {
        case TimeProfile::Constant: return 1.0;
        case TimeProfile::AbsCos: return std::abs(std::cos(frequency * t));
        case TimeProfile::Cos: return std::cos(frequency * t);
        case TimeProfile::Sin: return std::sin(frequency * t);
    }
    return 0.0;
}

double outer_value(OuterFunction g, double z) {
    switch (g) {
        case OuterFunction::Sin: return std::sin(z);
        case OuterFunction::Tanh: return std::tanh(z);
        case OuterFunction::Atan: return std::atan(z);
    }
    return 0.0;
}

double outer_slope(OuterFunction g, double z) {
    switch (g) {
        case OuterFunction::Sin: return std::cos(z);
        case OuterFunction::Tanh: {
            const double c = std::cosh(z);
            return 1.0 / (c * c);
        }
        case OuterFunction::Atan: return 1.0 / (1.0 + z * z);
    }
    return 0.0;
}

double outer_bound(OuterFunction g) {
    switch (g) {
        case OuterFunction::Sin: return 1.0;
        case OuterFunction::Tanh: return 1.0;
        case OuterFunction::Atan: return std::numbers::pi / 2.0;
    }
    return 0.0;
}

namespace {

// Every outer function has g'(0) = 1 and Lipschitz constant 1.
constexpr double kOuterSlopeAtZero = 1.0;
constexpr double kOuterLipschitz = 1.0;

void validate_coefficient(const Coefficient& c, int dim, double p, const char* what) {
    for (const auto& term : c) {
        if (!std::isfinite(term.coeff)) throw NonlinearityError(std::string(what) + ": non-finite coefficient");
        if (!std::isfinite(term.frequency)) throw NonlinearityError(std::string(what) + ": non-finite frequency");
        if (term.space == SpaceProfile::Decay && !(term.space_param * p > dim)) {
            throw NonlinearityError(std::string(what) + ": decay exponent s must satisfy s > N/p (s=" +
                                    std::to_string(term.space_param) + ")");
        }
        if (term.space == SpaceProfile::Gaussian && !(term.space_param > 0.0)) {
            throw NonlinearityError(std::string(what) + ": gaussian width must be positive");
        }
    }
}

std::vector<std::vector<double>> sample_profiles(const Coefficient& c, const SpatialGrid& g) {
    std::vector<std::vector<double>> out;
    out.reserve(c.size());
    const auto r = g.radius();
    for (const auto& term : c) {
        std::vector<double> phi(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) phi[i] = term.space_factor(r[i]);
        out.push_back(std::move(phi));
    }
    return out;
}

bool time_independent(const Coefficient& c) {
    return std::all_of(c.begin(), c.end(), [](const Term& t) { return t.time_independent(); });
}

double sample_time(double period, int j) { return period * j / (kPeriodSamples - 1); }

}  // namespace

Nonlinearity::Nonlinearity(GridPtr grid, double period, CompositionTree tree, double p)
    : grid_(std::move(grid)), period_(period), tree_(std::move(tree)), p_(p) {
    if (!grid_) throw NonlinearityError("nonlinearity requires a grid");
    if (!(period_ > 0.0) || !std::isfinite(period_)) throw NonlinearityError("period must be positive and finite");
    const int n = grid_->dimension();
    if (!(p_ >= n) || !std::isfinite(p_)) {
        throw NonlinearityError("integrability exponent p must satisfy N <= p < inf");
    }
    validate_coefficient(tree_.source, n, 2.0, "source");
    validate_coefficient(tree_.linear, n, p_, "linear");
    for (const auto& o : tree_.outer) validate_coefficient(o.inner, n, p_, "outer");

    source_phi_ = sample_profiles(tree_.source, *grid_);
    linear_phi_ = sample_profiles(tree_.linear, *grid_);
    for (const auto& o : tree_.outer) outer_phi_.push_back(sample_profiles(o.inner, *grid_));
    derive_structure();
}

void Nonlinearity::coefficient_at(const Coefficient& c, const std::vector<std::vector<double>>& phi, double t,
                                  std::vector<double>& out, Part part) const {
    out.assign(grid_->size(), 0.0);
    for (std::size_t k = 0; k < c.size(); ++k) {
        const auto& term = c[k];
        if (part == Part::Integrable && !term.integrable()) continue;
        if (part == Part::Bounded && term.integrable()) continue;
        const double s = term.coeff * term.time_factor(t);
        if (s == 0.0) continue;
        const auto& ph = phi[k];
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += s * ph[i];
    }
}

void Nonlinearity::derive_structure() {
    // a = -max_{t,x} (V_bnd + L sum |W_bnd|);  b(x) = max_t (V + L sum |W| + a)_+
    const int samples = 4 * (kPeriodSamples - 1) + 1;
    const std::size_t n = grid_->size();
    std::vector<double> v, w, bound_part(n), full(n);
    double worst_bounded = -std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> full_by_time;
    for (int j = 0; j < samples; ++j) {
        const double t = period_ * j / (samples - 1);
        coefficient_at(tree_.linear, linear_phi_, t, v, Part::Bounded);
        bound_part = v;
        coefficient_at(tree_.linear, linear_phi_, t, v, Part::All);
        full = v;
        for (std::size_t o = 0; o < tree_.outer.size(); ++o) {
            coefficient_at(tree_.outer[o].inner, outer_phi_[o], t, w, Part::Bounded);
            for (std::size_t i = 0; i < n; ++i) bound_part[i] += kOuterLipschitz * std::abs(w[i]);
            coefficient_at(tree_.outer[o].inner, outer_phi_[o], t, w, Part::All);
            for (std::size_t i = 0; i < n; ++i) full[i] += kOuterLipschitz * std::abs(w[i]);
        }
        worst_bounded = std::max(worst_bounded, *std::max_element(bound_part.begin(), bound_part.end()));
        full_by_time.push_back(full);
    }
    rate_ = -worst_bounded;
    perturbation_ = Field(grid_);
    for (const auto& f : full_by_time) {
        for (std::size_t i = 0; i < n; ++i) perturbation_[i] = std::max(perturbation_[i], f[i] + rate_);
    }
    declared_ = false;

    omega_inf_min_ = std::numeric_limits<double>::infinity();
    alpha_inf_min_ = std::numeric_limits<double>::infinity();
    for (int j = 0; j < kPeriodSamples; ++j) {
        const double t = sample_time(period_, j);
        const auto wi = omega_inf(t);
        const auto ai = alpha_inf(t);
        omega_inf_min_ = std::min(omega_inf_min_, *std::min_element(wi.values().begin(), wi.values().end()));
        alpha_inf_min_ = std::min(alpha_inf_min_, *std::min_element(ai.values().begin(), ai.values().end()));
    }
}

bool Nonlinearity::autonomous() const {
    if (!time_independent(tree_.source) || !time_independent(tree_.linear)) return false;
    for (const auto& o : tree_.outer)
        if (!time_independent(o.inner)) return false;
    return true;
}

bool Nonlinearity::zero_preserving() const {
    return std::all_of(tree_.source.begin(), tree_.source.end(), [](const Term& t) { return t.coeff == 0.0; });
}

bool Nonlinearity::omega_time_independent() const { return time_independent(tree_.linear); }

bool Nonlinearity::alpha_time_independent() const {
    if (!time_independent(tree_.linear)) return false;
    for (const auto& o : tree_.outer)
        if (!time_independent(o.inner)) return false;
    return true;
}

void Nonlinearity::evaluate(double t, std::span<const double> u, std::span<double> out) const {
    const std::size_t n = grid_->size();
    std::vector<double> src, lin, w;
    coefficient_at(tree_.source, source_phi_, t, src);
    coefficient_at(tree_.linear, linear_phi_, t, lin);
    for (std::size_t i = 0; i < n; ++i) out[i] = src[i] + lin[i] * u[i];
    for (std::size_t o = 0; o < tree_.outer.size(); ++o) {
        coefficient_at(tree_.outer[o].inner, outer_phi_[o], t, w);
        const auto g = tree_.outer[o].function;
        for (std::size_t i = 0; i < n; ++i) out[i] += outer_value(g, w[i] * u[i]);
    }
}

void Nonlinearity::derivative(double t, std::span<const double> u, std::span<double> out) const {
    const std::size_t n = grid_->size();
    std::vector<double> lin, w;
    coefficient_at(tree_.linear, linear_phi_, t, lin);
    for (std::size_t i = 0; i < n; ++i) out[i] = lin[i];
    for (std::size_t o = 0; o < tree_.outer.size(); ++o) {
        coefficient_at(tree_.outer[o].inner, outer_phi_[o], t, w);
        const auto g = tree_.outer[o].function;
        for (std::size_t i = 0; i < n; ++i) out[i] += outer_slope(g, w[i] * u[i]) * w[i];
    }
}

double Nonlinearity::evaluate_point(double t, std::size_t index, double u) const {
    double val = 0.0;
    for (std::size_t k = 0; k < tree_.source.size(); ++k)
        val += tree_.source[k].coeff * tree_.source[k].time_factor(t) * source_phi_[k][index];
    double v = 0.0;
    for (std::size_t k = 0; k < tree_.linear.size(); ++k)
        v += tree_.linear[k].coeff * tree_.linear[k].time_factor(t) * linear_phi_[k][index];
    val += v * u;
    for (std::size_t o = 0; o < tree_.outer.size(); ++o) {
        double w = 0.0;
        const auto& inner = tree_.outer[o].inner;
        for (std::size_t k = 0; k < inner.size(); ++k)
            w += inner[k].coeff * inner[k].time_factor(t) * outer_phi_[o][k][index];
        val += outer_value(tree_.outer[o].function, w * u);
    }
    return val;
}

Field Nonlinearity::omega0(double t) const {
    std::vector<double> v;
    coefficient_at(tree_.linear, linear_phi_, t, v, Part::Integrable);
    return Field(grid_, std::move(v));
}

Field Nonlinearity::omega_inf(double t) const {
    std::vector<double> v;
    coefficient_at(tree_.linear, linear_phi_, t, v, Part::Bounded);
    Field out(grid_, std::move(v));
    out *= -1.0;
    return out;
}

Field Nonlinearity::alpha0(double t) const {
    std::vector<double> v, w;
    coefficient_at(tree_.linear, linear_phi_, t, v, Part::Integrable);
    for (std::size_t o = 0; o < tree_.outer.size(); ++o) {
        coefficient_at(tree_.outer[o].inner, outer_phi_[o], t, w, Part::Integrable);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] += kOuterSlopeAtZero * w[i];
    }
    return Field(grid_, std::move(v));
}

Field Nonlinearity::alpha_inf(double t) const {
    std::vector<double> v, w;
    coefficient_at(tree_.linear, linear_phi_, t, v, Part::Bounded);
    for (std::size_t o = 0; o < tree_.outer.size(); ++o) {
        coefficient_at(tree_.outer[o].inner, outer_phi_[o], t, w, Part::Bounded);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] += kOuterSlopeAtZero * w[i];
    }
    Field out(grid_, std::move(v));
    out *= -1.0;
    return out;
}

Nonlinearity Nonlinearity::with_dissipativity(double rate, Field perturbation) const {
    if (!perturbation.grid() || !perturbation.grid()->same_as(*grid_)) {
        throw NonlinearityError("dissipativity perturbation must live on the nonlinearity's grid");
    }
    Nonlinearity out = *this;
    out.rate_ = rate;
    out.perturbation_ = std::move(perturbation);
    out.declared_ = true;
    return out;
}

Nonlinearity operator+(const Nonlinearity& a, const Nonlinearity& b) {
    if (!a.grid_->same_as(*b.grid_)) throw NonlinearityError("cannot add nonlinearities on different grids");
    if (a.period_ != b.period_) throw NonlinearityError("cannot add nonlinearities with different periods");
    CompositionTree tree = a.tree_;
    tree.source.insert(tree.source.end(), b.tree_.source.begin(), b.tree_.source.end());
    tree.linear.insert(tree.linear.end(), b.tree_.linear.begin(), b.tree_.linear.end());
    tree.outer.insert(tree.outer.end(), b.tree_.outer.begin(), b.tree_.outer.end());
    return Nonlinearity(a.grid_, a.period_, std::move(tree), std::max(a.p_, b.p_));
}

Nonlinearity make_demo_nonlinearity(double a, double b_coeff, double s, double p, const GridPtr& grid,
                                   double period) {
    if (!(a > 0.0)) throw NonlinearityError("demo nonlinearity requires a > 0");
    if (!(b_coeff >= 0.0)) throw NonlinearityError("demo nonlinearity requires b_coeff >= 0");
    if (!(p >= grid->dimension())) throw NonlinearityError("demo nonlinearity requires p >= N");
    if (!(s > grid->dimension() / p)) {
        throw NonlinearityError("demo nonlinearity requires s > N/p (s=" + std::to_string(s) +
                                ", N/p=" + std::to_string(grid->dimension() / p) + ")");
    }
    CompositionTree tree;
    tree.linear.push_back(Term{-2.0 * a});
    OuterTerm outer;
    outer.function = OuterFunction::Sin;
    outer.inner.push_back(Term{a});
    outer.inner.push_back(Term{b_coeff, SpaceProfile::Decay, s, TimeProfile::AbsCos, 1.0});
    tree.outer.push_back(std::move(outer));
    return Nonlinearity(grid, period, std::move(tree), p);
}

// ---------------------------------------------------------------------------

namespace {

std::vector<double> simpson_weights(int intervals, int stride) {
    // Weights (divided by T) on nodes 0..intervals, using every `stride`-th node.
    const int n = intervals / stride;
    std::vector<double> w(intervals + 1, 0.0);
    for (int j = 0; j <= n; ++j) {
        const double c = (j == 0 || j == n) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
        w[j * stride] = c / (3.0 * n);
    }
    return w;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

AveragedProblem::AveragedProblem(std::shared_ptr<const Nonlinearity> nl, int intervals) : nl_(std::move(nl)) {
    if (!nl_) throw NonlinearityError("averaging requires a nonlinearity");
    if (intervals < 16) throw NonlinearityError("average_f requires at least 16 quadrature points");
    intervals_ = (intervals + 7) / 8 * 8;
    const double period = nl_->period();
    const std::size_t n = nl_->grid()->size();
    const auto& tree = nl_->tree();

    nodes_.resize(intervals_ + 1);
    for (int q = 0; q <= intervals_; ++q) nodes_[q] = period * q / intervals_;
    weights_ = simpson_weights(intervals_, 1);
    const auto w2 = simpson_weights(intervals_, 2);
    const auto w4 = simpson_weights(intervals_, 4);

    // Per-node samples of everything linear in the coefficients.
    std::vector<double> buf;
    std::vector<std::vector<double>> omega_nodes, alpha_nodes;
    std::vector<double> omega_inf_avg(n, 0.0), alpha_inf_avg(n, 0.0);
    source_avg_.assign(n, 0.0);
    linear_avg_.assign(n, 0.0);
    for (int q = 0; q <= intervals_; ++q) {
        const double t = nodes_[q];
        nl_->coefficient_at(tree.source, nl_->source_phi_, t, buf);
        for (std::size_t i = 0; i < n; ++i) source_avg_[i] += weights_[q] * buf[i];
        nl_->coefficient_at(tree.linear, nl_->linear_phi_, t, buf);
        for (std::size_t i = 0; i < n; ++i) linear_avg_[i] += weights_[q] * buf[i];
        const auto om = nl_->omega(t);
        const auto al = nl_->alpha(t);
        omega_nodes.emplace_back(om.values().begin(), om.values().end());
        const auto oi = nl_->omega_inf(t);
        const auto ai = nl_->alpha_inf(t);
        for (std::size_t i = 0; i < n; ++i) {
            omega_inf_avg[i] += weights_[q] * oi[i];
            alpha_inf_avg[i] += weights_[q] * ai[i];
        }
        alpha_nodes.emplace_back(al.values().begin(), al.values().end());
    }

    inner_.resize(tree.outer.size());
    for (std::size_t o = 0; o < tree.outer.size(); ++o) {
        const bool constant = time_independent(tree.outer[o].inner);
        const int count = constant ? 1 : intervals_ + 1;
        for (int q = 0; q < count; ++q) {
            nl_->coefficient_at(tree.outer[o].inner, nl_->outer_phi_[o], nodes_[q], buf);
            inner_[o].push_back(buf);
        }
    }

    const auto average = [&](const std::vector<std::vector<double>>& samples, const std::vector<double>& w) {
        std::vector<double> acc(n, 0.0);
        for (std::size_t q = 0; q < samples.size(); ++q) {
            if (w[q] == 0.0) continue;
            for (std::size_t i = 0; i < n; ++i) acc[i] += w[q] * samples[q][i];
        }
        return acc;
    };

    auto om1 = average(omega_nodes, weights_), om2 = average(omega_nodes, w2), om4 = average(omega_nodes, w4);
    auto al1 = average(alpha_nodes, weights_), al2 = average(alpha_nodes, w2), al4 = average(alpha_nodes, w4);
    double fine = std::max(max_abs_diff(om1, om2), max_abs_diff(al1, al2));
    double coarse = std::max(max_abs_diff(om2, om4), max_abs_diff(al2, al4));

    // Sampled fhat values at a few amplitudes.
    for (double amp : {-2.0, -0.5, 0.5, 2.0}) {
        std::vector<std::vector<double>> f_nodes;
        std::vector<double> u(n, amp), f(n);
        for (int q = 0; q <= intervals_; ++q) {
            nl_->evaluate(nodes_[q], u, f);
            f_nodes.push_back(f);
        }
        auto f1 = average(f_nodes, weights_), f2 = average(f_nodes, w2), f4 = average(f_nodes, w4);
        for (std::size_t i = 0; i < n; ++i) {
            if (!std::isfinite(f1[i])) throw NonlinearityError("non-finite integrand while averaging f");
        }
        fine = std::max(fine, max_abs_diff(f1, f2));
        coarse = std::max(coarse, max_abs_diff(f2, f4));
    }
    quadrature_error_ = fine / 15.0;
    coarse_quadrature_error_ = coarse / 15.0;

    omega_hat_ = Field(nl_->grid(), std::move(om1));
    alpha_hat_ = Field(nl_->grid(), std::move(al1));
    omega_inf_hat_ = Field(nl_->grid(), std::move(omega_inf_avg));
    alpha_inf_hat_ = Field(nl_->grid(), std::move(alpha_inf_avg));
}

void AveragedProblem::evaluate(double, std::span<const double> u, std::span<double> out) const {
    const std::size_t n = u.size();
    for (std::size_t i = 0; i < n; ++i) out[i] = source_avg_[i] + linear_avg_[i] * u[i];
    const auto& tree = nl_->tree();
    for (std::size_t o = 0; o < tree.outer.size(); ++o) {
        const auto g = tree.outer[o].function;
        if (inner_[o].size() == 1) {
            const auto& w = inner_[o][0];
            for (std::size_t i = 0; i < n; ++i) out[i] += outer_value(g, w[i] * u[i]);
            continue;
        }
        for (std::size_t q = 0; q < inner_[o].size(); ++q) {
            const double wq = weights_[q];
            const auto& w = inner_[o][q];
            for (std::size_t i = 0; i < n; ++i) out[i] += wq * outer_value(g, w[i] * u[i]);
        }
    }
}

void AveragedProblem::derivative(double, std::span<const double> u, std::span<double> out) const {
    const std::size_t n = u.size();
    for (std::size_t i = 0; i < n; ++i) out[i] = linear_avg_[i];
    const auto& tree = nl_->tree();
    for (std::size_t o = 0; o < tree.outer.size(); ++o) {
        const auto g = tree.outer[o].function;
        const bool constant = inner_[o].size() == 1;
        for (std::size_t q = 0; q < inner_[o].size(); ++q) {
            const double wq = constant ? 1.0 : weights_[q];
            const auto& w = inner_[o][q];
            for (std::size_t i = 0; i < n; ++i) out[i] += wq * outer_slope(g, w[i] * u[i]) * w[i];
        }
    }
}

double AveragedProblem::evaluate_point(std::size_t index, double u) const {
    double val = source_avg_[index] + linear_avg_[index] * u;
    const auto& tree = nl_->tree();
    for (std::size_t o = 0; o < tree.outer.size(); ++o) {
        const auto g = tree.outer[o].function;
        if (inner_[o].size() == 1) {
            val += outer_value(g, inner_[o][0][index] * u);
            continue;
        }
        for (std::size_t q = 0; q < inner_[o].size(); ++q) val += weights_[q] * outer_value(g, inner_[o][q][index] * u);
    }
    return val;
}

AveragedProblem average_f(const Nonlinearity& nl, int quadrature_points) {
    return AveragedProblem(std::make_shared<const Nonlinearity>(nl), quadrature_points);
}

// ---------------------------------------------------------------------------

DissipativityReport dissipativity_check(const Nonlinearity& nl, int sample_count, double u_min, double u_max,
                                        std::uint64_t seed) {
    if (sample_count < 1000) throw NonlinearityError("dissipativity_check requires at least 1000 samples");
    if (!(u_max > u_min)) throw NonlinearityError("dissipativity_check requires a nonempty u range");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ut(0.0, nl.period());
    std::uniform_real_distribution<double> uu(u_min, u_max);
    std::uniform_int_distribution<std::size_t> ui(0, nl.grid()->size() - 1);
    const double a = nl.dissipativity_rate();
    const auto& b = nl.dissipativity_perturbation();

    DissipativityReport rep;
    rep.max_violation = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < sample_count; ++s) {
        const double t = ut(rng);
        const std::size_t i = ui(rng);
        const double u = uu(rng);
        const double v = uu(rng);
        const double d = u - v;
        const double df = nl.evaluate_point(t, i, u) - nl.evaluate_point(t, i, v);
        const double violation = df * d + a * d * d - b[i] * d * d;
        rep.scale = std::max(rep.scale, std::abs(df * d) + (std::abs(a) + std::abs(b[i])) * d * d);
        if (violation > rep.max_violation) {
            rep.max_violation = violation;
            rep.worst_t = t;
            rep.worst_u = u;
            rep.worst_v = v;
            rep.worst_index = i;
        }
    }
    rep.passes = rep.max_violation <= 1e-10 * rep.scale;
    return rep;
}

PeriodicityReport periodicity_check(const Nonlinearity& nl, int sample_count, double u_min, double u_max,
                                    std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const double period = nl.period();
    std::uniform_real_distribution<double> ut(0.0, 4.0 * period);
    std::uniform_real_distribution<double> uu(u_min, u_max);
    std::uniform_int_distribution<std::size_t> ui(0, nl.grid()->size() - 1);
    PeriodicityReport rep;
    for (int s = 0; s < sample_count; ++s) {
        const double t = ut(rng);
        const std::size_t i = ui(rng);
        const double u = uu(rng);
        const double f0 = nl.evaluate_point(t, i, u);
        const double f1 = nl.evaluate_point(t + period, i, u);
        rep.max_violation = std::max(rep.max_violation, std::abs(f1 - f0));
        rep.scale = std::max(rep.scale, std::max(std::abs(f0), std::abs(f1)));
    }
    rep.passes = rep.max_violation <= 1e-12 * std::max(rep.scale, 1e-300);
    return rep;
}

SlopeReport slope_check_at_infinity(const Nonlinearity& nl, double u_large) {
    SlopeReport rep;
    const std::size_t n = nl.grid()->size();
    for (int j = 0; j < kPeriodSamples; ++j) {
        const double t = sample_time(nl.period(), j);
        const auto om = nl.omega(t);
        for (std::size_t i = 0; i < n; ++i) {
            for (double u : {u_large, -u_large}) {
                const double dev = std::abs(nl.evaluate_point(t, i, u) / u - om[i]);
                rep.max_deviation = std::max(rep.max_deviation, dev);
            }
        }
    }
    rep.passes = rep.max_deviation <= 1e-6;
    return rep;
}

SlopeReport slope_check_at_zero(const Nonlinearity& nl, double eps) {
    SlopeReport rep;
    const std::size_t n = nl.grid()->size();
    for (int j = 0; j < kPeriodSamples; ++j) {
        const double t = sample_time(nl.period(), j);
        const auto al = nl.alpha(t);
        for (std::size_t i = 0; i < n; ++i) {
            const double f0 = nl.evaluate_point(t, i, 0.0);
            const double dev = std::abs((nl.evaluate_point(t, i, eps) - f0) / eps - al[i]);
            rep.max_deviation = std::max(rep.max_deviation, dev);
        }
    }
    rep.passes = rep.max_deviation <= 1e-6;
    return rep;
}

}  // namespace semiper
