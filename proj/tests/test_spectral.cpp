#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "semiper/spectral.hpp"

using namespace semiper;

namespace {

constexpr double kPi = std::numbers::pi;

Field random_field(const GridPtr& g, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d;
    Field u(g);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = d(rng);
    return u;
}

// V0 times the fraction of the cell around x_i that lies inside [-w, w].
Field square_well(const GridPtr& g, double depth, double w) {
    const double h = g->spacing();
    return Field::from_function(g, [=](std::span<const double> x) {
        const double lo = std::max(x[0] - h / 2, -w), hi = std::min(x[0] + h / 2, w);
        return depth * std::max(0.0, hi - lo) / h;
    });
}

double bisect(const std::function<double(double)>& f, double lo, double hi) {
    double flo = f(lo);
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// Bound-state energies of -u'' - V0 1_{|x|<w} u = E u on the line, from the
// even (z tan z = sqrt(z0^2 - z^2)) and odd (-z cot z = sqrt(z0^2 - z^2)) conditions, z = k w.
std::vector<double> square_well_energies(double depth, double w) {
    const double z0 = w * std::sqrt(depth);
    auto rhs = [&](double z) { return std::sqrt(std::max(0.0, z0 * z0 - z * z)); };
    std::vector<double> energies;
    for (int n = 0; n * kPi / 2 < z0; ++n) {
        const double lo = n * kPi / 2 + 1e-12;
        const double hi = std::min((n + 1) * kPi / 2 - 1e-12, z0);
        std::function<double(double)> g;
        if (n % 2 == 0) {
            g = [&](double z) { return z * std::sin(z) - rhs(z) * std::cos(z); };
        } else {
            g = [&](double z) { return -z * std::cos(z) - rhs(z) * std::sin(z); };
        }
        if (g(lo) * g(hi) > 0) continue;
        const double z = bisect(g, lo, hi);
        energies.push_back(-(z0 * z0 - z * z) / (w * w));
    }
    std::sort(energies.begin(), energies.end());
    return energies;
}

Field decaying_potential(const GridPtr& g, double c, double shift) {
    auto r = g->radius();
    Field v(g);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = c * std::pow(1 + r[i], -2.0) - shift;
    return v;
}

}  // namespace

TEST_CASE("operator basics") {
    auto g = make_grid(2, 3.0, 16);
    const int k[] = {2, 5};
    auto mode = sine_mode(g, k);
    const double mu = g->laplacian_eigenvalues()[g->flatten(std::vector<int>{1, 4})];

    auto free_op = assemble_operator(g, Field(g));
    CHECK(norm_l2(free_op.apply(mode) - mu * mode) <= 1e-12 * mu);

    Field c(g, std::vector<double>(g->size(), 0.7));
    auto shifted = assemble_operator(g, c);
    CHECK(norm_l2(shifted.apply(mode) - (mu - 0.7) * mode) <= 1e-12 * mu);

    auto op = assemble_operator(g, decaying_potential(g, 3.0, 0.5));
    for (std::uint64_t s = 0; s < 5; ++s) {
        auto u = random_field(g, 2 * s), v = random_field(g, 2 * s + 1);
        const double a = inner_product(op.apply(u), v), b = inner_product(u, op.apply(v));
        CHECK(std::abs(a - b) <= 1e-10 * std::abs(a));
    }
    CHECK_THROWS(assemble_operator(g, Field(make_grid(2, 3.0, 17))));
}

TEST_CASE("free Laplacian spectrum") {
    SUBCASE("one dimension, dense and block solver") {
        auto g = make_grid(1, 4.0, 64);
        auto op = assemble_operator(g, Field(g));
        auto mu = g->laplacian_eigenvalues();
        for (auto m : {EigenMethod::Dense, EigenMethod::Lobpcg}) {
            EigenOptions o;
            o.method = m;
            auto res = eigen_lowest(op, 5, o);
            REQUIRE(res.values.size() == 5);
            for (int j = 0; j < 5; ++j) CHECK(res.values[j] == doctest::Approx(mu[j]).epsilon(1e-10));
        }
    }
    SUBCASE("two dimensions") {
        auto g = make_grid(2, 4.0, 24);
        auto op = assemble_operator(g, Field(g));
        std::vector<double> mu(g->laplacian_eigenvalues().begin(), g->laplacian_eigenvalues().end());
        std::sort(mu.begin(), mu.end());
        auto res = eigen_lowest(op, 6);
        CHECK(res.method == EigenMethod::Lobpcg);
        for (int j = 0; j < 6; ++j) CHECK(res.values[j] == doctest::Approx(mu[j]).epsilon(1e-10));
        for (double r : res.residuals) CHECK(r <= 1e-8);
    }
}

TEST_CASE("block solver agrees with dense diagonalization in 1-D") {
    for (auto [L, M] : {std::pair{10.0, 256}, std::pair{16.0, 512}}) {
        auto g = make_grid(1, L, M);
        for (double c : {2.0, 6.0, 15.0}) {
            auto op = assemble_operator(g, decaying_potential(g, c, 1.0));
            auto dense = eigen_dense(op, true);
            EigenOptions o;
            o.method = EigenMethod::Lobpcg;
            auto krylov = eigen_lowest(op, 6, o);
            for (int j = 0; j < 6; ++j) CHECK(std::abs(krylov.values[j] - dense.values[j]) <= 1e-8);
            for (int j = 0; j < 6; ++j) CHECK(dense.residuals[j] <= 1e-9);
        }
    }
}

TEST_CASE("finite square well bound states match the transcendental equations") {
    auto g = make_grid(1, 20.0, 1023);
    const double w = 1.0;
    const std::pair<double, int> wells[] = {{1.0, 1}, {3.0, 2}, {6.0, 2}, {15.0, 3}, {30.0, 4}};
    for (auto [depth, expected] : wells) {
        const auto oracle = square_well_energies(depth, w);
        CHECK(static_cast<int>(oracle.size()) == expected);
        auto rep = analyze_potential(g, square_well(g, depth, w), 0.0, PotentialTag::AtZero, 1e-6);
        CHECK(rep.m_minus == expected);
        REQUIRE(rep.eigenvalues.size() >= oracle.size());
        for (std::size_t j = 0; j < oracle.size(); ++j) CHECK(rep.eigenvalues[j] == doctest::Approx(oracle[j]).epsilon(2e-3));
    }
}

TEST_CASE("separable 2-D potential: lowest eigenvalue is the sum of 1-D ones") {
    const double L = 8.0;
    const int M = 48;
    auto g1 = make_grid(1, L, M);
    auto g2 = make_grid(2, L, M);
    auto v1 = [](double x) { return 4.0 * std::exp(-x * x); };
    auto v2 = [](double y) { return 2.5 / (1 + y * y); };
    auto e1 = eigen_dense(assemble_operator(g1, Field::from_function(g1, [&](auto x) { return v1(x[0]); }))).values;
    auto e2 = eigen_dense(assemble_operator(g1, Field::from_function(g1, [&](auto x) { return v2(x[0]); }))).values;
    auto op = assemble_operator(g2, Field::from_function(g2, [&](auto x) { return v1(x[0]) + v2(x[1]); }));
    auto res = eigen_lowest(op, 3);
    CHECK(res.values[0] == doctest::Approx(e1[0] + e2[0]).epsilon(1e-9));
    std::vector<double> sums;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) sums.push_back(e1[i] + e2[j]);
    std::sort(sums.begin(), sums.end());
    for (int j = 0; j < 3; ++j) CHECK(res.values[j] == doctest::Approx(sums[j]).epsilon(1e-9));
}

TEST_CASE("sign convention: constant potential shifts the spectrum") {
    auto g = make_grid(1, 5.0, 40);
    Field c(g, std::vector<double>(g->size(), 2.0));
    auto rep = analyze_potential(g, c, 100.0, PotentialTag::AtInfinity);
    CHECK(rep.eigenvalues.front() == doctest::Approx(g->min_eigenvalue() - 2.0).epsilon(1e-12));
}

TEST_CASE("deepening the well never raises an eigenvalue") {
    auto g = make_grid(1, 8.0, 128);
    auto v = decaying_potential(g, 5.0, 1.0);
    auto bump = Field::from_function(g, [](auto x) { return std::exp(-(x[0] - 1) * (x[0] - 1)); });
    auto base = eigen_lowest(assemble_operator(g, v), 8).values;
    for (double delta : {0.1, 1.0, 4.0}) {
        auto deeper = eigen_lowest(assemble_operator(g, v + delta * bump), 8).values;
        for (int j = 0; j < 8; ++j) CHECK(deeper[j] <= base[j] + 1e-12);
    }
}

TEST_CASE("demo potentials") {
    const double a = 1.0, s = 2.0;
    auto g = make_grid(1, 20.0, 256);
    auto report = [&](double b, PotentialTag tag) {
        auto nl = make_demo_nonlinearity(a, b, s, 2.0, g);
        return analyze(average_f(nl, 256), tag);
    };
    SUBCASE("at infinity: -Delta + 2a") {
        auto rep = report(3.0, PotentialTag::AtInfinity);
        CHECK(rep.essential_lower_bound == doctest::Approx(2 * a));
        CHECK(rep.m_minus == 0);
        CHECK(rep.parity == 1);
        CHECK(rep.kernel_gap >= 2 * a - 1e-12);
        CHECK(rep.kernel_condition);
        CHECK(rep.eigenvalues.empty());
    }
    SUBCASE("at zero with b = 0: -Delta + a") {
        auto rep = report(0.0, PotentialTag::AtZero);
        CHECK(rep.essential_lower_bound == doctest::Approx(a));
        CHECK(rep.m_minus == 0);
        CHECK(rep.parity == 1);
    }
    SUBCASE("at zero: one negative eigenvalue past the bisected threshold") {
        // Oracle: the dense solver applied to -Delta + a - (2b/pi)(1+|x|)^-s directly.
        auto lowest = [&](double b) {
            auto v = decaying_potential(g, 2 * b / kPi, a);
            return eigen_dense(assemble_operator(g, v)).values.front();
        };
        const double b_star = bisect(lowest, 0.0, 50.0);
        CHECK(lowest(b_star) == doctest::Approx(0.0).epsilon(1e-9));
        CHECK(report(0.9 * b_star, PotentialTag::AtZero).m_minus == 0);
        auto rep = report(1.1 * b_star, PotentialTag::AtZero);
        CHECK(rep.m_minus == 1);
        CHECK(rep.parity == -1);
        CHECK(rep.kernel_condition);
    }
    SUBCASE("nonzero source rejects the linearization at zero") {
        CompositionTree t;
        t.source.push_back(Term{1.0, SpaceProfile::Gaussian, 1.0});
        t.linear.push_back(Term{-1.0});
        Nonlinearity nl(g, 2 * kPi, t, 2.0);
        CHECK_THROWS_AS(analyze(average_f(nl, 64), PotentialTag::AtZero), std::invalid_argument);
    }
}

TEST_CASE("m_minus is stable under grid refinement and box enlargement") {
    for (double c : {4.0, 12.0, 30.0}) {
        auto count = [&](double L, int M) {
            auto g = make_grid(1, L, M);
            return analyze_potential(g, decaying_potential(g, c, 1.0), 1.0, PotentialTag::AtZero).m_minus;
        };
        const int base = count(10.0, 128);
        CHECK(base >= 1);
        CHECK(count(10.0, 256) == base);
        CHECK(count(20.0, 256) == base);
    }
}

TEST_CASE("2-D analyze doubles the block until the cutoff is passed") {
    auto g = make_grid(2, 8.0, 31);
    auto rep = analyze_potential(g, decaying_potential(g, 25.0, 1.0), 1.0, PotentialTag::AtZero);
    CHECK(rep.method == EigenMethod::Lobpcg);
    CHECK(rep.eigenvalues.size() > 8);
    CHECK(rep.discarded >= 1);
    for (double e : rep.eigenvalues) CHECK(e < 1.0);
    CHECK(rep.m_minus == std::count_if(rep.eigenvalues.begin(), rep.eigenvalues.end(), [&](double e) { return e < -rep.gap_tol; }));
}

TEST_CASE("parity condition") {
    SchrodingerReport zero, inf;
    zero.tag = PotentialTag::AtZero;
    zero.kernel_condition = inf.kernel_condition = true;
    zero.kernel_gap = inf.kernel_gap = 0.5;
    zero.m_minus = 1;
    inf.m_minus = 0;
    CHECK(parity_condition(zero, inf).holds);
    zero.m_minus = 2;
    CHECK_FALSE(parity_condition(zero, inf).holds);
    zero.m_minus = 0;
    zero.kernel_gap = 0.0;
    zero.kernel_condition = false;
    CHECK_THROWS_AS(parity_condition(zero, inf), ResonanceError);
}
