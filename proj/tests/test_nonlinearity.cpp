#include <cmath>
#include <numbers>

#include "doctest.h"
#include "semiper/nonlinearity.hpp"

using namespace semiper;

namespace {

constexpr double kPi = std::numbers::pi;

// Independent reference for the demo nonlinearity written straight from its formula.
double demo_f(double a, double b, double s, double t, double r, double u) {
    return -2.0 * a * u + std::sin(a * u + b * std::pow(1.0 + r, -s) * std::abs(std::cos(t)) * u);
}

}  // namespace

TEST_CASE("demo nonlinearity matches its closed form pointwise") {
    auto g = make_grid(1, 10.0, 63);
    const double a = 1.0, b = 3.0, s = 1.5, p = 2.0;
    auto nl = make_demo_nonlinearity(a, b, s, p, g);
    const auto r = g->radius();
    for (double t : {0.0, 0.3, 1.7, kPi / 2, 4.0}) {
        for (double u : {-5.0, -0.1, 0.0, 0.7, 12.0}) {
            for (std::size_t i = 0; i < g->size(); i += 7) {
                CHECK(nl.evaluate_point(t, i, u) == doctest::Approx(demo_f(a, b, s, t, r[i], u)).epsilon(1e-14));
            }
        }
    }
    std::vector<double> u(g->size(), 0.4), out(g->size());
    nl.evaluate(0.9, u, out);
    for (std::size_t i = 0; i < g->size(); ++i) CHECK(out[i] == doctest::Approx(demo_f(a, b, s, 0.9, r[i], 0.4)));
}

TEST_CASE("demo structural data") {
    auto g = make_grid(2, 6.0, 20);
    const double a = 0.8, b = 2.5, s = 1.6, p = 2.5;
    auto nl = make_demo_nonlinearity(a, b, s, p, g);
    CHECK(nl.zero_preserving());
    CHECK_FALSE(nl.autonomous());
    CHECK(nl.omega_time_independent());
    CHECK_FALSE(nl.alpha_time_independent());
    const auto r = g->radius();
    for (double t : {0.0, 1.0, 2.5}) {
        auto w0 = nl.omega0(t), wi = nl.omega_inf(t), a0 = nl.alpha0(t), ai = nl.alpha_inf(t);
        for (std::size_t i = 0; i < g->size(); ++i) {
            CHECK(w0[i] == 0.0);
            CHECK(wi[i] == doctest::Approx(2 * a));
            CHECK(ai[i] == doctest::Approx(a));
            CHECK(a0[i] == doctest::Approx(b * std::pow(1 + r[i], -s) * std::abs(std::cos(t))));
        }
    }
    CHECK(nl.omega_inf_lower_bound() == doctest::Approx(2 * a));
    CHECK(nl.alpha_inf_lower_bound() == doctest::Approx(a));

    // Derived dissipativity data: a and b (1+|x|)^-s.
    CHECK(nl.dissipativity_rate() == doctest::Approx(a).epsilon(1e-14));
    const auto& bp = nl.dissipativity_perturbation();
    for (std::size_t i = 0; i < g->size(); ++i) CHECK(bp[i] == doctest::Approx(b * std::pow(1 + r[i], -s)));

    CHECK(slope_check_at_zero(nl).passes);
    CHECK(slope_check_at_infinity(nl).passes);
}

TEST_CASE("f(t,x,0) = 0 and finite-difference derivative agree with the analytic derivative") {
    auto g = make_grid(1, 5.0, 31);
    auto nl = make_demo_nonlinearity(1.2, 4.0, 1.2, 1.0, g);
    std::vector<double> zero(g->size(), 0.0), out(g->size());
    nl.evaluate(0.77, zero, out);
    for (double v : out) CHECK(v == 0.0);

    std::vector<double> u(g->size()), up(g->size()), um(g->size()), fp(g->size()), fm(g->size()), d(g->size());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = std::sin(0.3 * i) * 2.0;
    const double eps = 1e-6;
    for (std::size_t i = 0; i < u.size(); ++i) {
        up[i] = u[i] + eps;
        um[i] = u[i] - eps;
    }
    nl.evaluate(2.1, up, fp);
    nl.evaluate(2.1, um, fm);
    nl.derivative(2.1, u, d);
    for (std::size_t i = 0; i < u.size(); ++i) CHECK(d[i] == doctest::Approx((fp[i] - fm[i]) / (2 * eps)).epsilon(1e-7));
}

TEST_CASE("decay exponent must exceed N/p") {
    auto g = make_grid(2, 4.0, 16);
    CHECK_THROWS_AS(make_demo_nonlinearity(1.0, 1.0, 1.0, 2.0, g), NonlinearityError);  // s = N/p
    CHECK_THROWS_AS(make_demo_nonlinearity(1.0, 1.0, 0.5, 2.0, g), NonlinearityError);
    CHECK_THROWS_AS(make_demo_nonlinearity(1.0, 1.0, 2.0, 1.5, g), NonlinearityError);  // p < N
    CHECK_NOTHROW(make_demo_nonlinearity(1.0, 1.0, 1.01, 2.0, g));
    CHECK_THROWS_AS(Nonlinearity(g, 0.0, CompositionTree{}, 2.0), NonlinearityError);
}

TEST_CASE("averaging a time-independent nonlinearity is exact") {
    auto g = make_grid(1, 5.0, 31);
    CompositionTree tree;
    tree.source.push_back(Term{0.5, SpaceProfile::Gaussian, 1.0});
    tree.linear.push_back(Term{-1.5});
    tree.outer.push_back(OuterTerm{OuterFunction::Tanh, {Term{2.0, SpaceProfile::Decay, 2.0}}});
    Nonlinearity nl(g, 3.0, tree, 2.0);
    CHECK(nl.autonomous());
    auto avg = average_f(nl, 64);
    std::vector<double> u(g->size()), f(g->size()), fh(g->size());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = std::cos(0.2 * i) * 3.0;
    nl.evaluate(1.234, u, f);
    avg.evaluate(0.0, u, fh);
    for (std::size_t i = 0; i < u.size(); ++i) CHECK(fh[i] == doctest::Approx(f[i]).epsilon(1e-14));
    CHECK(avg.quadrature_error() <= 1e-14);
}

TEST_CASE("averaged potentials of the demo match the analytic |cos| mean") {
    // mean of |cos t| over a period is 2/pi, so alpha_hat = -a + (2/pi) b (1+|x|)^-s and omega_hat = -2a.
    auto g = make_grid(1, 8.0, 47);
    const double a = 1.0, b = 4.5, s = 1.5;
    auto nl = make_demo_nonlinearity(a, b, s, 2.0, g);
    auto avg = average_f(nl, 256);
    const auto r = g->radius();
    for (std::size_t i = 0; i < g->size(); ++i) {
        CHECK(avg.omega_hat()[i] == doctest::Approx(-2 * a).epsilon(1e-14));
        const double exact = -a + 2.0 / kPi * b * std::pow(1 + r[i], -s);
        CHECK(std::abs(avg.alpha_hat()[i] - exact) <= 1e-8);
    }
    CHECK(avg.intervals() % 8 == 0);
    CHECK(avg.quadrature_error() < 1e-6);
    CHECK(avg.quadrature_error() <= avg.coarse_quadrature_error());
}

TEST_CASE("averaged fhat matches an independent fine quadrature") {
    auto g = make_grid(1, 4.0, 15);
    const double a = 0.7, b = 2.0, s = 1.1;
    auto nl = make_demo_nonlinearity(a, b, s, 2.0, g);
    auto avg = average_f(nl, 128);
    const auto r = g->radius();
    for (std::size_t i = 0; i < g->size(); i += 3) {
        for (double u : {-2.0, 0.5, 2.0}) {
            // Fine midpoint rule; its error is far below the Simpson estimate.
            const int n = 400000;
            double acc = 0.0;
            for (int k = 0; k < n; ++k) acc += demo_f(a, b, s, 2 * kPi * (k + 0.5) / n, r[i], u);
            CHECK(std::abs(avg.evaluate_point(i, u) - acc / n) <= 4 * avg.quadrature_error() + 1e-10);
        }
    }
}

TEST_CASE("averaging is linear in f") {
    auto g = make_grid(1, 4.0, 15);
    auto f1 = make_demo_nonlinearity(1.0, 2.0, 1.5, 2.0, g);
    CompositionTree t2;
    t2.linear.push_back(Term{0.3, SpaceProfile::Gaussian, 1.5, TimeProfile::Cos, 1.0});
    t2.outer.push_back(OuterTerm{OuterFunction::Atan, {Term{1.0, SpaceProfile::Constant, 0.0, TimeProfile::Sin, 2.0}}});
    Nonlinearity f2(g, 2 * kPi, t2, 2.0);
    auto sum = f1 + f2;
    auto a1 = average_f(f1, 128), a2 = average_f(f2, 128), as = average_f(sum, 128);
    for (std::size_t i = 0; i < g->size(); ++i) {
        for (double u : {-1.0, 0.25, 4.0}) {
            CHECK(as.evaluate_point(i, u) == doctest::Approx(a1.evaluate_point(i, u) + a2.evaluate_point(i, u)).epsilon(1e-12));
        }
    }
}

TEST_CASE("dissipativity check") {
    auto g = make_grid(1, 6.0, 31);
    SUBCASE("pure damping is exactly dissipative") {
        CompositionTree t;
        t.linear.push_back(Term{-1.0});
        Nonlinearity nl(g, 1.0, t, 2.0);
        CHECK(nl.dissipativity_rate() == 1.0);
        auto rep = dissipativity_check(nl, 5000, -10, 10, 1);
        CHECK(rep.passes);
        CHECK(rep.max_violation <= 1e-12 * rep.scale);
    }
    SUBCASE("demo nonlinearity passes with its derived data") {
        auto nl = make_demo_nonlinearity(1.0, 4.0, 1.5, 2.0, g);
        auto rep = dissipativity_check(nl, 20000, -20, 20, 7);
        CHECK(rep.passes);
    }
    SUBCASE("a growing term declared as damping fails by about 2a|u-v|^2") {
        CompositionTree t;
        t.linear.push_back(Term{1.0});
        Nonlinearity nl = Nonlinearity(g, 1.0, t, 2.0).with_dissipativity(1.0, Field(g));
        CHECK(nl.dissipativity_declared());
        auto rep = dissipativity_check(nl, 5000, -1, 1, 3);
        CHECK_FALSE(rep.passes);
        const double d = rep.worst_u - rep.worst_v;
        CHECK(rep.max_violation == doctest::Approx(2.0 * d * d).epsilon(1e-12));
    }
    CHECK_THROWS_AS(dissipativity_check(make_demo_nonlinearity(1, 1, 1.5, 2, g), 10, -1, 1, 0), NonlinearityError);
}

TEST_CASE("periodicity check") {
    auto g = make_grid(1, 6.0, 31);
    CompositionTree t;
    t.linear.push_back(Term{-1.0});
    CHECK(periodicity_check(Nonlinearity(g, 1.0, t, 2.0), 2000, -5, 5, 2).max_violation == 0.0);
    CHECK(periodicity_check(make_demo_nonlinearity(1.0, 3.0, 1.5, 2.0, g), 2000, -5, 5, 2).passes);
    // |cos t| has period pi, so declaring period pi/2 must be caught.
    auto wrong = make_demo_nonlinearity(1.0, 3.0, 1.5, 2.0, g, kPi / 2);
    auto rep = periodicity_check(wrong, 2000, -5, 5, 2);
    CHECK_FALSE(rep.passes);
    CHECK(rep.max_violation > 0.1);
}
