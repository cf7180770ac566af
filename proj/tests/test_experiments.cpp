#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "semiper/experiments.hpp"
#include "semiper/periodic.hpp"

using namespace semiper;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kT = 2 * kPi;

Nonlinearity linear_damping(const GridPtr& g, double c) {
    CompositionTree t;
    t.linear.push_back(Term{-c});
    return Nonlinearity(g, kT, t, 2.0);
}

Field bump(const GridPtr& g, double width, double amp) {
    return Field::from_function(g, [=](std::span<const double> x) {
        double r2 = 0.0;
        for (double xi : x) r2 += xi * xi;
        return amp * std::exp(-r2 / (width * width));
    });
}

// Smooth, supported in |x| < 1.
Field compact_bump(const GridPtr& g, double amp) {
    return Field::from_function(g, [=](std::span<const double> x) {
        double r2 = 0.0;
        for (double xi : x) r2 += xi * xi;
        return r2 < 1.0 ? amp * std::exp(-1.0 / (1.0 - r2)) : 0.0;
    });
}

// Composite Simpson on theta in [0, pi/2) with r = tan(theta).
double radial_integral(int N, const std::function<double(double)>& fr) {
    const int n = 20000;
    const double h = (kPi / 2) / n;
    double s = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double th = std::min(i * h, kPi / 2 - 1e-12);
        const double r = std::tan(th);
        const double jac = 1.0 / (std::cos(th) * std::cos(th));
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        s += w * fr(r) * std::pow(r, N - 1) * jac;
    }
    const double sphere = N == 3 ? 4 * kPi : 2 * std::pow(kPi, N / 2.0) / std::tgamma(N / 2.0);
    return sphere * s * h / 3.0;
}

}  // namespace

TEST_CASE("Sobolev constant equals the ratio attained by the extremal bubble") {
    for (int N : {3, 4, 5}) {
        const double q = 2.0 * N / (N - 2);
        const double e = (N - 2) / 2.0;
        auto u = [=](double r) { return std::pow(1 + r * r, -e); };
        auto du = [=](double r) { return -2 * e * r * std::pow(1 + r * r, -e - 1); };
        const double lq = std::pow(radial_integral(N, [&](double r) { return std::pow(u(r), q); }), 1 / q);
        const double grad = std::sqrt(radial_integral(N, [&](double r) { return du(r) * du(r); }));
        CHECK(sobolev_constant(N) == doctest::Approx(lq / grad).epsilon(1e-7));

        // Gaussians are not extremal.
        auto gq = std::pow(radial_integral(N, [&](double r) { return std::exp(-q * r * r / 2); }), 1 / q);
        auto gg = std::sqrt(radial_integral(N, [&](double r) { return r * r * std::exp(-r * r); }));
        CHECK(gq / gg < sobolev_constant(N));
    }
    CHECK(sobolev_constant(3) == doctest::Approx(0.42726).epsilon(1e-4));
    CHECK_THROWS_AS(sobolev_constant(2), std::invalid_argument);
}

TEST_CASE("remark52_bound arithmetic") {
    SUBCASE("matches an independent long double evaluation") {
        const long double C = 0.427047l, abar = 1.3l, p = 4.5l, N = 3.0l;
        const long double q = N / (2 * p);
        const long double rhs = powl(abar, 1 - q) / (powl(q, q) * powl(C, N / p));
        const long double printed = powl(abar, 1 - q) / (powl(q, q) * powl(C, q * q));
        auto r = remark52_bound(0.7, 1.3, 4.5, 3, 0.427047);
        CHECK(r.rhs == doctest::Approx(static_cast<double>(rhs)).epsilon(1e-14));
        CHECK(r.rhs_printed_variant == doctest::Approx(static_cast<double>(printed)).epsilon(1e-14));
        CHECK(r.margin == doctest::Approx(r.rhs - 0.7));
    }
    SUBCASE("p = N exponent identity") {
        const double C = sobolev_constant(3);
        auto r = remark52_bound(0.1, 2.0, 3.0, 3);
        CHECK(r.rhs == doctest::Approx(std::sqrt(2.0) / (std::sqrt(0.5) * C)).epsilon(1e-15));
        CHECK(r.sobolev_constant == C);
    }
    SUBCASE("zero lhs always holds") {
        for (int N : {3, 4}) {
            auto r = remark52_bound(0.0, 0.01, 2.5 * N, N);
            CHECK(r.holds);
            CHECK(r.holds_printed_variant);
        }
    }
    SUBCASE("monotone over a randomized sample") {
        std::mt19937_64 rng(52);
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        for (int i = 0; i < 100; ++i) {
            const int N = 3 + static_cast<int>(u01(rng) * 2);
            const double p = N * (1 + 3 * u01(rng));
            const double abar = 0.05 + 3 * u01(rng);
            const double lhs = 5 * u01(rng);
            auto r = remark52_bound(lhs, abar, p, N);
            auto smaller = remark52_bound(lhs * u01(rng), abar, p, N);
            auto larger = remark52_bound(lhs, abar * (1 + u01(rng)), p, N);
            if (r.holds) {
                CHECK(smaller.holds);
                CHECK(larger.holds);
            }
            CHECK(larger.rhs >= r.rhs);
        }
    }
    SUBCASE("invalid parameters") {
        CHECK_THROWS_AS(remark52_bound(0.1, 1.0, 2.0, 2), std::invalid_argument);
        CHECK_THROWS_AS(remark52_bound(0.1, 1.0, 2.0, 3), std::invalid_argument);
        CHECK_THROWS_AS(remark52_bound(0.1, 0.0, 3.0, 3), std::invalid_argument);
        CHECK_THROWS_AS(remark52_bound(-0.1, 1.0, 3.0, 3), std::invalid_argument);
    }
}

TEST_CASE("contraction test") {
    auto g = make_grid(1, 10.0, 127);
    auto cfg = default_evolution_config(kT);
    cfg.dt = kT / 512;
    const std::vector<double> times{kT / 4, kT / 2, kT};

    SUBCASE("identical states give ratio 0") {
        auto nl = make_demo_nonlinearity(1.0, 0.0, 2.0, 2.0, g);
        auto u = bump(g, 1.0, 1.0);
        auto rep = contraction_test(nl, u, u, times, cfg);
        for (double r : rep.ratios) CHECK(r == 0.0);
        CHECK(rep.passes);
    }
    SUBCASE("linear damping matches the exact spectral flow") {
        auto nl = linear_damping(g, 1.0);
        auto u1 = bump(g, 1.0, 1.0), u2 = bump(g, 2.0, -0.5);
        auto rep = contraction_test(nl, u1, u2, times, cfg);
        REQUIRE(rep.rate_a == 1.0);
        for (std::size_t i = 0; i < times.size(); ++i) {
            const double exact = norm_l2(heat_semigroup(u1 - u2, times[i])) / norm_l2(u1 - u2);
            CHECK(rep.ratios[i] == doctest::Approx(exact).epsilon(1e-9));
            CHECK(rep.ratios[i] <= 1.0);
        }
    }
    SUBCASE("demo with b = 0 at dt = T/512") {
        auto nl = make_demo_nonlinearity(1.0, 0.0, 2.0, 2.0, g);
        auto rep = contraction_test(nl, bump(g, 1.0, 3.0), bump(g, 2.0, -2.0), times, cfg);
        CHECK(rep.passes);
        CHECK(rep.max_ratio <= 1.01);
    }
    SUBCASE("b != 0 is rejected") {
        auto nl = make_demo_nonlinearity(1.0, 0.5, 2.0, 2.0, g);
        CHECK_THROWS_AS(contraction_test(nl, Field(g), Field(g), times, cfg), std::invalid_argument);
    }
}

TEST_CASE("tail estimate") {
    SUBCASE("linear flow from compact data has alpha_n = 0") {
        auto g = make_grid(1, 10.0, 255);
        auto nl = linear_damping(g, 1.0);
        auto cfg = default_evolution_config(kT);
        auto traj = evolve(compact_bump(g, 1.0), 0.0, kT, cfg, nl, kT / 64, {1.0, 2.0, 4.0, 8.0});
        auto rep = tail_estimate(traj, 1.0, trajectory_h1_bound(traj));
        for (double a : rep.alpha) CHECK(a == 0.0);
        CHECK(rep.decreasing);
        CHECK(rep.passes);
        // Mass did leak outside |x| > 1 while staying under the envelope.
        CHECK(traj.tails.back()[0] > 0.0);
    }
    SUBCASE("zero trajectory") {
        auto g = make_grid(1, 10.0, 63);
        auto nl = linear_damping(g, 1.0);
        auto traj = evolve(Field(g), 0.0, 1.0, default_evolution_config(kT), nl, 0.25, {1.0, 5.0});
        auto rep = tail_estimate(traj, 1.0, 0.0);
        for (double a : rep.alpha) CHECK(a == 0.0);
        CHECK(rep.passes);
    }
    SUBCASE("demo orbit: alpha_n decreasing and small far out") {
        auto g = make_grid(1, 20.0, 255);
        auto nl = make_demo_nonlinearity(1.0, 6.0, 2.0, 2.0, g);
        auto cfg = default_evolution_config(kT);
        std::vector<double> radii{10.0, 12.5, 15.0, 17.5};
        auto traj = evolve(compact_bump(g, 1.0), 0.0, 4 * kT, cfg, nl, kT / 64, radii);
        auto rep = tail_estimate(traj, nl.dissipativity_rate(), trajectory_h1_bound(traj));
        for (std::size_t r = 0; r < radii.size(); ++r) MESSAGE("n = " << radii[r] << " alpha = " << rep.alpha[r]);
        CHECK(rep.decreasing);
        CHECK(rep.alpha.front() <= 1e-8);
        CHECK(rep.passes);
    }
    SUBCASE("requires tail radii") {
        auto g = make_grid(1, 10.0, 31);
        auto traj = evolve(Field(g), 0.0, 1.0, default_evolution_config(kT), linear_damping(g, 1.0), 0.5);
        CHECK_THROWS_AS(tail_estimate(traj, 1.0, 1.0), std::invalid_argument);
    }
}

TEST_CASE("high-frequency noise: fixed H1 size, shrinking L2 size") {
    auto g = make_grid(1, 10.0, 127);
    double prev = std::numeric_limits<double>::infinity();
    for (double lambda : {1.0, 0.25, 1.0 / 32}) {
        auto n = high_frequency_noise(g, lambda, 1.0 / 32, 0.5, 3);
        CHECK(norm_h1(n) == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(norm_l2(n) < prev);
        prev = norm_l2(n);
    }
}

TEST_CASE("averaging convergence") {
    auto g = make_grid(1, 10.0, 127);
    SUBCASE("time-independent f gives discretization-level errors") {
        CompositionTree t;
        t.linear.push_back(Term{-2.0});
        t.outer.push_back(OuterTerm{OuterFunction::Sin, {Term{1.0}, Term{3.0, SpaceProfile::Decay, 2.0}}});
        Nonlinearity nl(g, kT, t, 2.0);
        AveragingOptions opts;
        opts.lambdas = {1.0, 0.5, 0.25};
        opts.quadrature_intervals = 64;
        auto rep = averaging_convergence(nl, bump(g, 1.0, 1.0), opts);
        // Only the splitting error of each run remains; it shrinks with the step.
        opts.steps_per_period *= 4;
        opts.reference_steps_per_period *= 4;
        auto fine = averaging_convergence(nl, bump(g, 1.0, 1.0), opts);
        for (std::size_t i = 0; i < rep.errors.size(); ++i) {
            CHECK(rep.errors[i] < 2e-3);
            CHECK(fine.errors[i] < rep.errors[i] / 6);
        }
    }
    SUBCASE("demo: errors decrease with lambda") {
        auto nl = make_demo_nonlinearity(1.0, 6.0, 2.0, 2.0, g);
        AveragingOptions opts;
        opts.quadrature_intervals = 64;
        auto rep = averaging_convergence(nl, bump(g, 1.0, 1.0), opts);
        for (std::size_t i = 0; i < rep.errors.size(); ++i)
            MESSAGE("lambda " << rep.lambdas[i] << " error " << rep.errors[i]);
        CHECK(rep.strictly_decreasing);
        CHECK(rep.errors.back() <= rep.errors.front() / 4);
        CHECK(rep.delta == doctest::Approx(kT / 10));
    }
    SUBCASE("L2-only converging initial data") {
        auto nl = make_demo_nonlinearity(1.0, 6.0, 2.0, 2.0, g);
        AveragingOptions opts;
        opts.mode = InitialDataMode::L2OnlyConverging;
        opts.quadrature_intervals = 64;
        auto rep = averaging_convergence(nl, bump(g, 1.0, 1.0), opts);
        for (std::size_t i = 0; i < rep.errors.size(); ++i)
            MESSAGE("lambda " << rep.lambdas[i] << " error " << rep.errors[i] << " at delta " << rep.errors_at_delta[i]
                              << " noise L2 " << rep.noise_l2[i]);
        CHECK(rep.strictly_decreasing);
        CHECK(rep.errors.back() <= rep.errors.front() / 4);
        for (double h : rep.noise_h1) CHECK(h == doctest::Approx(0.5));
    }
    SUBCASE("rejects unsorted lambdas") {
        auto nl = linear_damping(g, 1.0);
        AveragingOptions opts;
        opts.lambdas = {0.5, 1.0};
        CHECK_THROWS_AS(averaging_convergence(nl, Field(g), opts), std::invalid_argument);
    }
}

TEST_CASE("hypothesis checks") {
    auto g = make_grid(1, 10.0, 127);
    SUBCASE("b = 0: Thm11 applicable, parity fails") {
        auto nl = make_demo_nonlinearity(1.0, 0.0, 2.0, 2.0, g);
        auto v11 = check_theorem_hypotheses(nl, Theorem::Thm11);
        CHECK(v11.verdict == Verdict::Theorem11Applicable);
        auto v12 = check_theorem_hypotheses(nl, Theorem::Thm12);
        REQUIRE(v12.parity);
        CHECK_FALSE(v12.parity->holds);
        CHECK(v12.parity->m_minus_zero == 0);
        CHECK(v12.parity->m_minus_infinity == 0);
        CHECK(v12.find("parity")->status == CheckStatus::Fail);
        CHECK(v12.verdict == Verdict::Theorem11Applicable);
        // The trivial periodic solution.
        auto sol = picard_solve(bump(g, 1.0, 1.0), default_evolution_config(kT), nl);
        CHECK(sol.converged);
        CHECK(norm_h1(sol.solution) < 1e-7);
    }
    SUBCASE("one bound state at zero in N = 1: nonexistence at zero stays uncertified") {
        auto nl = make_demo_nonlinearity(1.0, 6.0, 2.0, 2.0, g);
        auto v = check_theorem_hypotheses(nl, Theorem::Thm12);
        REQUIRE(v.parity);
        CHECK(v.parity->m_minus_zero == 1);
        CHECK(v.parity->m_minus_infinity == 0);
        CHECK(v.parity->holds);
        CHECK(v.find("nonexistence_at_zero")->status == CheckStatus::Uncertified);
        CHECK(v.find("remark52_at_zero")->status == CheckStatus::Uncertified);
        CHECK(v.verdict == Verdict::Theorem11Applicable);
        for (const auto& c : v.checks)
            if (c.role == CheckRole::Theorem11) CHECK_MESSAGE(c.status == CheckStatus::Pass, c.name);
    }
    SUBCASE("period mismatch makes the verdict inconclusive") {
        CompositionTree t;
        t.linear.push_back(Term{-2.0});
        t.outer.push_back(OuterTerm{OuterFunction::Sin, {Term{1.0}}});
        t.source.push_back(Term{1.0, SpaceProfile::Gaussian, 1.0, TimeProfile::Cos, 1.5});
        Nonlinearity nl(g, kT, t, 2.0);
        auto v = check_theorem_hypotheses(nl, Theorem::Thm11);
        CHECK(v.find("periodicity")->status == CheckStatus::Fail);
        CHECK(v.verdict == Verdict::Inconclusive);
    }
    SUBCASE("source terms rule out the nontrivial-solution list") {
        CompositionTree t;
        t.linear.push_back(Term{-2.0});
        t.source.push_back(Term{1.0, SpaceProfile::Gaussian, 1.0, TimeProfile::Cos, 1.0});
        Nonlinearity nl(g, kT, t, 2.0);
        auto v = check_theorem_hypotheses(nl, Theorem::Thm12);
        CHECK(v.find("zero_preserving")->status == CheckStatus::Fail);
        CHECK(v.verdict == Verdict::Theorem11Applicable);
    }
}

TEST_CASE("hypothesis checks in N = 3 certify nonexistence through remark52_bound") {
    auto g = make_grid(3, 6.0, 15);
    auto nl = make_demo_nonlinearity(1.0, 0.5, 2.0, 3.0, g);
    auto v = check_theorem_hypotheses(nl, Theorem::Thm12);
    REQUIRE(v.remark52_zero);
    CHECK(v.remark52_zero->holds);
    CHECK(v.find("nonexistence_at_zero")->status == CheckStatus::Pass);
    CHECK(v.find("nonexistence_at_zero")->detail.find("remark52") != std::string::npos);
    REQUIRE(v.parity);
    CHECK(v.parity->m_minus_zero == 0);
    CHECK(v.verdict == Verdict::Theorem11Applicable);
}
