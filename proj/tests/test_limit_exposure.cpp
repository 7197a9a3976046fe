#include <doctest.h>

#include <cmath>
#include <tuple>

#include "bcva/errors.hpp"
#include "bcva/limit_exposure.hpp"
#include "bcva/quadrature.hpp"
#include "bcva/simulation.hpp"

using namespace bcva;

namespace {

LimitConfig fig1(double x, double kappa, double sigma, double c, double d)
{
    LimitConfig l;
    l.x_star = x;
    l.kappa_star = kappa;
    l.sigma_star = sigma;
    l.c_star = c;
    l.d_star = d;
    l.alpha_star = x * kappa;
    l.lambda_hat_star = 0.5;
    l.gamma1 = l.gamma2 = 1.5;
    l.lambda_c = 2.5;
    l.s_z = 0.02;
    l.l_z = 0.4;
    l.r = 0.03;
    return l;
}

double cir_bond(double alpha, double kappa, double sigma, double x, double u)
{
    const double g = std::sqrt(kappa * kappa + 2.0 * sigma * sigma);
    const double e = std::exp(g * u) - 1.0;
    const double den = (g + kappa) * e + 2.0 * g;
    return std::pow(2.0 * g * std::exp(0.5 * (kappa + g) * u) / den, 2.0 * alpha / (sigma * sigma)) *
           std::exp(-2.0 * e / den * x);
}

CounterpartyParams quiet()
{
    CounterpartyParams c;
    c.a = {0.05, 0.5, 0.0, 0.0, 0.0, 0.0, 0.1, 0.5};
    c.b = c.a;
    c.common_jumps = {1.5, 1.5, 0.0};
    c.idiosyncratic_jumps = {1.5, 1.5, 0.0};
    return c;
}

} // namespace

TEST_CASE("survival_fhat basics")
{
    const LimitConfig l = fig1(0.5, 1.5, 0.2, 0.2, 0.2);
    CHECK(survival_fhat(1.3, 1.3, l) == 1.0);
    CHECK(survival_fhat(0.5, 2.0, l) == survival_fhat(1.0, 2.5, l));
    double prev = 1.0;
    for (double s = 0.1; s <= 10.0; s += 0.1) {
        const double f = survival_fhat(0.0, s, l);
        CHECK(f < prev);
        CHECK(f > 0.0);
        prev = f;
    }
    CHECK_THROWS_AS(survival_fhat(1.0, 0.5, l), DomainError);
}

TEST_CASE("jump-free survival is the CIR bond price")
{
    for (auto [x, kappa, sigma] : {std::tuple{0.02, 0.5, 0.01}, {0.5, 1.5, 0.2}, {0.2, 0.6, 0.3}})
        for (double u : {0.25, 1.0, 3.0, 10.0}) {
            const LimitConfig l = fig1(x, kappa, sigma, 0.0, 0.0);
            CHECK(std::abs(survival_fhat(0.0, u, l) - cir_bond(l.alpha_star, kappa, sigma, x, u)) < 1e-10);
        }
}

TEST_CASE("jumps lower survival")
{
    CHECK(survival_fhat(0.0, 2.0, fig1(0.5, 1.5, 0.2, 0.2, 0.2)) < survival_fhat(0.0, 2.0, fig1(0.5, 1.5, 0.2, 0.0, 0.0)));
}

TEST_CASE("exposure_limit")
{
    const LimitConfig l = fig1(0.5, 1.5, 0.2, 0.0, 0.0);
    CHECK(exposure_limit(3.0, 3.0, l) == 0.0);
    const double simpson = composite_simpson([&](double s) { return std::exp(-l.r * s) * survival_fhat(0.0, s, l); },
                                             0.0, 2.0, 20000);
    const double ref = l.l_z * (std::exp(-2.0 * l.r) * survival_fhat(0.0, 2.0, l) - 1.0) + (l.s_z + l.r * l.l_z) * simpson;
    CHECK(std::abs(exposure_limit(1.0, 3.0, l) - ref) < 1e-9);
    CHECK_THROWS_AS(exposure_limit(4.0, 3.0, l), DomainError);
}

TEST_CASE("limit measure over Dirac atoms")
{
    const LimitConfig l = fig1(0.5, 1.5, 0.2, 0.2, 0.2);
    const MeasureAtoms a = dirac_atoms(l);
    for (double t : {0.0, 0.5, 2.0}) CHECK(limit_measure_mass(t, a) == doctest::Approx(survival_fhat(0.0, t, l)).epsilon(1e-14));
    CHECK(limit_transform(-1.0, 0.0, a) == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));
    CHECK(limit_exp_test(-1.0, 1.0, l) == limit_transform(-1.0, 1.0, a));
    CHECK(limit_transform(-1.0, 1.0, a) < limit_measure_mass(1.0, a));
    CHECK_THROWS_AS(limit_transform(0.5, 1.0, a), DomainError);
}

TEST_CASE("limit measure is linear in the atoms")
{
    const LimitConfig l1 = fig1(0.5, 1.5, 0.2, 0.2, 0.2), l2 = fig1(0.02, 0.5, 0.2, 0.2, 0.2);
    MeasureAtoms mix = dirac_atoms(l1);
    mix.q = {{0.3, dirac_atoms(l1).q[0].p}, {0.7, dirac_atoms(l2).q[0].p}};
    mix.phi0 = {{1.0, 0.2}};
    MeasureAtoms a1 = mix, a2 = mix;
    a1.q = {{1.0, mix.q[0].p}};
    a2.q = {{1.0, mix.q[1].p}};
    CHECK(limit_transform(-0.5, 1.0, mix) ==
          doctest::Approx(0.3 * limit_transform(-0.5, 1.0, a1) + 0.7 * limit_transform(-0.5, 1.0, a2)).epsilon(1e-14));

    MeasureAtoms pts = dirac_atoms(l1);
    pts.eta = {{1.0, JumpPoint{0.0, 0.0}}};
    MeasureAtoms nojump = dirac_atoms(fig1(0.5, 1.5, 0.2, 0.0, 0.0));
    CHECK(limit_transform(-0.5, 1.0, pts) == doctest::Approx(limit_transform(-0.5, 1.0, nojump)).epsilon(1e-14));

    MeasureAtoms bad = mix;
    bad.q[0].weight = 0.5;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("limit transform against the limit-SDE Monte Carlo")
{
    const LimitConfig l = fig1(0.5, 1.5, 0.2, 0.2, 0.2);
    const Estimate e = mc_limit_transform(l, -1.0, 1.0, 20000, 1e-3, 3);
    CHECK(std::abs(e.mean - limit_exp_test(-1.0, 1.0, l)) < 3.0 * e.std_error + 1e-3);
}

TEST_CASE("name ladder")
{
    LimitConfig l = fig1(0.5, 1.5, 0.2, 0.2, 0.2);
    const auto names = build_name_sequence(l, 4);
    REQUIRE(names.size() == 4);
    CHECK(names[0].intensity.xi0 == doctest::Approx(1.0));
    CHECK(names[0].loss == 0.0);
    CHECK(names[3].intensity.kappa == doctest::Approx(1.5 * 1.25));
    CHECK(names[3].loss == doctest::Approx(0.4 * 0.75));
    CHECK_THROWS_AS(build_name_sequence(l, 0), DomainError);
    l.l_z = -0.1;
    CHECK_THROWS_AS(build_name_sequence(l, 3), DomainError);
}

TEST_CASE("empirical measure near the limit")
{
    const LimitConfig l = fig1(0.5, 1.5, 0.2, 0.0, 0.0);
    PortfolioModel m{build_name_sequence(l, 300), l.jumps(), l.lambda_c, quiet()};
    SimulationSettings s;
    s.horizon = 1.0;
    s.dt = 1e-3;
    s.n_paths = 200;
    s.seed = 21;
    s.record_stride = 500;
    const PathSet ps = simulate_paths(m, s);
    const MeasureAtoms a = dirac_atoms(l);
    for (double t : {0.5, 1.0}) {
        const Estimate one = empirical_measure_eval(ps, {TestFunction::Kind::one, 0.0}, t);
        CHECK(std::abs(one.mean - limit_measure_mass(t, a)) < 3.0 * one.std_error + 0.01 * limit_measure_mass(t, a));
        const Estimate ex = empirical_measure_eval(ps, {TestFunction::Kind::exponential, -1.0}, t);
        CHECK(std::abs(ex.mean - limit_transform(-1.0, t, a)) < 3.0 * ex.std_error + 0.02 * limit_transform(-1.0, t, a));
    }
    CHECK(empirical_measure_eval(ps, {}, 0.0).mean == 1.0);
    CHECK_THROWS_AS(empirical_measure_eval(ps, {}, 0.3), DomainError);
}
