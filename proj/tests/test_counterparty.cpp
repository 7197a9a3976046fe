#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "bcva/config.hpp"
#include "bcva/counterparty.hpp"
#include "bcva/errors.hpp"
#include "bcva/harness.hpp"
#include "bcva/limit_exposure.hpp"
#include "bcva/riccati.hpp"
#include "bcva/simulation.hpp"

using namespace bcva;

namespace {

ModelSetup base() { return model_from_config(KeyValueConfig::defaults()); }

} // namespace

TEST_CASE("kernel initial values")
{
    const ModelSetup m = base();
    const auto cb = build_kernel_coeffs(m.cps, 0.2, DefaultSide::b_defaults, 3.0);
    const auto ca = build_kernel_coeffs(m.cps, 0.2, DefaultSide::a_defaults, 3.0);
    CHECK(h1(0.0, 0.2, 0.3, cb) == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(h2(0.0, 0.2, 0.3, ca) == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(joint_survival_equal(0.0, 0.2, 0.3, cb) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(h1(1.0, 0.2, 0.2, ca), DomainError);
    CHECK_THROWS_AS(h2(1.0, 0.2, 0.2, cb), DomainError);
    CHECK_THROWS_AS(cb.at(3.5), DomainError);
    CHECK_THROWS_AS(build_kernel_coeffs(m.cps, 0.2, DefaultSide::b_defaults, 3.0, 32), std::invalid_argument);
}

TEST_CASE("symmetric counterparties give equal kernels")
{
    const ModelSetup m = base();
    const auto cb = build_kernel_coeffs(m.cps, 0.2, DefaultSide::b_defaults, 3.0);
    const auto ca = build_kernel_coeffs(m.cps, 0.2, DefaultSide::a_defaults, 3.0);
    for (double u : {0.3, 1.0, 2.7}) {
        CHECK(h1(u, 0.2, 0.2, cb) == doctest::Approx(h2(u, 0.2, 0.2, ca)).epsilon(1e-12));
        CHECK(h1(u, 0.1, 0.3, cb) == doctest::Approx(h2(u, 0.3, 0.1, ca)).epsilon(1e-12));
    }
}

TEST_CASE("kernels against Monte Carlo")
{
    const ModelSetup m = base();
    const auto cb = build_kernel_coeffs(m.cps, 0.2, DefaultSide::b_defaults, 3.0);
    const auto ca = build_kernel_coeffs(m.cps, 0.2, DefaultSide::a_defaults, 3.0);
    const std::vector<double> us{0.5, 1.0, 2.0};
    const auto mc = mc_counterparty_kernels(m.cps, 0.2, 0.2, 0.2, us, 20000, 1e-3, 31);
    for (const auto& e : mc) {
        CHECK(std::abs(h1(e.u, 0.2, 0.2, cb) - e.h1.mean) < 3.0 * e.h1.std_error);
        CHECK(std::abs(h2(e.u, 0.2, 0.2, ca) - e.h2.mean) < 3.0 * e.h2.std_error);
        CHECK(std::abs(joint_survival_equal(e.u, 0.2, 0.2, cb) - e.joint_survival.mean) <
              3.0 * e.joint_survival.std_error);
    }
}

TEST_CASE("H1 reduces to the derivative of a CIR transform")
{
    CounterpartyParams z = base().cps;
    z.a.alpha = z.a.c = z.a.d = z.a.lambda_hat = 0.0;
    z.b.c = z.b.d = z.b.lambda_hat = 0.0;
    const auto cz = build_kernel_coeffs(z, 0.0, DefaultSide::b_defaults, 2.0);
    for (double u : {0.5, 1.0, 2.0}) {
        auto transform = [&](double th) {
            return std::exp(z.b.alpha * integral_beta(z.b.kappa, z.b.sigma, th, u) +
                            riccati_beta(z.b.kappa, z.b.sigma, th, u) * 0.2);
        };
        const double fd = (transform(1e-5) - transform(-1e-5)) / 2e-5;
        CHECK(h1(u, 0.0, 0.2, cz) == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("bcva bookkeeping")
{
    const ModelSetup m = base();
    const BcvaResult r = bcva::bcva(0.0, 3.0, m.limit, m.cps, 0.2, 0.2, 300);
    CHECK(r.b_term >= 0.0);
    CHECK(r.a_term >= 0.0);
    CHECK(r.cva == doctest::Approx(m.cps.loss_b * r.b_term));
    CHECK(r.dva == doctest::Approx(m.cps.loss_a * r.a_term));
    CHECK(r.bcva == doctest::Approx(r.dva - r.cva));
    CHECK(r.total_bcva() == doctest::Approx(300.0 * r.bcva));
    const BcvaResult end = bcva::bcva(3.0, 3.0, m.limit, m.cps, 0.2, 0.2);
    CHECK(end.cva == 0.0);
    CHECK(end.dva == 0.0);
    CHECK_THROWS_AS(bcva::bcva(0.0, 3.0, m.limit, m.cps, -0.1, 0.2), DomainError);
}

TEST_CASE("exposure sign changes are roots")
{
    ModelSetup m = base();
    m.limit.lambda_c = 1.0;
    const auto roots = exposure_sign_changes(0.0, 3.0, m.limit);
    for (double t : roots) CHECK(std::abs(exposure_limit(t, 3.0, m.limit)) < 1e-9);
    // with a single sign, CVA or DVA is zero
    const double e0 = exposure_limit(0.0, 3.0, base().limit);
    const BcvaResult r = bcva::bcva(0.0, 3.0, base().limit, m.cps, 0.2, 0.2);
    if (exposure_sign_changes(0.0, 3.0, base().limit).empty()) CHECK((e0 > 0 ? r.dva : r.cva) == 0.0);
}

TEST_CASE("bcva against nested Monte Carlo")
{
    ModelSetup m = base();
    m.limit.lambda_c = 1.0;
    const BcvaResult r = bcva::bcva(0.0, 3.0, m.limit, m.cps, 0.2, 0.2);
    const BcvaMcEstimate mc = mc_bcva_oracle(3.0, m.limit, m.cps, 0.2, 0.2, 20000, 2e-3, 5);
    CHECK(std::abs(r.b_term - mc.b_term.mean) < 3.0 * mc.b_term.std_error + 1e-12);
    CHECK(std::abs(r.a_term - mc.a_term.mean) < 3.0 * mc.a_term.std_error + 1e-12);
}

TEST_CASE("sensitivity sweeps")
{
    const ModelSetup m = base();
    const std::vector<double> sig{0.05, 0.3, 0.6, 1.0};
    const auto t = sensitivity_sweep(SweepParameter::sigma_star, sig, m.limit, m.cps, 0.2, 0.2, 0.0, 3.0);
    REQUIRE(t.size() == 2);
    CHECK(t[0].label == "cva_vs_sigma_star");
    CHECK(t[1].label == "dva_vs_sigma_star");
    CHECK(t[0].abscissa == sig);
    CHECK(std::is_sorted(t[0].value.begin(), t[0].value.end()));
    const auto again = sensitivity_sweep(SweepParameter::sigma_star, sig, m.limit, m.cps, 0.2, 0.2, 0.0, 3.0, 3);
    CHECK(again[0].value == t[0].value);

    const std::vector<double> lc{0.0, 1.0, 2.0, 5.0};
    const auto l = sensitivity_sweep(SweepParameter::lambda_c, lc, m.limit, m.cps, 0.2, 0.2, 0.0, 3.0);
    CHECK(std::is_sorted(l[1].value.begin(), l[1].value.end()));
    CHECK(l[0].value.back() < 0.05 * t[0].value.back());

    CHECK(parse_sweep_parameter("sigma_b") == SweepParameter::sigma_b);
    CHECK(to_string(SweepParameter::c_star) == "c_star");
    CHECK_THROWS_AS(parse_sweep_parameter("kappa"), ConfigError);
}
