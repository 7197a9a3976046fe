#include <doctest.h>

#include <cmath>

#include "bcva/errors.hpp"
#include "bcva/quadrature.hpp"

using namespace bcva;

TEST_CASE("Simpson is exact on cubics")
{
    auto f = [](double x) { return 1.0 + x - 2.0 * x * x + 0.5 * x * x * x; };
    const double exact = 2.0 + 2.0 - 16.0 / 3.0 + 2.0;
    CHECK(composite_simpson(f, 0.0, 2.0, 2) == doctest::Approx(exact).epsilon(1e-15));
    CHECK_THROWS_AS(composite_simpson(f, 0.0, 1.0, 3), DomainError);
}

TEST_CASE("simpson_refine reaches the tolerance")
{
    const auto r = simpson_refine([](double x) { return std::exp(-x) * std::sin(3 * x); }, 0.0, 5.0, 1e-10);
    const double exact = (3.0 - std::exp(-5.0) * (std::sin(15.0) + 3.0 * std::cos(15.0))) / 10.0;
    CHECK(std::abs(r.value - exact) < 1e-10);
    CHECK(r.intervals >= 16);
    CHECK(simpson_refine([](double) { return 1.0; }, 2.0, 2.0, 1e-6).value == 0.0);
}

TEST_CASE("simpson_refine throws when the budget is exhausted")
{
    CHECK_THROWS_AS(simpson_refine([](double x) { return std::sqrt(x); }, 0.0, 1.0, 1e-15, 0.0, 64), AccuracyError);
}

TEST_CASE("Gauss-Legendre 8 is exact to degree 15")
{
    auto f = [](double x) { return std::pow(x, 15) + std::pow(x, 4); };
    CHECK(gauss_legendre8(f, 0.0, 1.0) == doctest::Approx(1.0 / 16 + 1.0 / 5).epsilon(1e-14));
}
