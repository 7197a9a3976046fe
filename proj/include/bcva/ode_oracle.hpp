#pragma once

#include <cmath>
#include <cstddef>

#include "bcva/errors.hpp"

namespace bcva {

/// Classical RK4 for a scalar autonomous ODE y' = rhs(y). Verification only.
template <class Rhs>
double ode_oracle(Rhs&& rhs, double y0, double u, double step)
{
    if (!(step > 0.0)) throw DomainError("ode_oracle: step must be positive");
    if (u <= 0.0) return y0;
    const auto n = static_cast<std::size_t>(std::ceil(u / step - 1e-9));
    const double h = u / static_cast<double>(n);
    double y = y0;
    for (std::size_t i = 0; i < n; ++i) {
        const double k1 = rhs(y);
        const double k2 = rhs(y + 0.5 * h * k1);
        const double k3 = rhs(y + 0.5 * h * k2);
        const double k4 = rhs(y + h * k3);
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return y;
}

/// Right-hand side -kappa*y + 0.5*sigma^2*y^2 - a_ell.
struct RiccatiRhs {
    double kappa, sigma, a_ell = 1.0;
    double operator()(double y) const { return -kappa * y + 0.5 * sigma * sigma * y * y - a_ell; }
};

} // namespace bcva
