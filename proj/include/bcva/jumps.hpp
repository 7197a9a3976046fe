#pragma once

#include <random>
#include <utility>

namespace bcva {

using Rng = std::mt19937_64;

/// Marshall-Olkin bivariate exponential law.
struct BveParams {
    double gamma_a = 1.0;
    double gamma_b = 1.0;
    double gamma_ab = 0.0;

    double gamma0() const { return gamma_a + gamma_b + gamma_ab; }
    double marginal_a() const { return gamma_a + gamma_ab; }
    double marginal_b() const { return gamma_b + gamma_ab; }
    double correlation() const { return gamma_ab / gamma0(); }
    void validate() const;
};

/// Exponential jump-size laws of the portfolio names.
struct ExpJumpParams {
    double gamma1 = 1.0;  // common-jump sizes Y
    double gamma2 = 1.0;  // idiosyncratic sizes
    void validate() const;
};

/// gamma/(gamma - theta) for theta <= 0.
double mgf_exp(double theta, double gamma);

/// Joint MGF of the BVE law on the closed negative quadrant.
double mgf_bve(double theta_a, double theta_b, const BveParams& p);

/// (dPhi/dtheta_a, dPhi/dtheta_b).
std::pair<double, double> mgf_bve_partials(double theta_a, double theta_b, const BveParams& p);

double sample_exp(double gamma, Rng& rng);

/// Three-shock construction (min(E_A,E_C), min(E_B,E_C)).
std::pair<double, double> sample_bve(const BveParams& p, Rng& rng);

} // namespace bcva
