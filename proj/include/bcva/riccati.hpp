#pragma once

// Closed-form solutions of the scalar Riccati equation
//   y' = -kappa*y + 0.5*sigma^2*y^2 - a_ell,   y(0) = b0
// together with the integrals needed by the affine transforms.

namespace bcva {

struct RiccatiParams {
    double kappa = 0.0;
    double sigma = 0.0;
    double a_ell = 1.0;
    double b0 = 0.0;

    double varpi() const;
    void validate() const;
};

/// sqrt(kappa^2 + 2*sigma^2)
double riccati_varpi(double kappa, double sigma);

/// Solution with y(0)=0, a_ell=1.
double riccati_B(double kappa, double sigma, double u);

/// Integral of riccati_B over [0, u].
double integral_B(double kappa, double sigma, double u);

/// phi(u) = sigma^2 * integral_B - kappa*u.
double riccati_phi(double kappa, double sigma, double u);

/// Integral of exp(phi) over [0, u].
double integral_exp_phi(double kappa, double sigma, double u);

/// Solution with y(0)=b0 != 0, a_ell=1.
double riccati_beta(double kappa, double sigma, double b0, double u);

/// Integral of the b0-started solution over [0, u]; b0 = 0 gives integral_B.
double integral_beta(double kappa, double sigma, double b0, double u);

/// Solution with general killing weight a_ell > 0 via the scaling identity.
double riccati_beta_general(double kappa, double sigma, double a_ell, double b0, double u);
double riccati_beta_general(const RiccatiParams& p, double u);

} // namespace bcva
