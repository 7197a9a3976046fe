#pragma once

#include <vector>

#include "bcva/jumps.hpp"

namespace bcva {

/// Dynamics of one CEV/CIR intensity with common and idiosyncratic jumps.
struct IntensityParams {
    double alpha = 0.0;
    double kappa = 0.0;
    double sigma = 0.0;
    double c = 0.0;           // loading on common jumps
    double d = 0.0;           // loading on idiosyncratic jumps
    double lambda_hat = 0.0;  // idiosyncratic Poisson rate
    double xi0 = 0.0;
    double rho = 0.5;         // elasticity

    void validate(const char* who) const;
};

/// One CDS reference name.
struct NameParams {
    IntensityParams intensity;
    double spread = 0.0;
    double loss = 0.0;
    int z = 1;  // +1 protection bought, -1 sold

    void validate() const;
};

struct CounterpartyParams {
    IntensityParams a;
    IntensityParams b;
    BveParams common_jumps;         // (Y^A, Y^B) marks of the common Poisson events
    BveParams idiosyncratic_jumps;  // (tilde Y^A, tilde Y^B)
    double loss_a = 0.4;
    double loss_b = 0.4;

    void validate() const;
};

/// Limiting parameters of the large-portfolio exposure.
struct LimitConfig {
    double alpha_star = 0.0;
    double kappa_star = 0.0;
    double sigma_star = 0.0;
    double c_star = 0.0;
    double d_star = 0.0;
    double lambda_hat_star = 0.0;
    double x_star = 0.0;
    double gamma1 = 1.0;
    double gamma2 = 1.0;
    double lambda_c = 0.0;
    double s_z = 0.0;
    double l_z = 0.0;
    double r = 0.0;

    ExpJumpParams jumps() const { return {gamma1, gamma2}; }
    void validate() const;
};

/// Everything the path simulator needs.
struct PortfolioModel {
    std::vector<NameParams> names;
    ExpJumpParams name_jumps;
    double lambda_c = 0.0;
    CounterpartyParams counterparties;

    void validate() const;
};

} // namespace bcva
