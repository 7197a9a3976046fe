#include "bcva/model.hpp"

#include <cmath>
#include <string>

#include "bcva/errors.hpp"

namespace bcva {

namespace {

void finite(const char* who, const char* field, double v)
{
    if (!std::isfinite(v))
        throw ConfigError(std::string(who) + ": " + field + " is not finite");
}

void nonneg(const char* who, const char* field, double v)
{
    finite(who, field, v);
    if (v < 0.0) throw ConfigError(std::string(who) + ": " + field + " must be >= 0");
}

} // namespace

void IntensityParams::validate(const char* who) const
{
    nonneg(who, "alpha", alpha);
    nonneg(who, "kappa", kappa);
    nonneg(who, "sigma", sigma);
    nonneg(who, "c", c);
    nonneg(who, "d", d);
    nonneg(who, "lambda_hat", lambda_hat);
    nonneg(who, "xi0", xi0);
    finite(who, "rho", rho);
    if (rho < 0.5 || rho >= 1.0) throw ConfigError(std::string(who) + ": rho must lie in [0.5, 1)");
}

void NameParams::validate() const
{
    intensity.validate("NameParams");
    finite("NameParams", "spread", spread);
    finite("NameParams", "loss", loss);
    if (loss < 0.0 || loss > 1.0) throw ConfigError("NameParams: loss must lie in [0, 1]");
    if (z != 1 && z != -1) throw ConfigError("NameParams: z must be +1 or -1");
}

void CounterpartyParams::validate() const
{
    a.validate("CounterpartyParams.a");
    b.validate("CounterpartyParams.b");
    try {
        common_jumps.validate();
        idiosyncratic_jumps.validate();
    } catch (const DomainError& e) {
        throw ConfigError(std::string("CounterpartyParams: ") + e.what());
    }
    for (double l : {loss_a, loss_b})
        if (!(l > 0.0 && l <= 1.0)) throw ConfigError("CounterpartyParams: losses must lie in (0, 1]");
}

void LimitConfig::validate() const
{
    const char* who = "LimitConfig";
    for (double v : {alpha_star, kappa_star, sigma_star, c_star, d_star, lambda_hat_star, x_star,
                     gamma1, gamma2, lambda_c, s_z, l_z, r})
        finite(who, "parameter", v);
    if (!(kappa_star > 0.0)) throw ConfigError("LimitConfig: kappa_star must be > 0");
    if (!(sigma_star > 0.0)) throw ConfigError("LimitConfig: sigma_star must be > 0");
    if (!(gamma1 > 0.0) || !(gamma2 > 0.0)) throw ConfigError("LimitConfig: gamma1, gamma2 must be > 0");
    nonneg(who, "alpha_star", alpha_star);
    nonneg(who, "c_star", c_star);
    nonneg(who, "d_star", d_star);
    nonneg(who, "lambda_hat_star", lambda_hat_star);
    nonneg(who, "lambda_c", lambda_c);
    if (!(x_star > 0.0)) throw ConfigError("LimitConfig: x_star must be > 0");
    if (l_z < -1.0 || l_z > 1.0) throw ConfigError("LimitConfig: l_z must lie in [-1, 1]");
}

void PortfolioModel::validate() const
{
    for (const auto& n : names) n.validate();
    try {
        name_jumps.validate();
    } catch (const DomainError& e) {
        throw ConfigError(std::string("PortfolioModel: ") + e.what());
    }
    nonneg("PortfolioModel", "lambda_c", lambda_c);
    counterparties.validate();
}

} // namespace bcva
