#include "bcva/riccati.hpp"

#include <cmath>
#include <string>

#include "bcva/errors.hpp"

namespace bcva {

namespace {

void check_args(const char* who, double kappa, double sigma, double u)
{
    if (!(kappa > 0.0) || !std::isfinite(kappa))
        throw DomainError(std::string(who) + ": kappa must be positive and finite");
    if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw DomainError(std::string(who) + ": sigma must be positive and finite");
    if (!(u >= 0.0) || std::isnan(u))
        throw DomainError(std::string(who) + ": u must be nonnegative");
}

// log1p(z)/z, continuous at 0
double log1p_ratio(double z) { return z == 0.0 ? 1.0 : std::log1p(z) / z; }

struct Pieces {
    double varpi;
    double e;     // expm1(-varpi*u), in (-1, 0]
    double z;     // (varpi-kappa)*e/(2*varpi)
};

Pieces pieces(double kappa, double sigma, double u)
{
    const double varpi = riccati_varpi(kappa, sigma);
    const double delta = 2.0 * sigma * sigma / (varpi + kappa);
    const double e = std::expm1(-varpi * u);
    return {varpi, e, delta * e / (2.0 * varpi)};
}

double integral_B_unchecked(double kappa, double sigma, double u)
{
    const Pieces p = pieces(kappa, sigma, u);
    return -2.0 / (p.varpi + kappa) * (u + p.e / p.varpi * log1p_ratio(p.z));
}

double integral_exp_phi_unchecked(double kappa, double sigma, double u)
{
    const double varpi = riccati_varpi(kappa, sigma);
    const double th = std::tanh(0.5 * varpi * u);
    return 2.0 * th / (kappa * th + varpi);
}

} // namespace

double RiccatiParams::varpi() const
{
    return std::sqrt(kappa * kappa + 2.0 * a_ell * sigma * sigma);
}

void RiccatiParams::validate() const
{
    if (!(kappa > 0.0) || !std::isfinite(kappa)) throw DomainError("RiccatiParams: kappa must be > 0");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("RiccatiParams: sigma must be > 0");
    if (!(a_ell > 0.0) || !std::isfinite(a_ell)) throw DomainError("RiccatiParams: a_ell must be > 0");
    if (!(b0 <= 0.0)) throw DomainError("RiccatiParams: b0 must be <= 0");
}

double riccati_varpi(double kappa, double sigma)
{
    return std::sqrt(kappa * kappa + 2.0 * sigma * sigma);
}

double riccati_B(double kappa, double sigma, double u)
{
    check_args("riccati_B", kappa, sigma, u);
    const double varpi = riccati_varpi(kappa, sigma);
    const double m = -std::expm1(-varpi * u);
    return -2.0 * m / (2.0 * varpi + (kappa - varpi) * m);
}

double integral_B(double kappa, double sigma, double u)
{
    check_args("integral_B", kappa, sigma, u);
    return integral_B_unchecked(kappa, sigma, u);
}

double riccati_phi(double kappa, double sigma, double u)
{
    check_args("riccati_phi", kappa, sigma, u);
    const Pieces p = pieces(kappa, sigma, u);
    return -p.varpi * u - 2.0 * std::log1p(p.z);
}

double integral_exp_phi(double kappa, double sigma, double u)
{
    check_args("integral_exp_phi", kappa, sigma, u);
    return integral_exp_phi_unchecked(kappa, sigma, u);
}

double riccati_beta(double kappa, double sigma, double b0, double u)
{
    check_args("riccati_beta", kappa, sigma, u);
    if (b0 == 0.0) throw DomainError("riccati_beta: b0 = 0, use riccati_B");
    if (!std::isfinite(b0)) throw DomainError("riccati_beta: b0 must be finite");
    const double big_i = integral_exp_phi_unchecked(kappa, sigma, u);
    const double den = 1.0 - 0.5 * b0 * sigma * sigma * big_i;
    if (!(den > 0.0)) throw PoleError("riccati_beta: solution has a pole before u");
    return riccati_B(kappa, sigma, u) + std::exp(riccati_phi(kappa, sigma, u)) * b0 / den;
}

double integral_beta(double kappa, double sigma, double b0, double u)
{
    check_args("integral_beta", kappa, sigma, u);
    if (!std::isfinite(b0)) throw DomainError("integral_beta: b0 must be finite");
    const double ib = integral_B_unchecked(kappa, sigma, u);
    if (b0 == 0.0) return ib;
    const double big_i = integral_exp_phi_unchecked(kappa, sigma, u);
    const double w = -0.5 * b0 * sigma * sigma * big_i;
    if (!(1.0 + w > 0.0)) throw PoleError("integral_beta: solution has a pole before u");
    return ib + b0 * big_i * log1p_ratio(w);
}

double riccati_beta_general(double kappa, double sigma, double a_ell, double b0, double u)
{
    if (!(a_ell > 0.0) || !std::isfinite(a_ell))
        throw DomainError("riccati_beta_general: a_ell must be positive");
    const double s = sigma * std::sqrt(a_ell);
    if (b0 == 0.0) return a_ell * riccati_B(kappa, s, u);
    return a_ell * riccati_beta(kappa, s, b0 / a_ell, u);
}

double riccati_beta_general(const RiccatiParams& p, double u)
{
    p.validate();
    return riccati_beta_general(p.kappa, p.sigma, p.a_ell, p.b0, u);
}

} // namespace bcva
