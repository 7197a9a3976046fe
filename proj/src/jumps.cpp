#include "bcva/jumps.hpp"

#include <cmath>
#include <limits>

#include "bcva/errors.hpp"

namespace bcva {

namespace {

void check_theta(const char* who, double ta, double tb)
{
    if (!(ta <= 0.0) || !(tb <= 0.0))
        throw DomainError(std::string(who) + ": arguments must be <= 0");
}

} // namespace

void BveParams::validate() const
{
    if (!std::isfinite(gamma_a) || !std::isfinite(gamma_b) || !std::isfinite(gamma_ab))
        throw DomainError("BveParams: rates must be finite");
    if (gamma_a < 0.0 || gamma_b < 0.0 || gamma_ab < 0.0)
        throw DomainError("BveParams: rates must be nonnegative");
    if (!(marginal_a() > 0.0) || !(marginal_b() > 0.0))
        throw DomainError("BveParams: marginal rates must be positive");
}

void ExpJumpParams::validate() const
{
    if (!(gamma1 > 0.0) || !std::isfinite(gamma1)) throw DomainError("ExpJumpParams: gamma1 must be > 0");
    if (!(gamma2 > 0.0) || !std::isfinite(gamma2)) throw DomainError("ExpJumpParams: gamma2 must be > 0");
}

double mgf_exp(double theta, double gamma)
{
    if (!(gamma > 0.0)) throw DomainError("mgf_exp: gamma must be > 0");
    if (!(theta <= 0.0)) throw DomainError("mgf_exp: theta must be <= 0");
    return gamma / (gamma - theta);
}

double mgf_bve(double theta_a, double theta_b, const BveParams& p)
{
    check_theta("mgf_bve", theta_a, theta_b);
    const double ga = p.marginal_a(), gb = p.marginal_b();
    // one-sided arguments reduce to the exponential marginals; keeps them exact
    if (theta_b == 0.0) return mgf_exp(theta_a, ga);
    if (theta_a == 0.0) return mgf_exp(theta_b, gb);
    const double g0t = p.gamma0() - theta_a - theta_b;
    const double num = g0t * ga * gb + theta_a * theta_b * p.gamma_ab;
    const double den = g0t * (ga - theta_a) * (gb - theta_b);
    return num / den;
}

std::pair<double, double> mgf_bve_partials(double theta_a, double theta_b, const BveParams& p)
{
    check_theta("mgf_bve_partials", theta_a, theta_b);
    const double g_star = p.marginal_a() * p.marginal_b();
    const double g0 = p.gamma0(), gab = p.gamma_ab;
    const double g = g0 - theta_a - theta_b;
    const double da = p.marginal_a() - theta_a, db = p.marginal_b() - theta_b;
    const double common = g * g * g_star + g * theta_a * theta_b * gab;
    const double pa = ((g0 - theta_b) * theta_b * gab * da + common) / (g * g * da * da * db);
    const double pb = ((g0 - theta_a) * theta_a * gab * db + common) / (g * g * db * db * da);
    return {pa, pb};
}

double sample_exp(double gamma, Rng& rng)
{
    if (!(gamma > 0.0)) return std::numeric_limits<double>::infinity();
    return std::exponential_distribution<double>(gamma)(rng);
}

std::pair<double, double> sample_bve(const BveParams& p, Rng& rng)
{
    const double ea = sample_exp(p.gamma_a, rng);
    const double eb = sample_exp(p.gamma_b, rng);
    const double ec = p.gamma_ab > 0.0 ? sample_exp(p.gamma_ab, rng)
                                       : std::numeric_limits<double>::infinity();
    return {std::min(ea, ec), std::min(eb, ec)};
}

} // namespace bcva
