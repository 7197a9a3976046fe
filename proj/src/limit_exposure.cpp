#include "bcva/limit_exposure.hpp"

#include <cmath>

#include "bcva/errors.hpp"
#include "bcva/quadrature.hpp"
#include "bcva/riccati.hpp"

namespace bcva {

void MeasureAtoms::validate() const
{
    auto check = [](const char* which, double total, bool any_negative) {
        if (any_negative) throw DomainError(std::string("MeasureAtoms: negative weight in ") + which);
        if (total > 1.0 + 1e-12) throw DomainError(std::string("MeasureAtoms: weights of ") + which + " exceed 1");
    };
    double s = 0.0;
    bool neg = false;
    for (const auto& a : q) { s += a.weight; neg |= a.weight < 0.0; }
    check("q", s, neg);
    s = 0.0;
    for (const auto& a : eta) { s += a.weight; neg |= a.weight < 0.0; }
    check("eta", s, neg);
    s = 0.0;
    for (const auto& a : phi0) { s += a.weight; neg |= a.weight < 0.0; }
    check("phi0", s, neg);
    if (!(lambda_c >= 0.0)) throw DomainError("MeasureAtoms: lambda_c must be >= 0");
}

double survival_fhat(double t, double s, const LimitConfig& cfg)
{
    if (!(s >= t)) throw DomainError("survival_fhat: need t <= s");
    const double u = s - t;
    const double b = riccati_B(cfg.kappa_star, cfg.sigma_star, u);
    const double ib = integral_B(cfg.kappa_star, cfg.sigma_star, u);
    return std::exp(cfg.x_star * b + cfg.alpha_star * ib) * mgf_exp(cfg.c_star * cfg.lambda_c * ib, cfg.gamma1) *
           mgf_exp(cfg.d_star * cfg.lambda_hat_star * ib, cfg.gamma2);
}

double exposure_limit(double t, double horizon, const LimitConfig& cfg)
{
    if (!(t <= horizon)) throw DomainError("exposure_limit: need t <= T");
    if (t == horizon) return 0.0;
    const double u = horizon - t;
    const auto integral = simpson_refine(
        [&](double v) { return std::exp(-cfg.r * v) * survival_fhat(0.0, v, cfg); }, 0.0, u, 1e-8);
    return cfg.l_z * (std::exp(-cfg.r * u) * survival_fhat(0.0, u, cfg) - 1.0) +
           (cfg.s_z + cfg.r * cfg.l_z) * integral.value;
}

MeasureAtoms dirac_atoms(const LimitConfig& cfg)
{
    MeasureAtoms m;
    m.q.push_back({1.0, {cfg.alpha_star, cfg.kappa_star, cfg.sigma_star, cfg.c_star, cfg.d_star,
                         cfg.lambda_hat_star}});
    m.eta.push_back({1.0, ExpJumpParams{cfg.gamma1, cfg.gamma2}});
    m.phi0.push_back({1.0, cfg.x_star});
    m.lambda_c = cfg.lambda_c;
    return m;
}

double limit_transform(double theta, double t, const MeasureAtoms& atoms)
{
    if (!(theta <= 0.0)) throw DomainError("limit_transform: theta must be <= 0");
    if (!(t >= 0.0)) throw DomainError("limit_transform: t must be >= 0");
    atoms.validate();
    double total = 0.0;
    for (const auto& qa : atoms.q) {
        const TypeParams& p = qa.p;
        const double beta = theta == 0.0 ? riccati_B(p.kappa, p.sigma, t) : riccati_beta(p.kappa, p.sigma, theta, t);
        const double ib = integral_beta(p.kappa, p.sigma, theta, t);
        for (const auto& ea : atoms.eta) {
            double jump = 0.0;
            if (const auto* pt = std::get_if<JumpPoint>(&ea.law)) {
                jump = std::exp((p.d * p.lambda_hat * pt->y2 + p.c * atoms.lambda_c * pt->y1) * ib);
            } else {
                const auto& law = std::get<ExpJumpParams>(ea.law);
                jump = mgf_exp(p.c * atoms.lambda_c * ib, law.gamma1) * mgf_exp(p.d * p.lambda_hat * ib, law.gamma2);
            }
            for (const auto& xa : atoms.phi0)
                total += qa.weight * ea.weight * xa.weight * std::exp(beta * xa.x + p.alpha * ib) * jump;
        }
    }
    return total;
}

double limit_measure_mass(double t, const MeasureAtoms& atoms) { return limit_transform(0.0, t, atoms); }

double limit_exp_test(double theta, double t, const LimitConfig& cfg)
{
    return limit_transform(theta, t, dirac_atoms(cfg));
}

double empirical_measure_path(const SimulatedPath& path, std::size_t record, double t, const TestFunction& f)
{
    if (path.names.empty()) throw DomainError("empirical_measure_path: no names");
    double s = 0.0;
    for (const auto& e : path.names)
        if (e.survives(t)) s += f(e.intensity[record]);
    return s / static_cast<double>(path.names.size());
}

Estimate empirical_measure_eval(const PathSet& ps, const TestFunction& f, double t)
{
    const std::size_t j = ps.record_index(t);
    std::vector<double> vals;
    vals.reserve(ps.paths.size());
    for (const auto& p : ps.paths) vals.push_back(empirical_measure_path(p, j, t, f));
    return summarize(vals);
}

std::vector<NameParams> build_name_sequence(const LimitConfig& cfg, std::size_t k_names, double rho)
{
    if (k_names == 0) throw DomainError("build_name_sequence: K must be >= 1");
    if (cfg.l_z < 0.0) throw DomainError("build_name_sequence: ladder needs l_z >= 0");
    std::vector<NameParams> out;
    out.reserve(k_names);
    for (std::size_t k = 1; k <= k_names; ++k) {
        const double up = 1.0 + 1.0 / static_cast<double>(k);
        const double down = 1.0 - 1.0 / static_cast<double>(k);
        NameParams n;
        n.intensity.alpha = cfg.alpha_star * up;
        n.intensity.kappa = cfg.kappa_star * up;
        n.intensity.sigma = cfg.sigma_star * up;
        n.intensity.c = cfg.c_star * up;
        n.intensity.d = cfg.d_star * up;
        n.intensity.lambda_hat = cfg.lambda_hat_star * up;
        n.intensity.xi0 = cfg.x_star * up;
        n.intensity.rho = rho;
        n.spread = cfg.s_z * up;
        n.loss = cfg.l_z * down;
        n.z = 1;
        out.push_back(n);
    }
    return out;
}

} // namespace bcva
