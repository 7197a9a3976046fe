#include "bcva/counterparty.hpp"

#include <algorithm>
#include <cmath>

#include "bcva/errors.hpp"
#include "bcva/jumps.hpp"
#include "bcva/limit_exposure.hpp"
#include "bcva/ode_oracle.hpp"
#include "bcva/parallel.hpp"
#include "bcva/quadrature.hpp"
#include "bcva/riccati.hpp"
#include "bcva/simulation.hpp"

namespace bcva {

namespace {

using Values = AffineKernelCoeffs::Values;

double hermite(double y0, double y1, double d0, double d1, double h, double s)
{
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * d0 + (-2 * s3 + 3 * s2) * y1 +
           (s3 - s2) * h * d1;
}

Values interpolate(const AffineKernelCoeffs& c, double u)
{
    const std::size_t n = c.intervals();
    std::size_t i = std::min(static_cast<std::size_t>(u / c.step), n - 1);
    const double s = (u - c.step * static_cast<double>(i)) / c.step;
    const Values& a = c.value[i];
    const Values& b = c.value[i + 1];
    const Values& da = c.slope[i];
    const Values& db = c.slope[i + 1];
    const double h = c.step;
    return {hermite(a.hat1, b.hat1, da.hat1, db.hat1, h, s),   hermite(a.hat_a, b.hat_a, da.hat_a, db.hat_a, h, s),
            hermite(a.hat_b, b.hat_b, da.hat_b, db.hat_b, h, s), hermite(a.pre1, b.pre1, da.pre1, db.pre1, h, s),
            hermite(a.pre_a, b.pre_a, da.pre_a, db.pre_a, h, s), hermite(a.pre_b, b.pre_b, da.pre_b, db.pre_b, h, s)};
}

/// Exponent and prefactor rates of both kernel families at lag u.
struct KernelRates {
    const CounterpartyParams& c;
    double lambda_c;

    double hat_a(double u) const { return riccati_B(c.a.kappa, c.a.sigma, u); }
    double hat_b(double u) const { return riccati_B(c.b.kappa, c.b.sigma, u); }

    double exponent_rate(double u) const
    {
        const double ha = hat_a(u), hb = hat_b(u);
        const double lambda = c.a.lambda_hat + c.b.lambda_hat + lambda_c;
        return c.a.alpha * ha + c.b.alpha * hb + lambda_c * mgf_bve(c.a.c * ha, c.b.c * hb, c.common_jumps) +
               c.a.lambda_hat * mgf_bve(c.a.d * ha, 0.0, c.idiosyncratic_jumps) +
               c.b.lambda_hat * mgf_bve(0.0, c.b.d * hb, c.idiosyncratic_jumps) - lambda;
    }

    /// Prefactor rate of the family whose defaulting side is `side`.
    double prefactor_rate(double u, DefaultSide side) const
    {
        const double ha = hat_a(u), hb = hat_b(u);
        if (side == DefaultSide::b_defaults) {
            const double g = std::exp(riccati_phi(c.b.kappa, c.b.sigma, u));
            const double pc = mgf_bve_partials(c.a.c * ha, c.b.c * hb, c.common_jumps).second;
            const double pi = mgf_bve_partials(0.0, c.b.d * hb, c.idiosyncratic_jumps).second;
            return g * (c.b.alpha + lambda_c * c.b.c * pc + c.b.lambda_hat * c.b.d * pi);
        }
        const double g = std::exp(riccati_phi(c.a.kappa, c.a.sigma, u));
        const double pc = mgf_bve_partials(c.a.c * ha, c.b.c * hb, c.common_jumps).first;
        const double pi = mgf_bve_partials(c.a.d * ha, 0.0, c.idiosyncratic_jumps).first;
        return g * (c.a.alpha + lambda_c * c.a.c * pc + c.a.lambda_hat * c.a.d * pi);
    }
};

void check_interpolation(const AffineKernelCoeffs& full)
{
    AffineKernelCoeffs half;
    half.side = full.side;
    half.u_max = full.u_max;
    half.step = 2.0 * full.step;
    for (std::size_t i = 0; i < full.value.size(); i += 2) {
        half.value.push_back(full.value[i]);
        half.slope.push_back(full.slope[i]);
    }
    double worst = 0.0;
    for (std::size_t i = 1; i < full.value.size(); i += 2) {
        const Values v = interpolate(half, full.step * static_cast<double>(i));
        const Values& w = full.value[i];
        const double diffs[] = {v.hat1 - w.hat1, v.hat_a - w.hat_a, v.hat_b - w.hat_b,
                                v.pre1 - w.pre1, v.pre_a - w.pre_a, v.pre_b - w.pre_b};
        const double scales[] = {w.hat1, w.hat_a, w.hat_b, w.pre1, w.pre_a, w.pre_b};
        for (int j = 0; j < 6; ++j) worst = std::max(worst, std::abs(diffs[j]) / std::max(1.0, std::abs(scales[j])));
    }
    if (worst > 1e-7)
        throw AccuracyError("build_kernel_coeffs: half-grid interpolation differs by " + std::to_string(worst) +
                            "; refine the grid");
}

} // namespace

AffineKernelCoeffs::Values AffineKernelCoeffs::at(double u) const
{
    if (!(u >= 0.0) || u > u_max * (1.0 + 1e-12))
        throw DomainError("kernel coefficients requested outside [0, u_max]");
    return interpolate(*this, std::min(u, u_max));
}

AffineKernelCoeffs build_kernel_coeffs(const CounterpartyParams& cps, double lambda_c, DefaultSide side,
                                       double u_max, std::size_t intervals)
{
    if (!(u_max > 0.0) || !std::isfinite(u_max)) throw DomainError("build_kernel_coeffs: u_max must be > 0");
    if (intervals < 64) throw DomainError("build_kernel_coeffs: grid needs at least 64 intervals");
    if (intervals % 2) ++intervals;
    cps.validate();
    if (!(lambda_c >= 0.0)) throw DomainError("build_kernel_coeffs: lambda_c must be >= 0");
    if (cps.a.rho != 0.5 || cps.b.rho != 0.5)
        throw DomainError("build_kernel_coeffs: closed forms need rho = 0.5");

    const KernelRates rates{cps, lambda_c};
    AffineKernelCoeffs out;
    out.side = side;
    out.u_max = u_max;
    out.step = u_max / static_cast<double>(intervals);
    out.value.resize(intervals + 1);
    out.slope.resize(intervals + 1);

    const bool b_side = side == DefaultSide::b_defaults;
    const IntensityParams& own = b_side ? cps.b : cps.a;
    double cum_hat = 0.0, cum_pre = 0.0;
    for (std::size_t i = 0; i <= intervals; ++i) {
        const double u = out.step * static_cast<double>(i);
        if (i > 0) {
            const double lo = u - out.step;
            cum_hat += gauss_legendre8([&](double v) { return rates.exponent_rate(v); }, lo, u);
            cum_pre += gauss_legendre8([&](double v) { return rates.prefactor_rate(v, side); }, lo, u);
        }
        const double ha = rates.hat_a(u), hb = rates.hat_b(u);
        const double g = std::exp(riccati_phi(own.kappa, own.sigma, u));
        Values v{cum_hat, ha, hb, cum_pre, b_side ? 0.0 : g, b_side ? g : 0.0};
        const double dg = (-own.kappa + own.sigma * own.sigma * (b_side ? hb : ha)) * g;
        Values d{rates.exponent_rate(u),
                 RiccatiRhs{cps.a.kappa, cps.a.sigma}(ha),
                 RiccatiRhs{cps.b.kappa, cps.b.sigma}(hb),
                 rates.prefactor_rate(u, side),
                 b_side ? 0.0 : dg,
                 b_side ? dg : 0.0};
        out.value[i] = v;
        out.slope[i] = d;
    }
    check_interpolation(out);
    return out;
}

double h1(double u, double x_a, double x_b, const AffineKernelCoeffs& coeffs)
{
    if (coeffs.side != DefaultSide::b_defaults) throw DomainError("h1: needs the B-defaults coefficient family");
    if (x_a < 0.0 || x_b < 0.0) throw DomainError("h1: intensities must be >= 0");
    const Values v = coeffs.at(u);
    return std::max(0.0, v.pre1 + v.pre_a * x_a + v.pre_b * x_b) * std::exp(v.hat1 + v.hat_a * x_a + v.hat_b * x_b);
}

double h2(double u, double x_a, double x_b, const AffineKernelCoeffs& coeffs)
{
    if (coeffs.side != DefaultSide::a_defaults) throw DomainError("h2: needs the A-defaults coefficient family");
    if (x_a < 0.0 || x_b < 0.0) throw DomainError("h2: intensities must be >= 0");
    const Values v = coeffs.at(u);
    return std::max(0.0, v.pre1 + v.pre_a * x_a + v.pre_b * x_b) * std::exp(v.hat1 + v.hat_a * x_a + v.hat_b * x_b);
}

double joint_survival_equal(double u, double x_a, double x_b, const AffineKernelCoeffs& coeffs)
{
    if (x_a < 0.0 || x_b < 0.0) throw DomainError("joint_survival_equal: intensities must be >= 0");
    const Values v = coeffs.at(u);
    return std::exp(v.hat1 + v.hat_a * x_a + v.hat_b * x_b);
}

std::vector<double> exposure_sign_changes(double t, double horizon, const LimitConfig& cfg)
{
    std::vector<double> roots;
    if (!(horizon > t)) return roots;
    constexpr std::size_t samples = 64;
    const double h = (horizon - t) / static_cast<double>(samples);
    auto eps = [&](double s) { return exposure_limit(s, horizon, cfg); };
    // the exposure vanishes at s = T, so the last sample stops one step short
    double s_prev = t, e_prev = eps(t);
    for (std::size_t i = 1; i < samples; ++i) {
        const double s = t + h * static_cast<double>(i);
        const double e = eps(s);
        if ((e_prev < 0.0 && e > 0.0) || (e_prev > 0.0 && e < 0.0)) {
            double lo = s_prev, hi = s, elo = e_prev;
            while (hi - lo > 1e-13 * (horizon - t)) {
                const double mid = 0.5 * (lo + hi);
                const double em = eps(mid);
                if (em == 0.0) { lo = hi = mid; break; }
                if ((em < 0.0) == (elo < 0.0)) { lo = mid; elo = em; } else { hi = mid; }
            }
            roots.push_back(0.5 * (lo + hi));
        }
        if (e != 0.0) { s_prev = s; e_prev = e; }
    }
    return roots;
}

BcvaResult bcva(double t, double horizon, const LimitConfig& cfg, const CounterpartyParams& cps, double x_a,
                double x_b, std::size_t k, std::size_t kernel_intervals)
{
    cfg.validate();
    cps.validate();
    if (k == 0) throw DomainError("bcva: K must be >= 1");
    if (!(t <= horizon)) throw DomainError("bcva: need t <= T");
    BcvaResult res;
    res.k = k;
    res.t = t;
    res.horizon = horizon;
    if (t == horizon) return res;

    const double u_max = horizon - t;
    const AffineKernelCoeffs cb = build_kernel_coeffs(cps, cfg.lambda_c, DefaultSide::b_defaults, u_max, kernel_intervals);
    const AffineKernelCoeffs ca = build_kernel_coeffs(cps, cfg.lambda_c, DefaultSide::a_defaults, u_max, kernel_intervals);

    std::vector<double> cuts{t};
    for (double r : exposure_sign_changes(t, horizon, cfg)) cuts.push_back(r);
    cuts.push_back(horizon);

    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double lo = cuts[i], hi = cuts[i + 1];
        if (!(hi > lo)) continue;
        const double sign = exposure_limit(0.5 * (lo + hi), horizon, cfg);
        if (sign == 0.0) continue;
        const bool positive = sign > 0.0;
        auto integrand = [&](double s) {
            const double e = exposure_limit(s, horizon, cfg);
            const double part = positive ? std::max(e, 0.0) : std::max(-e, 0.0);
            if (part == 0.0) return 0.0;
            const double u = s - t;
            const double kernel = positive ? h1(u, x_a, x_b, cb) : h2(u, x_a, x_b, ca);
            return std::exp(-cfg.r * u) * part * survival_fhat(t, s, cfg) * kernel;
        };
        const double v = simpson_refine(integrand, lo, hi, 1e-6, 1e-15).value;
        (positive ? res.b_term : res.a_term) += v;
    }
    res.cva = cps.loss_b * res.b_term;
    res.dva = cps.loss_a * res.a_term;
    res.bcva = res.dva - res.cva;
    return res;
}

SweepParameter parse_sweep_parameter(const std::string& name)
{
    if (name == "sigma_star") return SweepParameter::sigma_star;
    if (name == "sigma_b") return SweepParameter::sigma_b;
    if (name == "lambda_c") return SweepParameter::lambda_c;
    if (name == "c_star") return SweepParameter::c_star;
    throw ConfigError("unknown sweep parameter '" + name + "' (sigma_star, sigma_b, lambda_c, c_star)");
}

std::string to_string(SweepParameter p)
{
    switch (p) {
    case SweepParameter::sigma_star: return "sigma_star";
    case SweepParameter::sigma_b: return "sigma_b";
    case SweepParameter::lambda_c: return "lambda_c";
    case SweepParameter::c_star: return "c_star";
    }
    return "?";
}

std::vector<CurveTable> sensitivity_sweep(SweepParameter parameter, std::span<const double> values,
                                          const LimitConfig& cfg, const CounterpartyParams& cps, double x_a,
                                          double x_b, double t, double horizon, unsigned workers)
{
    std::vector<BcvaResult> res(values.size());
    parallel_for(values.size(), workers, [&](std::size_t i) {
        LimitConfig c = cfg;
        CounterpartyParams p = cps;
        switch (parameter) {
        case SweepParameter::sigma_star: c.sigma_star = values[i]; break;
        case SweepParameter::sigma_b: p.b.sigma = values[i]; break;
        case SweepParameter::lambda_c: c.lambda_c = values[i]; break;
        case SweepParameter::c_star: c.c_star = values[i]; break;
        }
        res[i] = bcva(t, horizon, c, p, x_a, x_b);
    });
    const std::string name = to_string(parameter);
    CurveTable cva{"cva_vs_" + name, name, "cva", {}, {}, {}, {}};
    CurveTable dva{"dva_vs_" + name, name, "dva", {}, {}, {}, {}};
    for (std::size_t i = 0; i < values.size(); ++i) {
        cva.abscissa.push_back(values[i]);
        cva.value.push_back(res[i].cva);
        dva.abscissa.push_back(values[i]);
        dva.value.push_back(res[i].dva);
    }
    return {cva, dva};
}

BcvaMcEstimate mc_bcva_oracle(double horizon, const LimitConfig& cfg, const CounterpartyParams& cps, double x_a,
                              double x_b, std::size_t n_paths, double dt, std::uint64_t seed, unsigned workers)
{
    cfg.validate();
    CounterpartyParams c = cps;
    c.a.xi0 = x_a;
    c.b.xi0 = x_b;
    c.validate();
    const TimeGrid grid = TimeGrid::make(horizon, dt);

    // discounted, survival-weighted exposure at every grid node
    std::vector<double> weighted(grid.n_steps + 1);
    for (std::size_t i = 0; i <= grid.n_steps; ++i) {
        const double s = grid.time(i);
        weighted[i] = std::exp(-cfg.r * s) * exposure_limit(s, horizon, cfg) * survival_fhat(0.0, s, cfg);
    }

    std::vector<double> bv(n_paths), av(n_paths);
    parallel_for(n_paths, workers, [&](std::size_t m) {
        const auto [a, b] = simulate_counterparty_path(c, cfg.lambda_c, grid, seed, m, 1);
        auto node = [&](double tau) { return static_cast<std::size_t>(std::llround(tau / grid.dt)); };
        bv[m] = 0.0;
        av[m] = 0.0;
        if (b.default_time <= horizon && b.default_time <= a.default_time)
            bv[m] = std::max(weighted[node(b.default_time)], 0.0);
        if (a.default_time <= horizon && a.default_time <= b.default_time)
            av[m] = std::max(-weighted[node(a.default_time)], 0.0);
    });
    return {summarize(bv), summarize(av)};
}

} // namespace bcva
