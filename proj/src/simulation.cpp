#include "bcva/simulation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <limits>
#include <random>

#include "bcva/errors.hpp"
#include "bcva/parallel.hpp"
#include "bcva/quadrature.hpp"
#include "bcva/riccati.hpp"
#include "bcva/rng.hpp"

namespace bcva {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

/// Poisson event times on (0, horizon].
std::vector<double> poisson_times(double rate, double horizon, Rng& rng)
{
    std::vector<double> out;
    if (!(rate > 0.0)) return out;
    std::exponential_distribution<double> gap(rate);
    for (double t = gap(rng); t <= horizon; t += gap(rng)) out.push_back(t);
    return out;
}

struct EntityInputs {
    const IntensityParams* p;
    std::span<const std::size_t> common_steps;
    std::span<const double> common_sizes;  // unscaled marks, one per common event
    std::function<double(Rng&)> idio_size;
};

/// Euler full-truncation path of one entity. Draw order on `rng`: threshold,
/// idiosyncratic event times and sizes, then one normal per step.
EntityPath simulate_entity(const EntityInputs& in, const TimeGrid& grid, Rng& rng, std::size_t stride)
{
    const IntensityParams& p = *in.p;
    EntityPath out;
    out.threshold = std::exponential_distribution<double>(1.0)(rng);

    std::vector<double> idio_sizes;
    for (double tau : poisson_times(p.lambda_hat, grid.horizon(), rng)) {
        out.idio_jump_steps.push_back(grid.event_step(tau));
        idio_sizes.push_back(in.idio_size(rng));
    }

    const std::size_t n = grid.n_steps;
    const std::size_t n_rec = n / stride + 1;
    out.intensity.reserve(n_rec);
    out.integrated.reserve(n_rec);

    const double dt = grid.dt, sqdt = std::sqrt(dt);
    const bool cir = p.rho == 0.5;
    std::normal_distribution<double> normal(0.0, 1.0);

    double x = p.xi0;
    double xp = std::max(x, 0.0);
    double cum = 0.0;
    out.default_time = out.threshold <= 0.0 ? 0.0 : inf;
    out.intensity.push_back(xp);
    out.integrated.push_back(0.0);

    std::size_t ci = 0, ii = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double zn = normal(rng);
        const double vol = p.sigma * (cir ? std::sqrt(xp) : std::pow(xp, p.rho));
        x += (p.alpha - p.kappa * xp) * dt + vol * sqdt * zn;
        const std::size_t node = i + 1;
        while (ci < in.common_steps.size() && in.common_steps[ci] == node) x += p.c * in.common_sizes[ci++];
        while (ii < out.idio_jump_steps.size() && out.idio_jump_steps[ii] == node) x += p.d * idio_sizes[ii++];
        const double xn = std::max(x, 0.0);
        cum += 0.5 * (xp + xn) * dt;
        if (out.default_time == inf && cum >= out.threshold) out.default_time = grid.time(node);
        xp = xn;
        if (node % stride == 0) {
            out.intensity.push_back(xn);
            out.integrated.push_back(cum);
        }
    }
    return out;
}

void check_grid(const TimeGrid& grid, std::size_t stride)
{
    if (stride == 0 || grid.n_steps % stride != 0)
        throw ConfigError("record stride must divide the number of time steps");
}

/// Common events and the counterparties' BVE marks for one path.
struct CommonEvents {
    std::vector<std::size_t> steps;
    std::vector<double> mark_a, mark_b;
};

CommonEvents common_events(double lambda_c, const BveParams& marks, const TimeGrid& grid, std::uint64_t seed,
                           std::size_t path)
{
    CommonEvents ev;
    Rng rng = make_stream(seed, path, stream_id::common_events);
    for (double tau : poisson_times(lambda_c, grid.horizon(), rng)) ev.steps.push_back(grid.event_step(tau));
    Rng mrng = make_stream(seed, path, stream_id::counterparty_marks);
    for (std::size_t i = 0; i < ev.steps.size(); ++i) {
        const auto [ya, yb] = sample_bve(marks, mrng);
        ev.mark_a.push_back(ya);
        ev.mark_b.push_back(yb);
    }
    return ev;
}

std::pair<EntityPath, EntityPath> simulate_counterparties(const CounterpartyParams& cps, const CommonEvents& ev,
                                                          const TimeGrid& grid, std::uint64_t seed,
                                                          std::size_t path, std::size_t stride)
{
    const BveParams idio = cps.idiosyncratic_jumps;
    Rng ra = make_stream(seed, path, stream_id::entity_a);
    EntityInputs ia{&cps.a, ev.steps, ev.mark_a, [idio](Rng& g) { return sample_bve(idio, g).first; }};
    EntityPath a = simulate_entity(ia, grid, ra, stride);
    Rng rb = make_stream(seed, path, stream_id::entity_b);
    EntityInputs ib{&cps.b, ev.steps, ev.mark_b, [idio](Rng& g) { return sample_bve(idio, g).second; }};
    EntityPath b = simulate_entity(ib, grid, rb, stride);
    return {std::move(a), std::move(b)};
}

} // namespace

TimeGrid TimeGrid::make(double horizon, double dt, std::size_t multiple_of)
{
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("time step must be positive");
    if (!(horizon >= dt) || !std::isfinite(horizon)) throw ConfigError("horizon must be >= time step");
    if (multiple_of == 0) multiple_of = 1;
    auto n = static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
    n = (n + multiple_of - 1) / multiple_of * multiple_of;
    return {horizon / static_cast<double>(n), n};
}

std::size_t TimeGrid::event_step(double tau) const
{
    const auto k = static_cast<std::size_t>(std::ceil(tau / dt));
    return std::clamp<std::size_t>(k, 1, n_steps);
}

std::size_t PathSet::record_index(double t) const
{
    const double pos = t / (grid.dt * static_cast<double>(record_stride));
    const double j = std::round(pos);
    if (j < 0.0 || j >= static_cast<double>(n_records()) || std::abs(pos - j) > 1e-7)
        throw DomainError("time " + std::to_string(t) + " is not a recorded grid node");
    return static_cast<std::size_t>(j);
}

SimulatedPath simulate_path(const PortfolioModel& model, const TimeGrid& grid, std::uint64_t seed,
                            std::size_t path_index, std::size_t record_stride)
{
    check_grid(grid, record_stride);
    SimulatedPath out;
    CommonEvents ev = common_events(model.lambda_c, model.counterparties.common_jumps, grid, seed, path_index);

    const double g1 = model.name_jumps.gamma1, g2 = model.name_jumps.gamma2;
    out.names.reserve(model.names.size());
    std::vector<double> sizes(ev.steps.size());
    for (std::size_t k = 0; k < model.names.size(); ++k) {
        Rng rng = make_stream(seed, path_index, stream_id::first_name + k);
        for (double& y : sizes) y = sample_exp(g1, rng);
        EntityInputs in{&model.names[k].intensity, ev.steps, sizes, [g2](Rng& g) { return sample_exp(g2, g); }};
        out.names.push_back(simulate_entity(in, grid, rng, record_stride));
    }
    auto [a, b] = simulate_counterparties(model.counterparties, ev, grid, seed, path_index, record_stride);
    out.a = std::move(a);
    out.b = std::move(b);
    out.common_jump_steps = std::move(ev.steps);
    return out;
}

std::pair<EntityPath, EntityPath> simulate_counterparty_path(const CounterpartyParams& cps, double lambda_c,
                                                             const TimeGrid& grid, std::uint64_t seed,
                                                             std::size_t path_index, std::size_t record_stride)
{
    check_grid(grid, record_stride);
    const CommonEvents ev = common_events(lambda_c, cps.common_jumps, grid, seed, path_index);
    return simulate_counterparties(cps, ev, grid, seed, path_index, record_stride);
}

PathSet simulate_paths(const PortfolioModel& model, const SimulationSettings& s)
{
    model.validate();
    if (s.n_paths == 0) throw ConfigError("n_paths must be >= 1");
    PathSet ps;
    ps.grid = TimeGrid::make(s.horizon, s.dt, s.grid_multiple);
    ps.record_stride = s.record_stride;
    ps.seed = s.seed;
    check_grid(ps.grid, s.record_stride);
    ps.paths.resize(s.n_paths);
    parallel_for(s.n_paths, s.workers,
                 [&](std::size_t m) { ps.paths[m] = simulate_path(model, ps.grid, s.seed, m, s.record_stride); });
    return ps;
}

std::vector<std::vector<double>> sample_defaults(const PathSet& ps)
{
    if (ps.record_stride != 1) throw DomainError("sample_defaults: needs every grid node recorded");
    const double dt = ps.grid.dt;
    auto one = [&](const EntityPath& e) {
        if (e.threshold <= 0.0) return 0.0;
        double cum = 0.0;
        for (std::size_t i = 1; i < e.intensity.size(); ++i) {
            cum += 0.5 * (e.intensity[i - 1] + e.intensity[i]) * dt;
            if (cum >= e.threshold) return ps.grid.time(i);
        }
        return inf;
    };
    std::vector<std::vector<double>> out;
    out.reserve(ps.paths.size());
    for (const auto& p : ps.paths) {
        std::vector<double> row;
        row.reserve(p.names.size() + 2);
        for (const auto& e : p.names) row.push_back(one(e));
        row.push_back(one(p.a));
        row.push_back(one(p.b));
        out.push_back(std::move(row));
    }
    return out;
}

// ---------------------------------------------------------------------------
// exposure estimator

ExposureEstimator::ExposureEstimator(std::span<const NameParams> names, const ExpJumpParams& jumps,
                                     double lambda_c, double t, double horizon, double r, double rel_tol)
    : k_(names.size()), u_(horizon - t), r_(r)
{
    if (names.empty()) throw DomainError("ExposureEstimator: no names");
    if (!(t <= horizon)) throw DomainError("ExposureEstimator: t must be <= horizon");
    jumps.validate();
    for (const auto& nm : names) {
        coef_.push_back(nm.z * (nm.spread + r * nm.loss));
        zl_.push_back(nm.z * nm.loss);
    }
    disc_end_ = std::exp(-r * u_);
    if (u_ == 0.0) {
        n_ = 0;
        return;
    }

    // probe intensities for the refinement test
    std::vector<std::array<double, 2>> probes;
    for (const auto& nm : names) {
        const auto& p = nm.intensity;
        double level = p.xi0;
        if (p.kappa > 0.0)
            level = std::max(level, (p.alpha + p.c * lambda_c / jumps.gamma1 + p.d * p.lambda_hat / jumps.gamma2) /
                                        p.kappa);
        probes.push_back({p.xi0, 4.0 * level});
    }
    auto integrals = [&](std::size_t n, const std::vector<double>& a, const std::vector<double>& b) {
        std::vector<double> out;
        const double h = u_ / static_cast<double>(n);
        for (std::size_t k = 0; k < k_; ++k)
            for (double x : probes[k]) {
                double s = 0.0;
                for (std::size_t j = 0; j <= n; ++j) {
                    const double wj = (j == 0 || j == n) ? 1.0 : (j % 2 ? 4.0 : 2.0);
                    s += wj * std::exp(-r * h * static_cast<double>(j) + a[k * (n + 1) + j] + b[k * (n + 1) + j] * x);
                }
                out.push_back(s * h / 3.0);
            }
        return out;
    };

    std::size_t n = 8;
    std::vector<double> a, b;
    build(names, jumps, lambda_c, n, a, b);
    std::vector<double> prev = integrals(n, a, b);
    while (true) {
        const std::size_t n2 = 2 * n;
        build(names, jumps, lambda_c, n2, a, b);
        std::vector<double> cur = integrals(n2, a, b);
        bool ok = true;
        for (std::size_t i = 0; i < cur.size() && ok; ++i)
            ok = std::abs(cur[i] - prev[i]) / 15.0 <= rel_tol * std::abs(cur[i]) + 1e-14;
        n = n2;
        if (ok) break;
        if (n >= 8192) throw AccuracyError("ExposureEstimator: Simpson refinement did not converge");
        prev = std::move(cur);
    }
    n_ = n;
    a_ = std::move(a);
    b_ = std::move(b);
    const double h = u_ / static_cast<double>(n_);
    w_.resize(n_ + 1);
    for (std::size_t j = 0; j <= n_; ++j) {
        const double wj = (j == 0 || j == n_) ? 1.0 : (j % 2 ? 4.0 : 2.0);
        w_[j] = wj * h / 3.0 * std::exp(-r * h * static_cast<double>(j));
    }
}

void ExposureEstimator::build(std::span<const NameParams> names, const ExpJumpParams& jumps, double lambda_c,
                              std::size_t n, std::vector<double>& a, std::vector<double>& b) const
{
    a.assign(k_ * (n + 1), 0.0);
    b.assign(k_ * (n + 1), 0.0);
    const double h = u_ / static_cast<double>(n);
    for (std::size_t k = 0; k < k_; ++k) {
        const IntensityParams& p = names[k].intensity;
        const bool jumpy = p.c * lambda_c > 0.0 || p.d * p.lambda_hat > 0.0;
        auto jump_rate = [&](double v) {
            const double bv = riccati_B(p.kappa, p.sigma, v);
            return lambda_c * (mgf_exp(p.c * bv, jumps.gamma1) - 1.0) +
                   p.lambda_hat * (mgf_exp(p.d * bv, jumps.gamma2) - 1.0);
        };
        double cum = 0.0;
        for (std::size_t j = 0; j <= n; ++j) {
            const double u = h * static_cast<double>(j);
            if (jumpy && j > 0) cum += gauss_legendre8(jump_rate, u - h, u);
            b[k * (n + 1) + j] = riccati_B(p.kappa, p.sigma, u);
            a[k * (n + 1) + j] = p.alpha * integral_B(p.kappa, p.sigma, u) + cum;
        }
    }
}

double ExposureEstimator::evaluate(std::span<const double> xi) const
{
    if (xi.size() != k_) throw DomainError("ExposureEstimator: intensity vector has wrong size");
    if (n_ == 0) return 0.0;
    double total = 0.0;
    for (std::size_t k = 0; k < k_; ++k) {
        const double* a = &a_[k * (n_ + 1)];
        const double* b = &b_[k * (n_ + 1)];
        const double x = xi[k];
        double s = 0.0, last = 0.0;
        for (std::size_t j = 0; j <= n_; ++j) {
            const double hg = std::exp(a[j] + b[j] * x);
            s += w_[j] * hg;
            last = hg;
        }
        total += zl_[k] * (disc_end_ * last - 1.0) + coef_[k] * s;
    }
    return total / static_cast<double>(k_);
}

Estimate mc_exposure(const PathSet& ps, std::span<const NameParams> names, const ExpJumpParams& jumps,
                     double lambda_c, double t, double horizon, double r)
{
    const std::size_t j = ps.record_index(t);
    const ExposureEstimator est(names, jumps, lambda_c, t, horizon, r);
    std::vector<double> vals(ps.paths.size());
    std::vector<double> xi(names.size());
    for (std::size_t m = 0; m < ps.paths.size(); ++m) {
        const auto& p = ps.paths[m];
        if (p.names.size() != names.size()) throw DomainError("mc_exposure: name count mismatch");
        for (std::size_t k = 0; k < names.size(); ++k) xi[k] = p.names[k].intensity[j];
        vals[m] = est.evaluate(xi);
    }
    return summarize(vals);
}

// ---------------------------------------------------------------------------
// oracles

std::vector<KernelMcEstimate> mc_counterparty_kernels(const CounterpartyParams& cps, double lambda_c,
                                                      double x_a, double x_b, std::span<const double> u_list,
                                                      std::size_t n_paths, double dt, std::uint64_t seed,
                                                      unsigned workers)
{
    if (u_list.empty()) throw DomainError("mc_counterparty_kernels: empty u list");
    const double u_max = *std::max_element(u_list.begin(), u_list.end());
    if (!(u_max > 0.0)) throw DomainError("mc_counterparty_kernels: u must be > 0");
    CounterpartyParams c = cps;
    c.a.xi0 = x_a;
    c.b.xi0 = x_b;
    c.validate();
    const TimeGrid grid = TimeGrid::make(u_max, dt);
    std::vector<std::size_t> idx;
    for (double u : u_list) {
        const double pos = u / grid.dt;
        if (!(u > 0.0) || std::abs(pos - std::round(pos)) > 1e-6)
            throw DomainError("mc_counterparty_kernels: every u must be a positive multiple of the step");
        idx.push_back(static_cast<std::size_t>(std::round(pos)));
    }
    const std::size_t nu = u_list.size();
    std::vector<double> surv(n_paths * nu), v1(n_paths * nu), v2(n_paths * nu);
    parallel_for(n_paths, workers, [&](std::size_t m) {
        const auto [a, b] = simulate_counterparty_path(c, lambda_c, grid, seed, m, 1);
        for (std::size_t i = 0; i < nu; ++i) {
            const std::size_t j = idx[i];
            const double s = std::exp(-(a.integrated[j] + b.integrated[j]));
            surv[m * nu + i] = s;
            v1[m * nu + i] = s * b.intensity[j];
            v2[m * nu + i] = s * a.intensity[j];
        }
    });
    std::vector<KernelMcEstimate> out;
    std::vector<double> col(n_paths);
    for (std::size_t i = 0; i < nu; ++i) {
        KernelMcEstimate e;
        e.u = u_list[i];
        for (std::size_t m = 0; m < n_paths; ++m) col[m] = surv[m * nu + i];
        e.joint_survival = summarize(col);
        for (std::size_t m = 0; m < n_paths; ++m) col[m] = v1[m * nu + i];
        e.h1 = summarize(col);
        for (std::size_t m = 0; m < n_paths; ++m) col[m] = v2[m * nu + i];
        e.h2 = summarize(col);
        out.push_back(e);
    }
    return out;
}

Estimate mc_h1_oracle(const CounterpartyParams& cps, double lambda_c, double u, double x_a, double x_b,
                      std::size_t n_paths, std::uint64_t seed, double dt, unsigned workers)
{
    const double us[] = {u};
    return mc_counterparty_kernels(cps, lambda_c, x_a, x_b, us, n_paths, dt, seed, workers).front().h1;
}

Estimate mc_limit_transform(const LimitConfig& cfg, double theta, double u, std::size_t n_paths, double dt,
                            std::uint64_t seed, unsigned workers)
{
    cfg.validate();
    if (!(u > 0.0)) throw DomainError("mc_limit_transform: u must be > 0");
    const TimeGrid grid = TimeGrid::make(u, dt);
    std::vector<double> vals(n_paths);
    parallel_for(n_paths, workers, [&](std::size_t m) {
        Rng rng = make_stream(seed, m, 0);
        const double y1 = sample_exp(cfg.gamma1, rng);
        const double y2 = sample_exp(cfg.gamma2, rng);
        const double drift = cfg.alpha_star + cfg.d_star * cfg.lambda_hat_star * y2 + cfg.c_star * cfg.lambda_c * y1;
        std::normal_distribution<double> normal(0.0, 1.0);
        const double h = grid.dt, sqh = std::sqrt(h);
        double x = cfg.x_star, xp = x, cum = 0.0;
        for (std::size_t i = 0; i < grid.n_steps; ++i) {
            x += (drift - cfg.kappa_star * xp) * h + cfg.sigma_star * std::sqrt(xp) * sqh * normal(rng);
            const double xn = std::max(x, 0.0);
            cum += 0.5 * (xp + xn) * h;
            xp = xn;
        }
        vals[m] = std::exp(-cum + theta * xp);
    });
    return summarize(vals);
}

// ---------------------------------------------------------------------------
// dump

namespace {

template <class T>
void put(std::ofstream& f, T v)
{
    static_assert(sizeof(T) == 8);
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    f.write(reinterpret_cast<const char*>(&bits), 8);
}

template <class T>
T get(std::ifstream& f)
{
    std::uint64_t bits = 0;
    if (!f.read(reinterpret_cast<char*>(&bits), 8)) throw DomainError("read_pathset_dump: truncated file");
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    T v;
    std::memcpy(&v, &bits, 8);
    return v;
}

constexpr std::uint64_t dump_magic = 0x3148544150415643ULL;  // "CVAPATH1"

} // namespace

void write_pathset_dump(const PathSet& ps, const std::string& file)
{
    std::ofstream f(file, std::ios::binary);
    if (!f) throw ConfigError("cannot open " + file);
    const std::uint64_t k = ps.paths.empty() ? 0 : ps.paths.front().names.size();
    put(f, dump_magic);
    put<std::uint64_t>(f, k);
    put<std::uint64_t>(f, k + 2);
    put<std::uint64_t>(f, ps.paths.size());
    put<std::uint64_t>(f, ps.n_records());
    put(f, ps.grid.dt);
    put(f, ps.grid.horizon());
    put(f, ps.seed);
    put<std::uint64_t>(f, ps.record_stride);
    for (std::size_t j = 0; j < ps.n_records(); ++j) put(f, ps.record_time(j));
    for (const auto& p : ps.paths) {
        for (const auto& e : p.names)
            for (double v : e.intensity) put(f, v);
        for (double v : p.a.intensity) put(f, v);
        for (double v : p.b.intensity) put(f, v);
    }
}

PathSetDump read_pathset_dump(const std::string& file)
{
    std::ifstream f(file, std::ios::binary);
    if (!f) throw ConfigError("cannot open " + file);
    if (get<std::uint64_t>(f) != dump_magic) throw DomainError("read_pathset_dump: bad magic");
    PathSetDump d;
    d.n_names = get<std::uint64_t>(f);
    d.n_entities = get<std::uint64_t>(f);
    d.n_paths = get<std::uint64_t>(f);
    d.n_records = get<std::uint64_t>(f);
    d.dt = get<double>(f);
    d.horizon = get<double>(f);
    d.seed = get<std::uint64_t>(f);
    d.record_stride = get<std::uint64_t>(f);
    d.times.resize(d.n_records);
    for (auto& t : d.times) t = get<double>(f);
    d.values.resize(d.n_paths * d.n_entities * d.n_records);
    for (auto& v : d.values) v = get<double>(f);
    return d;
}

} // namespace bcva
