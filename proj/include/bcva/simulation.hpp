#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bcva/model.hpp"
#include "bcva/stats.hpp"

namespace bcva {

/// Uniform grid t_i = i*dt, i = 0..n_steps.
struct TimeGrid {
    double dt = 0.0;
    std::size_t n_steps = 0;

    /// Smallest step count >= horizon/dt that is a multiple of `multiple_of`.
    static TimeGrid make(double horizon, double dt, std::size_t multiple_of = 1);
    double time(std::size_t i) const { return dt * static_cast<double>(i); }
    double horizon() const { return time(n_steps); }
    /// Step index of an event time (the first node at or after it), in [1, n_steps].
    std::size_t event_step(double tau) const;
};

struct SimulationSettings {
    double horizon = 1.0;
    double dt = 1e-3;
    std::size_t n_paths = 1;
    std::uint64_t seed = 0;
    std::size_t record_stride = 1;
    std::size_t grid_multiple = 1;
    unsigned workers = 1;
};

struct EntityPath {
    std::vector<double> intensity;   // positive part at recorded nodes
    std::vector<double> integrated;  // trapezoidal integral at recorded nodes
    std::vector<std::size_t> idio_jump_steps;
    double threshold = 0.0;
    double default_time = 0.0;       // +inf when no default within the horizon

    bool survives(double t) const { return default_time > t; }
};

struct SimulatedPath {
    std::vector<std::size_t> common_jump_steps;
    std::vector<EntityPath> names;
    EntityPath a;
    EntityPath b;
};

struct PathSet {
    TimeGrid grid;
    std::size_t record_stride = 1;
    std::uint64_t seed = 0;
    std::vector<SimulatedPath> paths;

    std::size_t n_records() const { return grid.n_steps / record_stride + 1; }
    double record_time(std::size_t j) const { return grid.time(j * record_stride); }
    /// Index of t among the recorded nodes; throws DomainError if t is not one.
    std::size_t record_index(double t) const;
};

namespace stream_id {
inline constexpr std::uint64_t common_events = 0;
inline constexpr std::uint64_t counterparty_marks = 1;
inline constexpr std::uint64_t entity_a = 2;
inline constexpr std::uint64_t entity_b = 3;
inline constexpr std::uint64_t first_name = 4;
} // namespace stream_id

/// Simulates path `path_index`; identical for any path count or worker count.
SimulatedPath simulate_path(const PortfolioModel& model, const TimeGrid& grid, std::uint64_t seed,
                            std::size_t path_index, std::size_t record_stride);

PathSet simulate_paths(const PortfolioModel& model, const SimulationSettings& settings);

/// Counterparty pair alone (same streams as inside simulate_path), started at a.xi0, b.xi0.
std::pair<EntityPath, EntityPath> simulate_counterparty_path(const CounterpartyParams& cps, double lambda_c,
                                                             const TimeGrid& grid, std::uint64_t seed,
                                                             std::size_t path_index, std::size_t record_stride);

/// Default times recomputed from stored paths (record_stride must be 1).
/// Per path: names first, then A, then B.
std::vector<std::vector<double>> sample_defaults(const PathSet& paths);

/// Per-path estimator of the portfolio exposure per name at time t.
class ExposureEstimator {
public:
    ExposureEstimator(std::span<const NameParams> names, const ExpJumpParams& jumps, double lambda_c,
                      double t, double horizon, double r, double rel_tol = 1e-6);

    /// xi_t holds the intensity of every name at time t.
    double evaluate(std::span<const double> xi_t) const;
    std::size_t intervals() const { return n_; }

private:
    void build(std::span<const NameParams> names, const ExpJumpParams& jumps, double lambda_c,
               std::size_t n, std::vector<double>& a, std::vector<double>& b) const;

    std::size_t k_ = 0;
    std::size_t n_ = 0;
    double u_ = 0.0;
    double r_ = 0.0;
    std::vector<double> w_;
    std::vector<double> a_, b_;
    std::vector<double> coef_, zl_;
    double disc_end_ = 1.0;
};

Estimate mc_exposure(const PathSet& paths, std::span<const NameParams> names, const ExpJumpParams& jumps,
                     double lambda_c, double t, double horizon, double r);

struct KernelMcEstimate {
    double u = 0.0;
    Estimate joint_survival;  // E[exp(-int (xi^A + xi^B))]
    Estimate h1;              // ... times xi^B_u
    Estimate h2;              // ... times xi^A_u
};

/// Counterparty-only simulation from (x_a, x_b) for the kernel oracles.
std::vector<KernelMcEstimate> mc_counterparty_kernels(const CounterpartyParams& cps, double lambda_c,
                                                      double x_a, double x_b, std::span<const double> u_list,
                                                      std::size_t n_paths, double dt, std::uint64_t seed,
                                                      unsigned workers = 1);

Estimate mc_h1_oracle(const CounterpartyParams& cps, double lambda_c, double u, double x_a, double x_b,
                      std::size_t n_paths, std::uint64_t seed, double dt = 1e-3, unsigned workers = 1);

/// E[exp(-int_0^u X) exp(theta X_u)] for the limit SDE with drift alpha* + D(y).
Estimate mc_limit_transform(const LimitConfig& cfg, double theta, double u, std::size_t n_paths, double dt,
                            std::uint64_t seed, unsigned workers = 1);

/// Little-endian dump: header (magic, K, entities, paths, records, dt, T, seed, stride)
/// followed by grid times and per-path, per-entity recorded intensities.
void write_pathset_dump(const PathSet& paths, const std::string& file);

struct PathSetDump {
    std::uint64_t n_names = 0, n_entities = 0, n_paths = 0, n_records = 0;
    double dt = 0.0, horizon = 0.0;
    std::uint64_t seed = 0, record_stride = 0;
    std::vector<double> times;
    std::vector<double> values;  // [path][entity][record]
};

PathSetDump read_pathset_dump(const std::string& file);

} // namespace bcva
