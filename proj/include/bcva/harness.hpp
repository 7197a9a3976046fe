#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bcva/config.hpp"
#include "bcva/counterparty.hpp"
#include "bcva/curve_table.hpp"
#include "bcva/model.hpp"
#include "bcva/stats.hpp"

namespace bcva {

enum class ExperimentKind { convergence, bcva_sweep, validate, measure_convergence };

ExperimentKind parse_experiment_kind(const std::string& name);
std::string to_string(ExperimentKind kind);
/// Experiments that draw random numbers and therefore need an explicit seed.
bool needs_seed(ExperimentKind kind);

inline constexpr std::uint64_t default_validation_seed = 20240601;

struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::validate;
    KeyValueConfig config = KeyValueConfig::defaults();
    std::optional<std::uint64_t> seed;
    unsigned workers = 1;
    std::string output_dir;

    std::vector<std::size_t> k_list() const { return config.get_sizes("experiment.k_list"); }
    std::size_t paths() const { return config.get_size("experiment.paths"); }
    double horizon() const { return config.get_double("experiment.horizon"); }
    /// experiment.dt, or 1e-3 * horizon when it is 0.
    double dt() const;
    void validate() const;
};

struct ModelSetup {
    LimitConfig limit;
    CounterpartyParams cps;
    double rho = 0.5;
};

ModelSetup model_from_config(const KeyValueConfig& cfg);

/// n uniform points on [0, horizon].
std::vector<double> curve_times(double horizon, std::size_t points);

std::uint64_t repetition_seed(std::uint64_t seed, std::size_t rep);

/// One portfolio simulation: MC exposure and empirical-measure curves.
struct PortfolioRun {
    std::size_t k = 0;
    std::uint64_t seed = 0;
    std::vector<double> times;
    std::vector<Estimate> exposure;
    std::vector<Estimate> mass;      // nu_t(1)
    std::vector<Estimate> exp_test;  // nu_t(exp(theta x))
};

PortfolioRun run_portfolio_mc(const ModelSetup& model, std::size_t k, std::size_t paths, double horizon, double dt,
                              std::size_t curve_points, std::uint64_t seed, double theta, unsigned workers);

/// MC runs over a K ladder and repetitions, with the limit curves they target.
struct LadderStudy {
    std::vector<double> times;
    std::vector<double> limit_exposure;
    std::vector<double> limit_mass;
    std::vector<double> limit_exp;
    std::vector<std::size_t> k_list;
    std::vector<std::vector<PortfolioRun>> runs;  // [k index][repetition]

    /// sup_t |MC - limit| of one run.
    double exposure_error(std::size_t ki, std::size_t rep) const;
    double mass_error(std::size_t ki, std::size_t rep) const;
    double exp_error(std::size_t ki, std::size_t rep) const;
    /// Medians over repetitions.
    double median_exposure_error(std::size_t ki) const;
    double median_mass_error(std::size_t ki) const;
    double median_exp_error(std::size_t ki) const;
};

LadderStudy run_ladder_study(const ModelSetup& model, const std::vector<std::size_t>& k_list, std::size_t reps,
                             std::size_t paths, double horizon, double dt, std::size_t curve_points,
                             std::uint64_t seed, double theta, unsigned workers);

/// Largest residual of the coefficient ODEs at interval midpoints, with
/// derivatives taken by central differences of the interpolant.
double kernel_ode_residual(const AffineKernelCoeffs& coeffs, const CounterpartyParams& cps, double lambda_c);

struct ValidationCheck {
    std::string name;
    double value = 0.0;      // closed form
    double reference = 0.0;  // oracle
    double error = 0.0;
    double tolerance = 0.0;
    bool passed = false;
};

struct ValidationReport {
    std::vector<ValidationCheck> checks;

    bool passed() const;
    std::vector<std::string> failed() const;
    std::string to_text() const;
};

struct ExperimentOutput {
    std::vector<CurveTable> tables;
    nlohmann::json summary = nlohmann::json::object();
    std::string report;  // validation text report
    bool passed = true;
};

ExperimentOutput run_convergence(const ExperimentSpec& spec);
ExperimentOutput run_bcva_sweeps(const ExperimentSpec& spec);
ExperimentOutput run_measure_convergence(const ExperimentSpec& spec);
ValidationReport run_validation(const ExperimentSpec& spec);
ExperimentOutput run_experiment(const ExperimentSpec& spec);

/// Writes <label>.csv per table, manifest.json, and the report if any.
void write_outputs(const ExperimentSpec& spec, const ExperimentOutput& out);

} // namespace bcva
