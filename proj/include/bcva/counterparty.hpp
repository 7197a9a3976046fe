#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bcva/curve_table.hpp"
#include "bcva/model.hpp"
#include "bcva/stats.hpp"

namespace bcva {

/// Which counterparty defaults first: B gives the H1 family, A the H2 family.
enum class DefaultSide { b_defaults, a_defaults };

/// Gridded exponent (hat_*) and prefactor (pre_*) coefficients of one kernel
/// family, with derivatives for cubic Hermite interpolation.
struct AffineKernelCoeffs {
    struct Values {
        double hat1, hat_a, hat_b;
        double pre1, pre_a, pre_b;
    };

    DefaultSide side = DefaultSide::b_defaults;
    double u_max = 0.0;
    double step = 0.0;
    std::vector<Values> value;
    std::vector<Values> slope;

    std::size_t intervals() const { return value.empty() ? 0 : value.size() - 1; }
    /// Interpolated coefficients; throws DomainError outside [0, u_max].
    Values at(double u) const;
};

AffineKernelCoeffs build_kernel_coeffs(const CounterpartyParams& cps, double lambda_c, DefaultSide side,
                                       double u_max, std::size_t intervals = 512);

/// E[exp(-int_0^u (xi^A + xi^B)) xi^B_u] from (x_a, x_b).
double h1(double u, double x_a, double x_b, const AffineKernelCoeffs& coeffs);

/// E[exp(-int_0^u (xi^A + xi^B)) xi^A_u] from (x_a, x_b).
double h2(double u, double x_a, double x_b, const AffineKernelCoeffs& coeffs);

/// E[exp(-int_0^u (xi^A + xi^B))].
double joint_survival_equal(double u, double x_a, double x_b, const AffineKernelCoeffs& coeffs);

struct BcvaResult {
    double b_term = 0.0;  // discounted positive-exposure integral against H1
    double a_term = 0.0;  // discounted negative-exposure integral against H2
    double cva = 0.0;     // loss_b * b_term
    double dva = 0.0;     // loss_a * a_term
    double bcva = 0.0;    // dva - cva
    std::size_t k = 1;
    double t = 0.0;
    double horizon = 0.0;

    double total_bcva() const { return static_cast<double>(k) * bcva; }
};

/// Per-name BCVA at time t with counterparty intensities (x_a, x_b).
BcvaResult bcva(double t, double horizon, const LimitConfig& cfg, const CounterpartyParams& cps, double x_a,
                double x_b, std::size_t k = 1, std::size_t kernel_intervals = 512);

/// Sign changes of the limit exposure on (t, T), located by bisection.
std::vector<double> exposure_sign_changes(double t, double horizon, const LimitConfig& cfg);

enum class SweepParameter { sigma_star, sigma_b, lambda_c, c_star };

SweepParameter parse_sweep_parameter(const std::string& name);
std::string to_string(SweepParameter p);

/// CVA and DVA curves over the value grid (first CVA, then DVA).
std::vector<CurveTable> sensitivity_sweep(SweepParameter parameter, std::span<const double> values,
                                          const LimitConfig& cfg, const CounterpartyParams& cps, double x_a,
                                          double x_b, double t, double horizon, unsigned workers = 1);

struct BcvaMcEstimate {
    Estimate b_term;
    Estimate a_term;
};

/// Simulates the counterparties, evaluates the limit exposure at the first default.
BcvaMcEstimate mc_bcva_oracle(double horizon, const LimitConfig& cfg, const CounterpartyParams& cps, double x_a,
                              double x_b, std::size_t n_paths, double dt, std::uint64_t seed, unsigned workers = 1);

} // namespace bcva
