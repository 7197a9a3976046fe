#pragma once

#include <cmath>
#include <cstddef>
#include <variant>
#include <vector>

#include "bcva/model.hpp"
#include "bcva/simulation.hpp"
#include "bcva/stats.hpp"

namespace bcva {

/// Name "type" tuple (alpha, kappa, sigma, c, d, lambda_hat).
struct TypeParams {
    double alpha = 0.0;
    double kappa = 0.0;
    double sigma = 0.0;
    double c = 0.0;
    double d = 0.0;
    double lambda_hat = 0.0;
};

/// Fixed jump sizes (y1 common, y2 idiosyncratic).
struct JumpPoint {
    double y1 = 0.0;
    double y2 = 0.0;
};

struct TypeAtom {
    double weight = 1.0;
    TypeParams p;
};

struct JumpAtom {
    double weight = 1.0;
    std::variant<JumpPoint, ExpJumpParams> law;
};

struct InitialAtom {
    double weight = 1.0;
    double x = 0.0;
};

/// Finite atom sets for the parameter, jump-size and initial-intensity laws.
struct MeasureAtoms {
    std::vector<TypeAtom> q;
    std::vector<JumpAtom> eta;
    std::vector<InitialAtom> phi0;
    double lambda_c = 0.0;

    void validate() const;
};

/// Limit survival F(t, s); depends on s - t only.
double survival_fhat(double t, double s, const LimitConfig& cfg);

/// Limit exposure per unit name.
double exposure_limit(double t, double horizon, const LimitConfig& cfg);

/// Dirac atoms at the limiting parameters with exponential jump laws.
MeasureAtoms dirac_atoms(const LimitConfig& cfg);

/// nu_t(exp(theta x)) over the product of atom sets.
double limit_transform(double theta, double t, const MeasureAtoms& atoms);

double limit_measure_mass(double t, const MeasureAtoms& atoms);

double limit_exp_test(double theta, double t, const LimitConfig& cfg);

struct TestFunction {
    enum class Kind { one, exponential } kind = Kind::one;
    double theta = 0.0;

    double operator()(double x) const { return kind == Kind::one ? 1.0 : std::exp(theta * x); }
};

/// Path average of (1/K) sum f(xi_t) 1{tau > t} over the names.
Estimate empirical_measure_eval(const PathSet& paths, const TestFunction& f, double t);

/// Per-path value of the same average, for streaming use.
double empirical_measure_path(const SimulatedPath& path, std::size_t record, double t, const TestFunction& f);

/// The ladder x*(1+1/k), ..., L*(1-1/k), z = +1.
std::vector<NameParams> build_name_sequence(const LimitConfig& cfg, std::size_t k_names, double rho = 0.5);

} // namespace bcva
