#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>

#include "bcva/errors.hpp"

namespace bcva {

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    std::size_t intervals = 0;
};

/// Composite Simpson rule on an even number of subintervals.
template <class F>
double composite_simpson(F&& f, double a, double b, std::size_t intervals)
{
    if (intervals < 2 || intervals % 2 != 0)
        throw DomainError("composite_simpson: interval count must be even and >= 2");
    const double h = (b - a) / static_cast<double>(intervals);
    double odd = 0.0, even = 0.0;
    for (std::size_t i = 1; i < intervals; ++i) {
        const double v = f(a + h * static_cast<double>(i));
        if (i % 2) odd += v; else even += v;
    }
    return h / 3.0 * (f(a) + f(b) + 4.0 * odd + 2.0 * even);
}

/// Simpson with interval doubling; stops once the Richardson estimate
/// |S_2n - S_n|/15 is below max(rel_tol*|S_2n|, abs_tol).
template <class F>
QuadratureResult simpson_refine(F&& f, double a, double b, double rel_tol,
                                double abs_tol = 1e-14,
                                std::size_t max_intervals = std::size_t(1) << 20,
                                std::size_t min_intervals = 16)
{
    if (a == b) return {};
    std::size_t n = 2;
    double h = (b - a) / 2.0;
    const double ends = f(a) + f(b);
    double odd = f(a + h);
    double even = 0.0;
    double prev = h / 3.0 * (ends + 4.0 * odd);
    while (true) {
        n *= 2;
        h *= 0.5;
        even += odd;
        odd = 0.0;
        for (std::size_t i = 1; i < n; i += 2) odd += f(a + h * static_cast<double>(i));
        const double cur = h / 3.0 * (ends + 4.0 * odd + 2.0 * even);
        const double err = std::abs(cur - prev) / 15.0;
        if (n >= min_intervals && err <= std::max(rel_tol * std::abs(cur), abs_tol))
            return {cur + (cur - prev) / 15.0, err, n};
        if (n >= max_intervals)
            throw AccuracyError("simpson_refine: tolerance " + std::to_string(rel_tol) +
                                " not met with " + std::to_string(n) + " intervals (estimate " +
                                std::to_string(err) + ")");
        prev = cur;
    }
}

namespace detail {
inline constexpr std::array<double, 4> gl8_nodes{0.18343464249564978, 0.525532409916329,
                                                 0.7966664774136267, 0.9602898564975362};
inline constexpr std::array<double, 4> gl8_weights{0.36268378337836177, 0.31370664587788705,
                                                   0.22238103445337434, 0.10122853629037669};
} // namespace detail

/// Eight-point Gauss-Legendre rule on [a, b].
template <class F>
double gauss_legendre8(F&& f, double a, double b)
{
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        const double dx = half * detail::gl8_nodes[i];
        s += detail::gl8_weights[i] * (f(mid - dx) + f(mid + dx));
    }
    return s * half;
}

} // namespace bcva
