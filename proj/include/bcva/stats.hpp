#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace bcva {

struct Estimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;
};

/// Mean and standard error, summed in index order.
inline Estimate summarize(std::span<const double> v)
{
    Estimate e;
    e.n = v.size();
    if (v.empty()) return e;
    double s = 0.0;
    for (double x : v) s += x;
    e.mean = s / static_cast<double>(v.size());
    if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - e.mean) * (x - e.mean);
        e.std_error = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
    }
    return e;
}

} // namespace bcva
