#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace bcva {

inline constexpr const char* library_version = "1.0.0";

struct Provenance {
    bool seeded = false;
    std::uint64_t seed = 0;
    std::string config_hash;
};

/// Labeled (abscissa, value[, stderr]) series.
struct CurveTable {
    std::string label;
    std::string abscissa_name = "x";
    std::string value_name = "value";
    std::vector<double> abscissa;
    std::vector<double> value;
    std::vector<double> std_error;  // empty when absent
    Provenance provenance;

    bool has_error() const { return !std_error.empty(); }
    void validate() const;
    /// Header row, %.10e floats, LF line endings.
    std::string to_csv() const;
};

/// printf-style %.10e.
std::string format_sci(double v);

} // namespace bcva
