#include "bcva/curve_table.hpp"

#include <cstdio>

#include "bcva/errors.hpp"

namespace bcva {

std::string format_sci(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10e", v);
    return buf;
}

void CurveTable::validate() const
{
    if (abscissa.size() != value.size() || (has_error() && std_error.size() != value.size()))
        throw DomainError("CurveTable " + label + ": column lengths differ");
    for (double e : std_error)
        if (!(e >= 0.0)) throw DomainError("CurveTable " + label + ": negative stderr");
}

std::string CurveTable::to_csv() const
{
    validate();
    std::string out = abscissa_name + "," + value_name + (has_error() ? ",stderr" : "") + "\n";
    for (std::size_t i = 0; i < value.size(); ++i) {
        out += format_sci(abscissa[i]) + "," + format_sci(value[i]);
        if (has_error()) out += "," + format_sci(std_error[i]);
        out += "\n";
    }
    return out;
}

} // namespace bcva
