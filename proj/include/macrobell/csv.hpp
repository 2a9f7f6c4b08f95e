#pragma once

#include <cstdio>
#include <string>

namespace macrobell::csv {

/// Full-precision scientific notation; round-trips exactly through strtod.
inline std::string fmt(double v) {
    if (v == 0.0) v = 0.0; // normalize -0
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17e", v);
    return buf;
}

/// Shortest exact decimal, used for config serialization.
inline std::string fmt_compact(double v) {
    if (v == 0.0) v = 0.0;
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace macrobell::csv
