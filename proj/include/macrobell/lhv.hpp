#pragma once

// Classical side of the inequality: exhaustive enumeration of deterministic
// hidden-variable assignments and seeded random mixtures over them.

#include <array>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <random>

#include "macrobell/errors.hpp"

namespace macrobell {

struct HiddenAssignment {
    int lambda_blue_a = 1;
    int lambda_green_a = 1;
    int lambda_blue_b = 1;
    int lambda_green_b = 1;
};

inline int chsh_of_assignment(const HiddenAssignment& a) {
    return a.lambda_blue_a * a.lambda_blue_b - a.lambda_blue_a * a.lambda_green_b
           + a.lambda_green_a * a.lambda_blue_b + a.lambda_green_a * a.lambda_green_b;
}

inline std::array<HiddenAssignment, 16> all_assignments() {
    std::array<HiddenAssignment, 16> out{};
    for (int i = 0; i < 16; ++i) {
        out[i] = HiddenAssignment{(i & 1) ? 1 : -1, (i & 2) ? 1 : -1,
                                  (i & 4) ? 1 : -1, (i & 8) ? 1 : -1};
    }
    return out;
}

struct MixtureExtremes {
    double min_value = 0.0;
    double max_value = 0.0;
};

/// Draws `samples` probability vectors over the 16 assignments (normalized
/// exponentials, so uniform on the simplex) and returns the extremes of the
/// averaged CHSH combination. Fully deterministic for a given seed: the
/// uniform variates are built from raw mt19937_64 output, not from
/// distribution adapters.
inline MixtureExtremes mixture_bound(std::size_t samples, std::uint64_t seed) {
    if (samples < 1) throw ConfigError("mixture_bound needs at least one sample");
    std::mt19937_64 gen(seed);
    std::array<int, 16> values{};
    const auto assignments = all_assignments();
    for (std::size_t i = 0; i < 16; ++i) values[i] = chsh_of_assignment(assignments[i]);

    MixtureExtremes ext{4.0, -4.0};
    for (std::size_t s = 0; s < samples; ++s) {
        double total = 0.0;
        double dot = 0.0;
        for (int v : values) {
            const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
            const double e = -std::log1p(-u);
            total += e;
            dot += e * v;
        }
        const double value = dot / total;
        ext.min_value = std::min(ext.min_value, value);
        ext.max_value = std::max(ext.max_value, value);
    }
    return ext;
}

inline void write_assignment_csv(std::ostream& os) {
    os << "lambda_blue_a,lambda_green_a,lambda_blue_b,lambda_green_b,chsh\n";
    for (const auto& a : all_assignments()) {
        os << a.lambda_blue_a << ',' << a.lambda_green_a << ',' << a.lambda_blue_b << ','
           << a.lambda_green_b << ',' << chsh_of_assignment(a) << '\n';
    }
}

} // namespace macrobell
