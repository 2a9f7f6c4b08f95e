#pragma once

#include <stdexcept>
#include <string>

namespace macrobell {

/// A quadrature or series failed its doubling-based convergence gate.
struct NonConvergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The Fock-space cutoff would discard more probability than allowed.
struct TruncationTooLossy : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// CHSH assembly received distributions produced with differing apparatus parameters.
struct InconsistentConfigs : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A positive photon threshold cannot be met with a zero-width dead zone.
struct DegenerateDeadZone : std::domain_error {
    using std::domain_error::domain_error;
};

/// Invalid configuration value (CLI flag, config file, or constructor argument).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace macrobell
