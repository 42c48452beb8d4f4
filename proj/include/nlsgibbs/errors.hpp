#pragma once

#include <stdexcept>
#include <string>

namespace nlsgibbs {

/// Grid too small to represent a band-limited quantity without aliasing.
struct AliasingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Requested accuracy cannot be met (undersized quadrature grid, etc.).
struct PrecisionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Guard against combinatorial or memory blow-up (basis too large, m too high).
struct SizeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Fock truncation would silently drop weight (K*tau > n_max).
struct TruncationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// All Monte Carlo weights vanished or a weight overflowed.
struct DegenerateEnsembleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// NLS trajectory left the floating-point range.
struct BlowUpError : std::runtime_error {
    BlowUpError(const std::string& what, double t_reached)
        : std::runtime_error(what), t_reached(t_reached) {}
    double t_reached;
};

}  // namespace nlsgibbs
