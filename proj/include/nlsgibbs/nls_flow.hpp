#pragma once

#include <vector>

#include "nlsgibbs/potential.hpp"
#include "nlsgibbs/spectral.hpp"

namespace nlsgibbs {

/// Strang split-step configuration for the Hartree / local cubic NLS
/// i d_t phi = (-Delta + kappa) phi + (w * |phi|^2) phi.
///
/// galerkin = true: the flow is the Hamiltonian flow of the truncated model
/// (nonlinearity projected onto the mode set, alias-free); the state never
/// leaves the input mode set and the truncated Gibbs measure is exactly
/// invariant up to the dt^2 splitting error.
/// galerkin = false: standard pseudospectral split-step on an n_x grid; the
/// returned field lives on the solver's symmetric band k_max = n_x/2 - 1.
struct FlowConfig {
    double dt = 1e-3;
    double kappa = 1.0;
    Potential w = Potential::exact_delta();
    bool galerkin = true;
    int n_x = 0;  // 0: automatic (quartic grid in galerkin mode, 64 otherwise)

    int resolved_nx(int k_max) const {
        if (n_x > 0) return n_x;
        return galerkin ? quartic_grid_size(k_max) : std::max(64, quartic_grid_size(k_max));
    }
};

/// Flow map S_t. Supports negative t (time reversal). Throws BlowUpError with
/// the last finite time on NaN/overflow; guards |t|/dt <= 1e8 steps.
SpectralField evolve(const SpectralField& phi0, double t, const FlowConfig& config);

/// Evolve a batch of fields in place to time t (parallel across fields).
void evolve_batch(std::vector<SpectralField>& fields, double t, const FlowConfig& config);
void evolve_batch_serial(std::vector<SpectralField>& fields, double t, const FlowConfig& config);

struct FlowDifferenceReport {
    double sup_distance = 0.0;  // max over the sampled time grid of ||u - u_eps||_2
    std::vector<double> times;
    std::vector<double> distances;
};

/// Evolves phi0 under w and under w_eps on a shared grid and time step and
/// reports the sup-in-time L2 distance over [0, T].
FlowDifferenceReport flow_difference(const SpectralField& phi0, const Potential& w,
                                     const Potential& w_eps, double T, const FlowConfig& config);

}  // namespace nlsgibbs
