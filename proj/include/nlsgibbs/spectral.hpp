#pragma once

#include <Eigen/Dense>
#include <complex>

#include "nlsgibbs/errors.hpp"

namespace nlsgibbs {

using Complex = std::complex<double>;

/// Symmetric set of Fourier modes {-k_max, ..., k_max} on the unit torus
/// Lambda = [-1/2, 1/2).
struct ModeSet {
    int k_max = 0;

    ModeSet() = default;
    explicit ModeSet(int k_max_) : k_max(k_max_) {
        if (k_max < 0) throw std::invalid_argument("ModeSet: k_max must be >= 0");
    }

    int size() const { return 2 * k_max + 1; }
    int mode_at(int i) const { return i - k_max; }
    bool contains(int k) const { return k >= -k_max && k <= k_max; }
    int index_of(int k) const {
        if (!contains(k)) throw std::out_of_range("ModeSet: mode outside set");
        return k + k_max;
    }
    bool operator==(const ModeSet& o) const { return k_max == o.k_max; }
};

/// Eigenvalue of h = -Delta + kappa on mode k: lambda_k = 4 pi^2 k^2 + kappa.
double eigenvalue(int k, double kappa);

/// One-particle operator h restricted to a mode set.
struct OneBodySpectrum {
    double kappa = 1.0;
    ModeSet modes;
    Eigen::VectorXd lambda;  // per mode, order -k_max..k_max

    OneBodySpectrum() = default;
    OneBodySpectrum(ModeSet modes_, double kappa_);

    double lambda_of(int k) const { return lambda[modes.index_of(k)]; }
    /// Truncated Tr(h^{-1}) = sum_k 1/lambda_k over the mode set.
    double trace_h_inverse() const { return lambda.cwiseInverse().sum(); }
};

/// Field given by its Fourier coefficients over a mode set.
/// coeffs[i] = phi_hat(mode_at(i)).
struct SpectralField {
    ModeSet modes;
    Eigen::VectorXcd coeffs;

    SpectralField() = default;
    explicit SpectralField(ModeSet m) : modes(m), coeffs(Eigen::VectorXcd::Zero(m.size())) {}
    SpectralField(ModeSet m, Eigen::VectorXcd c) : modes(m), coeffs(std::move(c)) {
        if (coeffs.size() != modes.size())
            throw std::invalid_argument("SpectralField: coefficient count != mode count");
    }

    Complex& at(int k) { return coeffs[modes.index_of(k)]; }
    Complex at(int k) const { return coeffs[modes.index_of(k)]; }
};

/// Field sampled on the uniform grid x_j = -1/2 + j/n_x.
struct GridField {
    int n_x = 0;
    Eigen::VectorXcd values;
};

enum class NormKind { L2, L4, Hs };

/// Synthesis on n_x uniform points; requires n_x >= d (band-limited, lossless).
GridField to_grid(const SpectralField& f, int n_x);

/// Quadrature Fourier analysis g_hat(k) = int g(x) e^{-2 pi i k x} dx.
/// Exact for fields band-limited to k_max when n_x >= 2*k_max + 1.
SpectralField to_spectral(const GridField& g, int k_max);

/// Norm of the band-limited representative. Hs uses (1+|k|)^{2s} weights.
double field_norm(const SpectralField& f, NormKind kind, double s = 0.0);

/// ||f||_{L^4}^4 evaluated by the trapezoid rule on an explicit grid.
/// Throws PrecisionError when n_x < 4*k_max + 1 (|f|^4 would alias).
double norm_l4_pow4_on_grid(const SpectralField& f, int n_x);

/// e^{-t h}: multiplies each coefficient by e^{-t lambda_k}. Requires t > 0.
SpectralField heat_propagator(double t, const SpectralField& f, double kappa);

/// Fourier coefficients of |phi|^2: g_hat(m) = sum_k conj(phi_hat(k)) phi_hat(k+m)
/// for m = -2*k_max .. 2*k_max (size 4*k_max+1). Exact, no grid involved.
Eigen::VectorXcd density_coefficients(const SpectralField& f);

/// Smallest power of two >= n.
int next_pow2(int n);

/// Default alias-free grid for quartic quantities: power of two >= 4*k_max+1.
int quartic_grid_size(int k_max);

}  // namespace nlsgibbs
