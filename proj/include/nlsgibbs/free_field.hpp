#pragma once

#include <functional>
#include <span>
#include <vector>

#include "nlsgibbs/estimators.hpp"
#include "nlsgibbs/rng.hpp"
#include "nlsgibbs/spectral.hpp"

namespace nlsgibbs {

/// Draw phi = sum_k (omega_k / sqrt(lambda_k)) e^{2 pi i k x} with omega_k iid
/// standard complex Gaussians; E|phi_hat(k)|^2 = 1/lambda_k.
SpectralField sample_free_field(const ModeSet& modes, double kappa, SampleRng& rng);

/// Unweighted ensemble of free-field samples (the reference measure mu).
/// Sample i is generated from substream (seed, i): parallel construction is
/// order-independent and bit-identical to the serial one.
struct FieldEnsemble {
    ModeSet modes;
    double kappa = 1.0;
    std::uint64_t seed = 0;
    Eigen::MatrixXcd samples;  // d x n, one column per field

    std::size_t size() const { return static_cast<std::size_t>(samples.cols()); }
    SpectralField field(std::size_t i) const {
        return SpectralField{modes, samples.col(static_cast<Eigen::Index>(i))};
    }
};

FieldEnsemble sample_free_ensemble(const ModeSet& modes, double kappa, std::size_t n,
                                   std::uint64_t seed);
FieldEnsemble sample_free_ensemble_serial(const ModeSet& modes, double kappa, std::size_t n,
                                          std::uint64_t seed);

/// One factor of a Gaussian moment: phi(g) = <g, phi> or its conjugate.
struct WickFactor {
    Eigen::VectorXcd g;      // test vector in the mode basis
    bool conjugated = false;  // true: phi_bar(g) = <phi, g>
};

/// Moment E_mu[prod factors] by brute-force enumeration of complete pairings;
/// each mixed pair contributes <g, h^{-1} g_tilde>, same-type pairs vanish by
/// gauge invariance. Guards at 8 factors.
Complex wick_moment_oracle(std::span<const WickFactor> factors, const OneBodySpectrum& h);

/// E_mu[prod_i phi_hat(k_i) prod_j conj(phi_hat(l_j))]: the permanent of the
/// pair matrix delta_{k_i l_j}/lambda_{k_i}. Degree k.size()+l.size() <= 8.
Complex wick_monomial_oracle(std::span<const int> ks, std::span<const int> ls,
                             const OneBodySpectrum& h);

/// Sample mean of a field functional with batch-jackknife standard error.
ComplexEstimate empirical_moment(const FieldEnsemble& ens,
                                 const std::function<Complex(const SpectralField&)>& observable);

}  // namespace nlsgibbs
