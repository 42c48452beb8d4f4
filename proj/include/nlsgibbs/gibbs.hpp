#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nlsgibbs/cutoff.hpp"
#include "nlsgibbs/estimators.hpp"
#include "nlsgibbs/free_field.hpp"
#include "nlsgibbs/potential.hpp"
#include "nlsgibbs/spectral.hpp"

namespace nlsgibbs {

/// Mass N = ||phi||_2^2.
double mass(const SpectralField& phi);

/// W = (1/2) int int |phi(x)|^2 w(x-y) |phi(y)|^2 dx dy, evaluated alias-free
/// through the density coefficients of the band-limited field:
/// W = (1/2) sum_{|m|<=2k_max} w_hat(m) |g_hat(m)|^2. For w = -delta this is
/// -(1/2)||phi||_4^4.
double interaction_energy(const SpectralField& phi, const Potential& w);

/// H(phi) = sum_k lambda_k |phi_hat(k)|^2 + W(phi).
double hamiltonian_energy(const SpectralField& phi, const Potential& w, double kappa);

/// Observable of a field: a lifted p-particle kernel Theta(xi) or one of the
/// scalar functionals used in the experiment batteries.
class Observable {
  public:
    enum class Kind { Theta1, Theta2, Mass, MassPower, Interaction, L4Pow4 };

    /// p=1 lift: Theta(xi) = sum_{k,l} xi_{kl} conj(phi_hat(k)) phi_hat(l).
    static Observable theta_p1(Eigen::MatrixXcd xi);
    /// p=2 lift over the tensor-grid pair basis (d^2 x d^2 kernel).
    static Observable theta_p2(Eigen::MatrixXcd xi);
    /// Rank-one projector onto mode k (p=1).
    static Observable mode_projector(const ModeSet& modes, int k);
    static Observable identity_p1(const ModeSet& modes);
    static Observable mass_n();
    static Observable mass_power(int q);
    static Observable interaction(Potential w);
    static Observable l4_norm_pow4();

    Complex evaluate(const SpectralField& phi) const;
    Kind kind() const { return kind_; }
    int p() const;
    /// Operator norm ||xi|| (largest singular value); Theta kinds only.
    double xi_norm() const;
    const std::string& name() const { return name_; }

  private:
    Observable() = default;
    Kind kind_ = Kind::Mass;
    Eigen::MatrixXcd xi_;
    int power_ = 1;
    std::optional<Potential> w_;
    std::string name_;
};

/// Weighted Monte Carlo representation of rho = e^{-W} f(N) dmu / z.
struct GibbsEnsemble {
    ModeSet modes;
    double kappa = 1.0;
    Potential w = Potential::constant(0.0);
    CutoffFunction f = CutoffFunction::diagnostic_one();
    std::uint64_t seed = 0;
    Eigen::MatrixXcd samples;  // d x n
    Eigen::VectorXd weights;   // e^{-W(phi_i)} f(N(phi_i))
    Estimate z;                // partition function estimate (mean weight)

    std::size_t size() const { return static_cast<std::size_t>(samples.cols()); }
    SpectralField field(std::size_t i) const {
        return SpectralField{modes, samples.col(static_cast<Eigen::Index>(i))};
    }
};

/// Importance sampling from mu. With w != 0 the cutoff must be compactly
/// supported (the focusing obstruction); f == 1 is allowed only as the free
/// diagnostic mode. Nonfinite weights abort with a diagnostic.
GibbsEnsemble build_ensemble(const ModeSet& modes, double kappa, const Potential& w,
                             const CutoffFunction& f, std::size_t n, std::uint64_t seed);
GibbsEnsemble build_ensemble_serial(const ModeSet& modes, double kappa, const Potential& w,
                                    const CutoffFunction& f, std::size_t n, std::uint64_t seed);

/// Independent oracle for constant w: z = int_0^inf e^{-c s^2/2} f(s) p_N(s) ds
/// where p_N is the hypoexponential density of N = sum_k |omega_k|^2/lambda_k
/// (rates lambda_k), built by repeated numerical convolution on an s-grid with
/// step-doubling convergence control.
double density_oracle_constant_w(double c, const CutoffFunction& f, const ModeSet& modes,
                                 double kappa);

/// E[g(N)] under mu by the same density construction (test helper).
double mass_functional_oracle(const std::function<double(double)>& g, const ModeSet& modes,
                              double kappa, double s_max = 0.0);

/// rho(X) = sum w_i X_i / sum w_i with ratio-estimator standard error.
ComplexEstimate expectation_rho(const GibbsEnsemble& ens, const Observable& X);

struct GammaEstimate {
    Eigen::MatrixXcd gamma;  // d^p x d^p, Hermitian
    Eigen::MatrixXd se;      // entrywise ratio-estimator SE
    std::size_t n_samples = 0;
};

/// p-particle correlation gamma_p(k...;l...) = rho(conj phi(l...) phi(k...)),
/// estimated by weighted outer products; Hermitian PSD by construction.
GammaEstimate correlation_gamma_p(const GibbsEnsemble& ens, int p);

/// Taylor coefficient a_m = ((-1)^m / m!) E_mu[Theta(xi) W^m f(N)] from an
/// unweighted free ensemble; m <= 6.
Estimate series_coefficient_a_m(const FieldEnsemble& free_ens, const Observable& theta,
                                const Potential& w, const CutoffFunction& f, int m);

/// All coefficients m = 0..m_max in one pass over the ensemble.
std::vector<Estimate> series_coefficients(const FieldEnsemble& free_ens, const Observable& theta,
                                          const Potential& w, const CutoffFunction& f, int m_max);

/// Unexpanded numerator E_mu[Theta(xi) e^{-W} f(N)] on the same samples.
Estimate series_numerator(const FieldEnsemble& free_ens, const Observable& theta,
                          const Potential& w, const CutoffFunction& f);

/// K^p ||xi|| (K^2 ||w||_inf)^m / (2^m m!).
double series_coefficient_bound(double K, int p, double xi_norm, double w_linf, int m);

struct TailReport {
    double B = 1.0, c = 0.5;
    std::uint64_t seed = 0;
    std::size_t n_samples = 0;
    std::vector<int> k_levels;
    std::vector<Estimate> moments;      // E[e^{c ||phi||_4^4} 1{||phi||_2 <= B}]
    std::vector<double> rel_change;     // |m_i - m_{i-1}| / m_i
    std::vector<double> mass_acceptance;  // P(||phi||_2 <= B) per level
    // empirical exceedance curve at the top level
    std::vector<double> lambda_grid;
    std::vector<double> log_exceedance;  // log P(||phi||_4 > lambda, ||phi||_2 <= B)
};

/// Integrability probe of e^{c ||phi||_4^4} on {||phi||_2 <= B} across
/// increasing mode truncations.
TailReport tail_moment_check(double kappa, double B, double c, std::size_t n_samples,
                             std::uint64_t seed, std::vector<int> k_levels = {4, 8, 16});

}  // namespace nlsgibbs
