#pragma once

#include <cstdint>
#include <vector>

#include "nlsgibbs/cutoff.hpp"
#include "nlsgibbs/potential.hpp"
#include "nlsgibbs/spectral.hpp"

namespace nlsgibbs {

/// Occupation-number basis of the truncated bosonic Fock space over a mode
/// set, with total occupation <= n_max, partitioned into conserved
/// (particle number, total momentum) blocks. Enumeration is lexicographic in
/// the occupation vector (n_{-k_max}, ..., n_{k_max}).
struct FockBasis {
    ModeSet modes;
    int n_max = 0;
    std::size_t n_states = 0;
    std::vector<std::uint16_t> occ_flat;  // n_states x d, row-major

    struct Block {
        int n = 0;         // total particle number
        int momentum = 0;  // sum_k k * n_k
        std::vector<std::int32_t> states;  // global state ids, ascending
    };
    std::vector<Block> blocks;              // sorted by (n, momentum)
    std::vector<std::int32_t> state_block;  // state -> block index
    std::vector<std::int32_t> state_pos;    // state -> position inside block

    int d() const { return modes.size(); }
    const std::uint16_t* occ(std::size_t state) const { return &occ_flat[state * d()]; }
    int total_n(std::size_t state) const;
    int total_momentum(std::size_t state) const;
    /// Global id of an occupation vector, -1 when outside the basis.
    std::int64_t find_state(const std::uint16_t* occ) const;
};

FockBasis build_basis(const ModeSet& modes, int n_max, std::size_t max_states = 200000);

/// Block-diagonal operator on the truncated Fock space. Only operators that
/// conserve (n, momentum) are representable; every operator built here does.
struct BlockOperator {
    const FockBasis* basis = nullptr;
    double tau = 1.0;
    bool hermitian = true;
    std::vector<Eigen::MatrixXcd> blocks;  // aligned with basis->blocks

    static BlockOperator zeros(const FockBasis& basis, double tau);
    /// max over blocks of ||A - A^H||_inf.
    double hermiticity_defect() const;
};

/// H_{tau,0}: diagonal with entries sum_k lambda_k n_k / tau.
BlockOperator build_h0(const FockBasis& basis, const OneBodySpectrum& h, double tau);

/// N_tau: diagonal with entries n / tau.
BlockOperator build_n(const FockBasis& basis, double tau);

/// W_tau = (1/(2 tau^2)) sum_{r,s,m} w_hat(m) a*_{r+m} a*_{s-m} a_r a_s, all
/// four indices Galerkin-restricted to the mode set.
BlockOperator build_w(const FockBasis& basis, double tau, const Potential& w);

/// Non-normal-ordered W'_tau = W_tau + (w(0)/(2 tau)) N_tau, with
/// w(0) = sum_{|m| <= 2 k_max} w_hat(m) of the truncated model.
BlockOperator build_w_prime(const FockBasis& basis, double tau, const Potential& w);

/// Normal-ordered lift Theta_tau(xi) = tau^{-p} sum xi a*...a. The kernel must
/// conserve total momentum (p=1: diagonal; p=2: k1+k2 == l1+l2), otherwise the
/// operator would leave the (n, momentum) block structure.
BlockOperator build_theta(const FockBasis& basis, double tau, const Eigen::MatrixXcd& xi, int p);

/// A + c*B on matching bases.
BlockOperator block_add(const BlockOperator& A, const BlockOperator& B, double c = 1.0);

/// Per-block Hermitian eigendecomposition of H_tau = H_{tau,0} + zeta W_tau.
struct ThermalDecomposition {
    const FockBasis* basis = nullptr;
    double tau = 1.0;
    double zeta = 1.0;
    std::vector<Eigen::VectorXd> eigenvalues;
    std::vector<Eigen::MatrixXcd> eigenvectors;
};

ThermalDecomposition decompose(const BlockOperator& H);
ThermalDecomposition decompose(const BlockOperator& H0, const BlockOperator& W, double zeta);

struct PartitionFunctions {
    double Z_tau = 0.0;    // Tr(e^{-H_tau} f(N_tau)), exact on the basis when K*tau <= n_max
    double Z_tau0 = 0.0;   // full-space free trace, product formula
    double Z_rel = 0.0;    // Z_tau / Z_tau0
};

/// Refuses to truncate silently: compact f requires K*tau <= n_max; the f == 1
/// diagnostic is only admissible for the free state (zeta == 0 or W == 0),
/// where Z_tau = Z_{tau,0} by the closed product formula.
PartitionFunctions partition_functions(const ThermalDecomposition& dec, const CutoffFunction& f,
                                       const OneBodySpectrum& h);

/// Free trace restricted to total occupation <= n_max, by a mode-by-mode
/// convolution over the total particle number (equals the basis sum).
double free_partition_truncated(const OneBodySpectrum& h, double tau, int n_max);

/// Bose two-point function G_tau(k,k) = 1/(tau (e^{lambda_k/tau} - 1)).
double bose_two_point(double lambda, double tau);

/// rho_tau(A) = Tr(A e^{-H} f(N_tau)) / Tr(e^{-H} f(N_tau)).
Complex quantum_expectation(const BlockOperator& A, const ThermalDecomposition& dec,
                            const CutoffFunction& f);

/// gamma_{tau,p}(k...;l...) = tau^{-p} rho_tau(a*_{l...} a_{k...}), Hermitian
/// PSD matrix on the p-fold mode grid (d or d^2).
Eigen::MatrixXcd gamma_tau_p(const ThermalDecomposition& dec, const CutoffFunction& f, int p);

/// Duhamel coefficient a^xi_{tau,m} for m <= 2, by Gauss-Legendre product
/// quadrature over the time simplex; the free semigroups are evaluated exactly
/// through the diagonal H_{tau,0}.
double duhamel_coefficient_a_tau_m(const FockBasis& basis, const OneBodySpectrum& h, double tau,
                                   const Potential& w, const CutoffFunction& f,
                                   const Eigen::MatrixXcd& xi, int p, int m,
                                   int quadrature_order = 24);

/// Closed-form m=1 coefficient (exact t-integral in the H0 eigenbasis);
/// independent oracle for the quadrature path.
double duhamel_m1_closed_form(const FockBasis& basis, const OneBodySpectrum& h, double tau,
                              const Potential& w, const CutoffFunction& f,
                              const Eigen::MatrixXcd& xi, int p);

/// Heisenberg evolution Psi^t_tau A = e^{i t tau H} A e^{-i t tau H}.
BlockOperator heisenberg_evolve(const BlockOperator& A, const ThermalDecomposition& dec,
                                double t);

/// rho_tau(Psi^{t_1} A_1 ... Psi^{t_m} A_m) via eigenbasis phase conjugation.
Complex quantum_time_correlation(const std::vector<const BlockOperator*>& ops,
                                 const std::vector<double>& times,
                                 const ThermalDecomposition& dec, const CutoffFunction& f);

}  // namespace nlsgibbs
