#pragma once

#include <map>
#include <string>
#include <vector>

#include "nlsgibbs/fock.hpp"
#include "nlsgibbs/gibbs.hpp"
#include "nlsgibbs/nls_flow.hpp"

namespace nlsgibbs {

/// One point of a sweep: metric name -> (value, uncertainty).
struct SweepPoint {
    double sweep_value = 0.0;
    std::map<std::string, double> metrics;
    std::map<std::string, double> errors;  // 0 marks an exact (non-MC) quantity
    double runtime_s = 0.0;
};

struct ExperimentReport {
    std::string experiment;
    std::map<std::string, std::string> scenario;  // flattened inputs, for provenance
    std::vector<SweepPoint> points;
    std::vector<std::string> flags;  // inconclusive conditions, drift warnings

    bool inconclusive() const { return !flags.empty(); }
};

/// Bounded-approximation schedule applied to w before each quantum build.
enum class EpsilonMode { None, ClipL1, DeltaApprox };

/// Default schedule eps_tau = tau^{-exponent} (exponent 1/4 unless overridden).
double epsilon_schedule(double tau, double exponent = 0.25);

struct ConvergenceScenario {
    ModeSet modes;
    double kappa = 1.0;
    Potential w = Potential::constant(0.2);
    CutoffFunction f = CutoffFunction::plateau_bump(4.0, 0.5);
    std::size_t n_samples = 1000000;
    std::uint64_t seed = 1;
    EpsilonMode eps_mode = EpsilonMode::None;
    double eps_exponent = 0.25;
    DeltaProfile profile{};              // for EpsilonMode::DeltaApprox
    std::size_t basis_limit = 200000;
    int n_max_explicit = 0;              // 0: auto ceil(K*tau)
};

/// tau-sweep comparison of the quantum spectral data against the classical
/// Monte Carlo reference on the same truncated model:
/// e_Z(tau) = |Z_rel - z_hat|, e_gamma(tau) = ||gamma_{tau,1} - gamma_hat_1||_tr.
/// Raises the "inconclusive" flag when the classical SE exceeds half the
/// smallest quantum-classical gap.
ExperimentReport convergence_study_tau(const ConvergenceScenario& scenario,
                                       const std::vector<double>& tau_list);

/// Classical m-point time correlation rho(Psi^{t_1}Theta(xi_1)...): evolves
/// every weighted sample through the Galerkin flow and averages the product.
ComplexEstimate classical_time_correlation(const GibbsEnsemble& ens,
                                           const std::vector<Observable>& observables,
                                           const std::vector<double>& times,
                                           const FlowConfig& flow);

struct InvarianceScenario {
    ModeSet modes;
    double kappa = 1.0;
    Potential w = Potential::exact_delta();
    CutoffFunction f = CutoffFunction::plateau_bump(4.0, 0.5);
    std::size_t n_samples = 100000;
    std::uint64_t seed = 1;
    FlowConfig flow;
};

/// Flow-invariance battery: gamma_1 diagonal entries, mass moments, W. For
/// each t reports |Q(t) - Q(0)| / SE(Q(t)); flags when the paired systematic
/// drift of a conserved quantity dominates the statistical uncertainty.
ExperimentReport invariance_test(const InvarianceScenario& scenario,
                                 const std::vector<double>& t_list);

struct TimeCorrelationScenario {
    ModeSet modes;
    double kappa = 1.0;
    Potential w = Potential::constant(0.2);
    CutoffFunction f = CutoffFunction::plateau_bump(4.0, 0.5);
    std::size_t n_samples = 200000;
    std::uint64_t seed = 1;
    FlowConfig flow;
    int observable_mode = 0;  // xi = projector onto this mode, p = 1
    double t = 0.5;
};

/// Theorem-1.9-style trend: |quantum - classical| for the evolved lift at a
/// fixed time, swept over tau.
ExperimentReport time_correlation_study(const TimeCorrelationScenario& scenario,
                                        const std::vector<double>& tau_list);

/// Trace norm of a Hermitian-ish matrix difference via singular values.
double trace_norm(const Eigen::MatrixXcd& a);

}  // namespace nlsgibbs
