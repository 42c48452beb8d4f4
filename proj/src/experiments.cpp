#include "nlsgibbs/experiments.hpp"

#include <chrono>
#include <cmath>

namespace nlsgibbs {

namespace {
double now_seconds() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}
}  // namespace

double epsilon_schedule(double tau, double exponent) {
    if (tau <= 0.0) throw std::invalid_argument("epsilon_schedule: tau must be > 0");
    return std::pow(tau, -exponent);
}

double trace_norm(const Eigen::MatrixXcd& a) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a);
    return svd.singularValues().sum();
}

ExperimentReport convergence_study_tau(const ConvergenceScenario& sc,
                                       const std::vector<double>& tau_list) {
    ExperimentReport rep;
    rep.experiment = "convergence_tau";
    rep.scenario["k_max"] = std::to_string(sc.modes.k_max);
    rep.scenario["kappa"] = std::to_string(sc.kappa);
    rep.scenario["w"] = sc.w.kind_name();
    rep.scenario["K"] = std::to_string(sc.f.support_radius());
    rep.scenario["n_samples"] = std::to_string(sc.n_samples);
    rep.scenario["seed"] = std::to_string(sc.seed);
    rep.scenario["eps_mode"] = sc.eps_mode == EpsilonMode::None      ? "none"
                               : sc.eps_mode == EpsilonMode::ClipL1 ? "clip"
                                                                    : "delta";

    const OneBodySpectrum h(sc.modes, sc.kappa);

    // classical reference, shared across the sweep (tau-independent)
    const double t0 = now_seconds();
    const GibbsEnsemble ens =
        build_ensemble(sc.modes, sc.kappa, sc.w, sc.f, sc.n_samples, sc.seed);
    const GammaEstimate g1 = correlation_gamma_p(ens, 1);
    const double classical_s = now_seconds() - t0;
    rep.scenario["z_hat"] = std::to_string(ens.z.value);
    rep.scenario["z_se"] = std::to_string(ens.z.std_error);

    std::vector<double> ez_gaps, eg_gaps;
    for (const double tau : tau_list) {
        const double t1 = now_seconds();
        Potential wq = sc.w;
        double eps_tau = 0.0;
        if (sc.eps_mode == EpsilonMode::ClipL1) {
            eps_tau = epsilon_schedule(tau, sc.eps_exponent);
            wq = Potential::l1_clip(sc.w, eps_tau);
        } else if (sc.eps_mode == EpsilonMode::DeltaApprox) {
            eps_tau = epsilon_schedule(tau, sc.eps_exponent);
            wq = Potential::delta_approx(sc.profile, eps_tau);
        } else if (sc.w.is_exact_delta()) {
            throw std::invalid_argument(
                "convergence_study_tau: exact delta needs the DeltaApprox schedule");
        }
        const int n_max = sc.n_max_explicit > 0
                              ? sc.n_max_explicit
                              : static_cast<int>(std::ceil(sc.f.support_radius() * tau));
        const FockBasis basis = build_basis(sc.modes, n_max, sc.basis_limit);
        const BlockOperator H0 = build_h0(basis, h, tau);
        const BlockOperator W = build_w(basis, tau, wq);
        const ThermalDecomposition dec = decompose(H0, W, 1.0);
        const PartitionFunctions pf = partition_functions(dec, sc.f, h);
        const Eigen::MatrixXcd gq = gamma_tau_p(dec, sc.f, 1);

        SweepPoint pt;
        pt.sweep_value = tau;
        pt.metrics["Z_rel"] = pf.Z_rel;
        pt.metrics["e_Z"] = std::abs(pf.Z_rel - ens.z.value);
        pt.errors["e_Z"] = ens.z.std_error;
        pt.metrics["e_gamma"] = trace_norm(gq - g1.gamma);
        pt.errors["e_gamma"] = g1.se.norm();
        if (eps_tau > 0.0) pt.metrics["epsilon_tau"] = eps_tau;
        pt.metrics["n_max"] = n_max;
        pt.runtime_s = now_seconds() - t1 + classical_s / tau_list.size();
        ez_gaps.push_back(pt.metrics["e_Z"]);
        eg_gaps.push_back(pt.metrics["e_gamma"]);
        rep.points.push_back(std::move(pt));
    }

    const double min_ez = *std::min_element(ez_gaps.begin(), ez_gaps.end());
    if (ens.z.std_error > 0.5 * min_ez)
        rep.flags.push_back("inconclusive: classical z SE exceeds half the smallest e_Z gap");
    const double min_eg = *std::min_element(eg_gaps.begin(), eg_gaps.end());
    if (g1.se.norm() > 0.5 * min_eg)
        rep.flags.push_back(
            "inconclusive: classical gamma SE exceeds half the smallest e_gamma gap");
    return rep;
}

ComplexEstimate classical_time_correlation(const GibbsEnsemble& ens,
                                           const std::vector<Observable>& observables,
                                           const std::vector<double>& times,
                                           const FlowConfig& flow) {
    if (observables.size() != times.size() || observables.empty())
        throw std::invalid_argument("classical_time_correlation: observables/times mismatch");
    if (!flow.galerkin)
        throw std::invalid_argument("classical_time_correlation: needs the Galerkin flow");
    const std::size_t n = ens.size();
    std::vector<Complex> num(n);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
        // evolve incrementally through the sorted time set
        std::vector<std::size_t> order(times.size());
        for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });
        SpectralField phi = ens.field(static_cast<std::size_t>(i));
        double t_cur = 0.0;
        Complex prod{1.0, 0.0};
        std::vector<Complex> vals(times.size());
        for (const std::size_t j : order) {
            if (times[j] != t_cur) {
                phi = evolve(phi, times[j] - t_cur, flow);
                t_cur = times[j];
            }
            vals[j] = observables[j].evaluate(phi);
        }
        for (const Complex v : vals) prod *= v;
        num[i] = ens.weights[i] * prod;
    }
    return ratio_se(std::span<const Complex>(num.data(), n),
                    std::span<const double>(ens.weights.data(), n));
}

ExperimentReport invariance_test(const InvarianceScenario& sc,
                                 const std::vector<double>& t_list) {
    ExperimentReport rep;
    rep.experiment = "invariance";
    rep.scenario["k_max"] = std::to_string(sc.modes.k_max);
    rep.scenario["kappa"] = std::to_string(sc.kappa);
    rep.scenario["w"] = sc.w.kind_name();
    rep.scenario["n_samples"] = std::to_string(sc.n_samples);
    rep.scenario["seed"] = std::to_string(sc.seed);
    rep.scenario["dt"] = std::to_string(sc.flow.dt);
    if (!sc.flow.galerkin)
        throw std::invalid_argument("invariance_test: needs the Galerkin flow");

    const GibbsEnsemble ens =
        build_ensemble(sc.modes, sc.kappa, sc.w, sc.f, sc.n_samples, sc.seed);

    // observable battery: gamma_1 diagonal, mass moments, interaction
    std::vector<Observable> battery;
    for (int i = 0; i < sc.modes.size(); ++i)
        battery.push_back(Observable::mode_projector(sc.modes, sc.modes.mode_at(i)));
    battery.push_back(Observable::mass_n());
    battery.push_back(Observable::mass_power(2));
    battery.push_back(Observable::interaction(sc.w));

    const std::size_t n = ens.size();
    const std::size_t nobs = battery.size();

    std::vector<double> sorted_t = t_list;
    std::sort(sorted_t.begin(), sorted_t.end());
    if (sorted_t.empty() || sorted_t.front() != 0.0)
        sorted_t.insert(sorted_t.begin(), 0.0);

    // per-time, per-observable sample values
    std::vector<std::vector<std::vector<double>>> vals(
        sorted_t.size(), std::vector<std::vector<double>>(nobs, std::vector<double>(n)));

#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
        SpectralField phi = ens.field(static_cast<std::size_t>(i));
        double t_cur = 0.0;
        for (std::size_t ti = 0; ti < sorted_t.size(); ++ti) {
            if (sorted_t[ti] != t_cur) {
                phi = evolve(phi, sorted_t[ti] - t_cur, sc.flow);
                t_cur = sorted_t[ti];
            }
            for (std::size_t oi = 0; oi < nobs; ++oi)
                vals[ti][oi][i] = battery[oi].evaluate(phi).real();
        }
    }

    const std::span<const double> wspan(ens.weights.data(), n);
    std::vector<Estimate> q0(nobs);
    for (std::size_t oi = 0; oi < nobs; ++oi) q0[oi] = ratio_se(vals[0][oi], wspan);

    for (std::size_t ti = 0; ti < sorted_t.size(); ++ti) {
        SweepPoint pt;
        pt.sweep_value = sorted_t[ti];
        double max_ratio = 0.0;
        for (std::size_t oi = 0; oi < nobs; ++oi) {
            const Estimate q = ratio_se(vals[ti][oi], wspan);
            const double se = std::max(q.std_error, 1e-300);
            const double ratio = std::abs(q.value - q0[oi].value) / se;
            pt.metrics["Q_" + battery[oi].name()] = q.value;
            pt.errors["Q_" + battery[oi].name()] = q.std_error;
            pt.metrics["ratio_" + battery[oi].name()] = ratio;
            max_ratio = std::max(max_ratio, ratio);

            if (ti > 0) {
                // paired drift of the same samples: systematic integrator bias
                std::vector<double> diff(n);
                for (std::size_t i = 0; i < n; ++i) diff[i] = vals[ti][oi][i] - vals[0][oi][i];
                const Estimate drift = ratio_se(diff, wspan);
                if (std::abs(drift.value) > q.std_error)
                    rep.flags.push_back("drift: observable " + battery[oi].name() + " at t=" +
                                        std::to_string(sorted_t[ti]) +
                                        " has integrator drift above the statistical SE; refine dt");
            }
        }
        pt.metrics["max_ratio"] = max_ratio;
        rep.points.push_back(std::move(pt));
    }
    return rep;
}

ExperimentReport time_correlation_study(const TimeCorrelationScenario& sc,
                                        const std::vector<double>& tau_list) {
    ExperimentReport rep;
    rep.experiment = "time_correlation_tau";
    rep.scenario["k_max"] = std::to_string(sc.modes.k_max);
    rep.scenario["kappa"] = std::to_string(sc.kappa);
    rep.scenario["w"] = sc.w.kind_name();
    rep.scenario["t"] = std::to_string(sc.t);
    rep.scenario["observable_mode"] = std::to_string(sc.observable_mode);
    rep.scenario["n_samples"] = std::to_string(sc.n_samples);
    rep.scenario["seed"] = std::to_string(sc.seed);

    const OneBodySpectrum h(sc.modes, sc.kappa);
    const Observable proj = Observable::mode_projector(sc.modes, sc.observable_mode);

    const GibbsEnsemble ens =
        build_ensemble(sc.modes, sc.kappa, sc.w, sc.f, sc.n_samples, sc.seed);
    const ComplexEstimate q_cl =
        classical_time_correlation(ens, {proj}, {sc.t}, sc.flow);
    rep.scenario["classical"] = std::to_string(q_cl.value.real());
    rep.scenario["classical_se"] = std::to_string(q_cl.std_error);

    Eigen::MatrixXcd xi = Eigen::MatrixXcd::Zero(sc.modes.size(), sc.modes.size());
    xi(sc.modes.index_of(sc.observable_mode), sc.modes.index_of(sc.observable_mode)) = 1.0;

    std::vector<double> gaps;
    for (const double tau : tau_list) {
        const double t1 = now_seconds();
        const int n_max = static_cast<int>(std::ceil(sc.f.support_radius() * tau));
        const FockBasis basis = build_basis(sc.modes, n_max);
        const BlockOperator H0 = build_h0(basis, h, tau);
        const BlockOperator W = build_w(basis, tau, sc.w);
        const ThermalDecomposition dec = decompose(H0, W, 1.0);
        const BlockOperator theta = build_theta(basis, tau, xi, 1);
        const Complex q = quantum_time_correlation({&theta}, {sc.t}, dec, sc.f);

        SweepPoint pt;
        pt.sweep_value = tau;
        pt.metrics["Q_quantum"] = q.real();
        pt.metrics["gap"] = std::abs(q.real() - q_cl.value.real());
        pt.errors["gap"] = q_cl.std_error;
        pt.runtime_s = now_seconds() - t1;
        gaps.push_back(pt.metrics["gap"]);
        rep.points.push_back(std::move(pt));
    }
    if (q_cl.std_error > 0.5 * *std::min_element(gaps.begin(), gaps.end()))
        rep.flags.push_back("inconclusive: classical SE exceeds half the smallest gap");
    return rep;
}

}  // namespace nlsgibbs
