#include "nlsgibbs/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace nlsgibbs {

double mass(const SpectralField& phi) { return phi.coeffs.squaredNorm(); }

double interaction_energy(const SpectralField& phi, const Potential& w) {
    if (w.kind() == Potential::Kind::Constant) {
        const double N = mass(phi);
        return 0.5 * w.constant_value() * N * N;
    }
    const int kmax = phi.modes.k_max;
    const Eigen::VectorXcd g = density_coefficients(phi);
    double acc = 0.0;
    for (int m = -2 * kmax; m <= 2 * kmax; ++m)
        acc += w.fourier_coefficient(m) * std::norm(g[m + 2 * kmax]);
    return 0.5 * acc;
}

double hamiltonian_energy(const SpectralField& phi, const Potential& w, double kappa) {
    double h0 = 0.0;
    for (int i = 0; i < phi.modes.size(); ++i)
        h0 += eigenvalue(phi.modes.mode_at(i), kappa) * std::norm(phi.coeffs[i]);
    return h0 + interaction_energy(phi, w);
}

// ---------------------------------------------------------------- Observable

Observable Observable::theta_p1(Eigen::MatrixXcd xi) {
    if (xi.rows() != xi.cols() || xi.rows() == 0)
        throw std::invalid_argument("theta_p1: kernel must be square");
    Observable o;
    o.kind_ = Kind::Theta1;
    o.xi_ = std::move(xi);
    o.name_ = "theta_p1";
    return o;
}

Observable Observable::theta_p2(Eigen::MatrixXcd xi) {
    if (xi.rows() != xi.cols() || xi.rows() == 0)
        throw std::invalid_argument("theta_p2: kernel must be square");
    const auto d2 = xi.rows();
    const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(double(d2))));
    if (d * d != d2) throw std::invalid_argument("theta_p2: kernel must act on a d^2 pair grid");
    Observable o;
    o.kind_ = Kind::Theta2;
    o.xi_ = std::move(xi);
    o.name_ = "theta_p2";
    return o;
}

Observable Observable::mode_projector(const ModeSet& modes, int k) {
    Eigen::MatrixXcd xi = Eigen::MatrixXcd::Zero(modes.size(), modes.size());
    xi(modes.index_of(k), modes.index_of(k)) = 1.0;
    Observable o = theta_p1(std::move(xi));
    o.name_ = "proj_k" + std::to_string(k);
    return o;
}

Observable Observable::identity_p1(const ModeSet& modes) {
    Observable o = theta_p1(Eigen::MatrixXcd::Identity(modes.size(), modes.size()));
    o.name_ = "identity_p1";
    return o;
}

Observable Observable::mass_n() {
    Observable o;
    o.kind_ = Kind::Mass;
    o.name_ = "mass";
    return o;
}

Observable Observable::mass_power(int q) {
    if (q < 1) throw std::invalid_argument("mass_power: q >= 1");
    Observable o;
    o.kind_ = Kind::MassPower;
    o.power_ = q;
    o.name_ = "mass_pow" + std::to_string(q);
    return o;
}

Observable Observable::interaction(Potential w) {
    Observable o;
    o.kind_ = Kind::Interaction;
    o.w_ = std::move(w);
    o.name_ = "interaction";
    return o;
}

Observable Observable::l4_norm_pow4() {
    Observable o;
    o.kind_ = Kind::L4Pow4;
    o.name_ = "l4_pow4";
    return o;
}

Complex Observable::evaluate(const SpectralField& phi) const {
    switch (kind_) {
        case Kind::Theta1: {
            if (xi_.rows() != phi.coeffs.size())
                throw std::invalid_argument("theta_p1: kernel/mode-set mismatch");
            return phi.coeffs.dot(xi_ * phi.coeffs);  // v^H xi v
        }
        case Kind::Theta2: {
            const auto d = phi.coeffs.size();
            if (xi_.rows() != d * d)
                throw std::invalid_argument("theta_p2: kernel/mode-set mismatch");
            Eigen::VectorXcd v2(d * d);
            for (Eigen::Index a = 0; a < d; ++a)
                for (Eigen::Index b = 0; b < d; ++b) v2[a * d + b] = phi.coeffs[a] * phi.coeffs[b];
            return v2.dot(xi_ * v2);
        }
        case Kind::Mass:
            return {mass(phi), 0.0};
        case Kind::MassPower:
            return {std::pow(mass(phi), power_), 0.0};
        case Kind::Interaction:
            return {interaction_energy(phi, *w_), 0.0};
        case Kind::L4Pow4: {
            const Eigen::VectorXcd g = density_coefficients(phi);
            return {g.squaredNorm(), 0.0};
        }
    }
    throw std::logic_error("Observable::evaluate: unknown kind");
}

int Observable::p() const {
    switch (kind_) {
        case Kind::Theta1: return 1;
        case Kind::Theta2: return 2;
        default: throw std::invalid_argument("Observable::p: not a lifted kernel");
    }
}

double Observable::xi_norm() const {
    if (kind_ != Kind::Theta1 && kind_ != Kind::Theta2)
        throw std::invalid_argument("Observable::xi_norm: not a lifted kernel");
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(xi_);
    return svd.singularValues()[0];
}

// ------------------------------------------------------------ GibbsEnsemble

namespace {
GibbsEnsemble make_gibbs(const ModeSet& modes, double kappa, const Potential& w,
                         const CutoffFunction& f, std::size_t n, std::uint64_t seed,
                         bool parallel) {
    if (n < 1) throw std::invalid_argument("build_ensemble: n_samples >= 1");
    if (f.is_diagnostic_one() && !w.is_zero())
        throw std::invalid_argument(
            "build_ensemble: f == 1 is admissible only in the free diagnostic mode (w == 0); "
            "interacting runs need a compactly supported cutoff");
    GibbsEnsemble ens;
    ens.modes = modes;
    ens.kappa = kappa;
    ens.w = w;
    ens.f = f;
    ens.seed = seed;
    ens.samples.resize(modes.size(), static_cast<Eigen::Index>(n));
    ens.weights.resize(static_cast<Eigen::Index>(n));
    std::int64_t bad_index = -1;
    const auto fill = [&](std::int64_t i) {
        SampleRng rng({seed, static_cast<std::uint64_t>(i)});
        const SpectralField phi = sample_free_field(modes, kappa, rng);
        const double fv = f(mass(phi));
        // f == 0 outside its support: skip the interaction there so unbounded
        // attractive w cannot overflow a weight that is exactly zero anyway
        const double wgt = fv == 0.0 ? 0.0 : std::exp(-interaction_energy(phi, w)) * fv;
        if (!std::isfinite(wgt)) {
#pragma omp critical
            bad_index = i;
            return;
        }
        ens.samples.col(i) = phi.coeffs;
        ens.weights[i] = wgt;
    };
    if (parallel) {
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) fill(i);
    } else {
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) fill(i);
    }
    if (bad_index >= 0)
        throw DegenerateEnsembleError("build_ensemble: nonfinite weight at sample " +
                                      std::to_string(bad_index) +
                                      " (seed=" + std::to_string(seed) + ")");
    ens.z = mean_se(std::span<const double>(ens.weights.data(), n));
    return ens;
}
}  // namespace

GibbsEnsemble build_ensemble(const ModeSet& modes, double kappa, const Potential& w,
                             const CutoffFunction& f, std::size_t n, std::uint64_t seed) {
    return make_gibbs(modes, kappa, w, f, n, seed, true);
}

GibbsEnsemble build_ensemble_serial(const ModeSet& modes, double kappa, const Potential& w,
                                    const CutoffFunction& f, std::size_t n, std::uint64_t seed) {
    return make_gibbs(modes, kappa, w, f, n, seed, false);
}

// ------------------------------------------------------------ density oracle

namespace {
// p * Exp(L) through the ODE q' = L (p - q): exact exponential-integrator step
// with piecewise-linear source.
std::vector<double> convolve_exponential(const std::vector<double>& p, double L, double h) {
    const std::size_t m = p.size();
    std::vector<double> q(m, 0.0);
    const double E = std::exp(-L * h);
    const double J0 = (1.0 - E) / L;
    const double J1 = 1.0 / L - (1.0 - E) / (L * L * h);
    const double A = L * (J0 - J1), B = L * J1;
    for (std::size_t i = 0; i + 1 < m; ++i) q[i + 1] = E * q[i] + A * p[i] + B * p[i + 1];
    return q;
}

double oracle_at_step(const std::vector<double>& rates, double c, const CutoffFunction& f,
                      double S, double h) {
    const std::size_t m = static_cast<std::size_t>(std::llround(S / h)) + 1;
    std::vector<double> p(m);
    for (std::size_t i = 0; i < m; ++i) p[i] = rates[0] * std::exp(-rates[0] * i * h);
    for (std::size_t r = 1; r < rates.size(); ++r) p = convolve_exponential(p, rates[r], h);
    // trapezoid in s
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double s = i * h;
        const double v = std::exp(-0.5 * c * s * s) * f(s) * p[i];
        acc += (i == 0 || i + 1 == m) ? 0.5 * v : v;
    }
    return acc * h;
}
}  // namespace

double density_oracle_constant_w(double c, const CutoffFunction& f, const ModeSet& modes,
                                 double kappa) {
    std::vector<double> rates;
    for (int i = 0; i < modes.size(); ++i) rates.push_back(eigenvalue(modes.mode_at(i), kappa));
    std::sort(rates.begin(), rates.end());  // smoothest factor first
    const double mean_mass =
        std::accumulate(rates.begin(), rates.end(), 0.0,
                        [](double a, double l) { return a + 1.0 / l; });
    double S = f.is_diagnostic_one() ? 40.0 / rates.front() + 4.0 * mean_mass
                                     : f.support_radius();
    double h = S / 16384.0;
    double prev = oracle_at_step(rates, c, f, S, h);
    for (int level = 0; level < 8; ++level) {
        h *= 0.5;
        const double cur = oracle_at_step(rates, c, f, S, h);
        if (std::abs(cur - prev) < 1e-8 * std::max(1.0, std::abs(cur))) return cur;
        prev = cur;
    }
    throw PrecisionError("density_oracle_constant_w: quadrature did not converge");
}

double mass_functional_oracle(const std::function<double(double)>& g, const ModeSet& modes,
                              double kappa, double s_max) {
    std::vector<double> rates;
    for (int i = 0; i < modes.size(); ++i) rates.push_back(eigenvalue(modes.mode_at(i), kappa));
    std::sort(rates.begin(), rates.end());
    const double mean_mass = std::accumulate(
        rates.begin(), rates.end(), 0.0, [](double a, double l) { return a + 1.0 / l; });
    const double S = s_max > 0.0 ? s_max : 40.0 / rates.front() + 4.0 * mean_mass;
    double h = S / 16384.0;
    auto run = [&](double step) {
        const std::size_t m = static_cast<std::size_t>(std::llround(S / step)) + 1;
        std::vector<double> p(m);
        for (std::size_t i = 0; i < m; ++i) p[i] = rates[0] * std::exp(-rates[0] * i * step);
        for (std::size_t r = 1; r < rates.size(); ++r) p = convolve_exponential(p, rates[r], step);
        double acc = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double v = g(i * step) * p[i];
            acc += (i == 0 || i + 1 == m) ? 0.5 * v : v;
        }
        return acc * step;
    };
    double prev = run(h);
    for (int level = 0; level < 8; ++level) {
        h *= 0.5;
        const double cur = run(h);
        if (std::abs(cur - prev) < 1e-8 * std::max(1.0, std::abs(cur))) return cur;
        prev = cur;
    }
    throw PrecisionError("mass_functional_oracle: quadrature did not converge");
}

// --------------------------------------------------------------- estimators

ComplexEstimate expectation_rho(const GibbsEnsemble& ens, const Observable& X) {
    const std::size_t n = ens.size();
    if (n == 0) throw std::invalid_argument("expectation_rho: empty ensemble");
    if ((ens.weights.array() == 0.0).all())
        throw DegenerateEnsembleError("expectation_rho: all weights vanish");
    std::vector<Complex> num(n);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i)
        num[i] = ens.weights[i] * X.evaluate(ens.field(static_cast<std::size_t>(i)));
    return ratio_se(std::span<const Complex>(num.data(), n),
                    std::span<const double>(ens.weights.data(), n));
}

GammaEstimate correlation_gamma_p(const GibbsEnsemble& ens, int p) {
    if (p < 1 || p > 2) throw SizeError("correlation_gamma_p: p must be 1 or 2");
    const std::size_t n = ens.size();
    const Eigen::Index d = ens.samples.rows();
    const Eigen::Index dim = p == 1 ? d : d * d;
    if ((ens.weights.array() == 0.0).all())
        throw DegenerateEnsembleError("correlation_gamma_p: all weights vanish");

    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(dim, dim);
    double wsum = 0.0;
#ifdef _OPENMP
    const int nt = omp_get_max_threads();
#else
    const int nt = 1;
#endif
    std::vector<Eigen::MatrixXcd> partial(nt, Eigen::MatrixXcd::Zero(dim, dim));
    std::vector<double> wpart(nt, 0.0);
#pragma omp parallel
    {
#ifdef _OPENMP
        const int tid = omp_get_thread_num();
#else
        const int tid = 0;
#endif
        Eigen::VectorXcd v(dim);
#pragma omp for schedule(static)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
            const double wi = ens.weights[i];
            if (wi == 0.0) continue;
            if (p == 1) {
                v = ens.samples.col(i);
            } else {
                for (Eigen::Index a = 0; a < d; ++a)
                    for (Eigen::Index b = 0; b < d; ++b)
                        v[a * d + b] = ens.samples(a, i) * ens.samples(b, i);
            }
            partial[tid].noalias() += wi * (v * v.adjoint());
            wpart[tid] += wi;
        }
    }
    for (int t = 0; t < nt; ++t) {
        acc += partial[t];
        wsum += wpart[t];
    }
    GammaEstimate out;
    out.gamma = acc / wsum;
    out.n_samples = n;

    // entrywise ratio-estimator SE, second pass
    const double wbar = wsum / static_cast<double>(n);
    Eigen::MatrixXd ss = Eigen::MatrixXd::Zero(dim, dim);
    std::vector<Eigen::MatrixXd> sspart(nt, Eigen::MatrixXd::Zero(dim, dim));
#pragma omp parallel
    {
#ifdef _OPENMP
        const int tid = omp_get_thread_num();
#else
        const int tid = 0;
#endif
        Eigen::VectorXcd v(dim);
#pragma omp for schedule(static)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
            const double wi = ens.weights[i];
            if (p == 1) {
                v = ens.samples.col(i);
            } else {
                for (Eigen::Index a = 0; a < d; ++a)
                    for (Eigen::Index b = 0; b < d; ++b)
                        v[a * d + b] = ens.samples(a, i) * ens.samples(b, i);
            }
            for (Eigen::Index r = 0; r < dim; ++r)
                for (Eigen::Index ccol = 0; ccol < dim; ++ccol) {
                    const Complex resid = wi * v[r] * std::conj(v[ccol]) - wi * out.gamma(r, ccol);
                    sspart[tid](r, ccol) += std::norm(resid);
                }
        }
    }
    for (int t = 0; t < nt; ++t) ss += sspart[t];
    out.se = (ss / (static_cast<double>(n) - 1.0) / static_cast<double>(n)).cwiseSqrt() /
             std::abs(wbar);
    return out;
}

// ------------------------------------------------------------------- series

std::vector<Estimate> series_coefficients(const FieldEnsemble& free_ens, const Observable& theta,
                                          const Potential& w, const CutoffFunction& f,
                                          int m_max) {
    if (m_max < 0 || m_max > 6)
        throw SizeError("series_coefficients: m guard at 6 (W^m variance growth)");
    const std::size_t n = free_ens.size();
    std::vector<std::vector<double>> vals(m_max + 1, std::vector<double>(n));
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
        const SpectralField phi = free_ens.field(static_cast<std::size_t>(i));
        const double Th = theta.evaluate(phi).real();
        const double fv = f(mass(phi));
        if (fv == 0.0) {
            for (int m = 0; m <= m_max; ++m) vals[m][i] = 0.0;
            continue;
        }
        const double W = interaction_energy(phi, w);
        double wm = 1.0, mfact = 1.0, sign = 1.0;
        for (int m = 0; m <= m_max; ++m) {
            vals[m][i] = sign / mfact * Th * wm * fv;
            wm *= W;
            mfact *= (m + 1);
            sign = -sign;
        }
    }
    std::vector<Estimate> out;
    out.reserve(m_max + 1);
    for (int m = 0; m <= m_max; ++m) out.push_back(mean_se(vals[m]));
    return out;
}

Estimate series_coefficient_a_m(const FieldEnsemble& free_ens, const Observable& theta,
                                const Potential& w, const CutoffFunction& f, int m) {
    return series_coefficients(free_ens, theta, w, f, m).back();
}

Estimate series_numerator(const FieldEnsemble& free_ens, const Observable& theta,
                          const Potential& w, const CutoffFunction& f) {
    const std::size_t n = free_ens.size();
    std::vector<double> vals(n);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
        const SpectralField phi = free_ens.field(static_cast<std::size_t>(i));
        const double fv = f(mass(phi));
        vals[i] = fv == 0.0 ? 0.0
                            : theta.evaluate(phi).real() *
                                  std::exp(-interaction_energy(phi, w)) * fv;
    }
    return mean_se(vals);
}

double series_coefficient_bound(double K, int p, double xi_norm, double w_linf, int m) {
    double mfact = 1.0;
    for (int j = 2; j <= m; ++j) mfact *= j;
    return std::pow(K, p) * xi_norm * std::pow(K * K * w_linf, m) / (std::pow(2.0, m) * mfact);
}

// --------------------------------------------------------------- tail check

TailReport tail_moment_check(double kappa, double B, double c, std::size_t n_samples,
                             std::uint64_t seed, std::vector<int> k_levels) {
    if (B <= 0.0) throw std::invalid_argument("tail_moment_check: B must be > 0");
    TailReport rep;
    rep.B = B;
    rep.c = c;
    rep.seed = seed;
    rep.n_samples = n_samples;
    rep.k_levels = k_levels;

    std::vector<double> top_l4;  // ||phi||_4 of mass-accepted samples, top level
    for (std::size_t lev = 0; lev < k_levels.size(); ++lev) {
        const ModeSet modes(k_levels[lev]);
        const int n_x = quartic_grid_size(modes.k_max);
        const bool final_level = lev + 1 == k_levels.size();
        std::vector<double> vals(n_samples);
        std::vector<double> l4(final_level ? n_samples : 0, -1.0);
        std::int64_t accepted = 0;
#pragma omp parallel for schedule(static) reduction(+ : accepted)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(n_samples); ++i) {
            SampleRng rng({seed, static_cast<std::uint64_t>(i)});
            const SpectralField phi = sample_free_field(modes, kappa, rng);
            if (mass(phi) > B * B) {
                vals[i] = 0.0;
                continue;
            }
            ++accepted;
            const double l4p4 = norm_l4_pow4_on_grid(phi, n_x);
            vals[i] = std::exp(c * l4p4);
            if (final_level) l4[i] = std::pow(l4p4, 0.25);
        }
        rep.moments.push_back(mean_se(vals));
        rep.mass_acceptance.push_back(static_cast<double>(accepted) /
                                      static_cast<double>(n_samples));
        if (lev > 0) {
            const double prev = rep.moments[lev - 1].value;
            const double cur = rep.moments[lev].value;
            rep.rel_change.push_back(std::abs(cur - prev) / std::max(1e-300, std::abs(cur)));
        }
        if (final_level)
            for (double v : l4)
                if (v >= 0.0) top_l4.push_back(v);
    }

    // exceedance curve between the conditional median and the 0.9999 quantile
    if (top_l4.size() > 100) {
        std::sort(top_l4.begin(), top_l4.end());
        const double lo = top_l4[top_l4.size() / 2];
        const double hi = top_l4[static_cast<std::size_t>(0.9999 * (top_l4.size() - 1))];
        const int n_grid = 12;
        for (int j = 0; j < n_grid; ++j) {
            const double u = lo * lo + (hi * hi - lo * lo) * j / (n_grid - 1);
            const double lambda = std::sqrt(u);
            const auto it = std::upper_bound(top_l4.begin(), top_l4.end(), lambda);
            const std::size_t exceed = static_cast<std::size_t>(top_l4.end() - it);
            rep.lambda_grid.push_back(lambda);
            rep.log_exceedance.push_back(
                std::log(std::max<double>(exceed, 0.5) / static_cast<double>(n_samples)));
        }
    }
    return rep;
}

}  // namespace nlsgibbs
