#include "nlsgibbs/free_field.hpp"

#include <algorithm>
#include <numeric>

namespace nlsgibbs {

SpectralField sample_free_field(const ModeSet& modes, double kappa, SampleRng& rng) {
    SpectralField f{modes};
    for (int i = 0; i < modes.size(); ++i) {
        const double lam = eigenvalue(modes.mode_at(i), kappa);
        f.coeffs[i] = rng.complex_gaussian() / std::sqrt(lam);
    }
    return f;
}

namespace {
FieldEnsemble make_ensemble(const ModeSet& modes, double kappa, std::size_t n,
                            std::uint64_t seed, bool parallel) {
    FieldEnsemble ens;
    ens.modes = modes;
    ens.kappa = kappa;
    ens.seed = seed;
    ens.samples.resize(modes.size(), static_cast<Eigen::Index>(n));
    const auto fill = [&](std::int64_t i) {
        SampleRng rng({seed, static_cast<std::uint64_t>(i)});
        const SpectralField f = sample_free_field(modes, kappa, rng);
        ens.samples.col(i) = f.coeffs;
    };
    if (parallel) {
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) fill(i);
    } else {
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) fill(i);
    }
    return ens;
}
}  // namespace

FieldEnsemble sample_free_ensemble(const ModeSet& modes, double kappa, std::size_t n,
                                   std::uint64_t seed) {
    return make_ensemble(modes, kappa, n, seed, true);
}

FieldEnsemble sample_free_ensemble_serial(const ModeSet& modes, double kappa, std::size_t n,
                                          std::uint64_t seed) {
    return make_ensemble(modes, kappa, n, seed, false);
}

namespace {
// value of the contraction E[ (phi)^{*_a}(g_a) (phi)^{*_b}(g_b) ]; nonzero only
// for mixed conjugation, where it equals <g, h^{-1} g_tilde>
Complex pair_value(const WickFactor& a, const WickFactor& b, const OneBodySpectrum& h) {
    if (a.conjugated == b.conjugated) return {0.0, 0.0};
    const WickFactor& plain = a.conjugated ? b : a;  // phi(g)
    const WickFactor& conj = a.conjugated ? a : b;   // phi_bar(g_tilde)
    Complex acc{0.0, 0.0};
    for (int i = 0; i < h.modes.size(); ++i)
        acc += std::conj(plain.g[i]) * conj.g[i] / h.lambda[i];
    return acc;
}

Complex pairing_sum(std::vector<int>& left, std::span<const WickFactor> factors,
                    const OneBodySpectrum& h) {
    if (left.empty()) return {1.0, 0.0};
    const int first = left[0];
    Complex acc{0.0, 0.0};
    for (std::size_t j = 1; j < left.size(); ++j) {
        const int partner = left[j];
        const Complex pv = pair_value(factors[first], factors[partner], h);
        if (pv != Complex{0.0, 0.0}) {
            std::vector<int> rest;
            rest.reserve(left.size() - 2);
            for (std::size_t t = 1; t < left.size(); ++t)
                if (t != j) rest.push_back(left[t]);
            acc += pv * pairing_sum(rest, factors, h);
        }
    }
    return acc;
}
}  // namespace

Complex wick_moment_oracle(std::span<const WickFactor> factors, const OneBodySpectrum& h) {
    const std::size_t N = factors.size();
    if (N > 8) throw SizeError("wick_moment_oracle: more than 8 factors");
    if (N % 2 != 0) return {0.0, 0.0};
    std::size_t n_conj = 0;
    for (const auto& f : factors) n_conj += f.conjugated ? 1 : 0;
    if (2 * n_conj != N) return {0.0, 0.0};  // gauge invariance
    std::vector<int> all(N);
    std::iota(all.begin(), all.end(), 0);
    return pairing_sum(all, factors, h);
}

Complex wick_monomial_oracle(std::span<const int> ks, std::span<const int> ls,
                             const OneBodySpectrum& h) {
    if (ks.size() + ls.size() > 8) throw SizeError("wick_monomial_oracle: degree above 8");
    if (ks.size() != ls.size()) return {0.0, 0.0};
    const int n = static_cast<int>(ks.size());
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double acc = 0.0;
    do {
        double prod = 1.0;
        for (int i = 0; i < n; ++i) {
            if (ks[i] != ls[perm[i]]) {
                prod = 0.0;
                break;
            }
            prod /= h.lambda_of(ks[i]);
        }
        acc += prod;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return {acc, 0.0};
}

ComplexEstimate empirical_moment(const FieldEnsemble& ens,
                                 const std::function<Complex(const SpectralField&)>& observable) {
    const std::size_t n = ens.size();
    if (n < 2) throw std::invalid_argument("empirical_moment: need at least 2 samples");
    std::vector<double> re(n), im(n);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
        const Complex v = observable(ens.field(static_cast<std::size_t>(i)));
        re[i] = v.real();
        im[i] = v.imag();
    }
    const Estimate er = mean_jackknife(re);
    const Estimate ei = mean_jackknife(im);
    return {{er.value, ei.value},
            std::sqrt(er.std_error * er.std_error + ei.std_error * ei.std_error),
            n};
}

}  // namespace nlsgibbs
