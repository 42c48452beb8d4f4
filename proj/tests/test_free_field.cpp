#include <doctest.h>

#include <cmath>

#include "nlsgibbs/free_field.hpp"
#include "nlsgibbs/gibbs.hpp"

using namespace nlsgibbs;

TEST_CASE("free field sampling statistics") {
    const ModeSet modes(2);
    const double kappa = 1.0;
    const std::size_t n = 100000;
    const FieldEnsemble ens = sample_free_ensemble(modes, kappa, n, 42);
    const OneBodySpectrum h(modes, kappa);

    for (int k = -2; k <= 2; ++k) {
        const int i = modes.index_of(k);
        const double lam = h.lambda_of(k);
        // centered: |mean| <= 4 sigma with sigma = 1/sqrt(lam n)
        const Complex mean = ens.samples.row(i).mean();
        CHECK(std::abs(mean) <= 4.0 / std::sqrt(lam * n));
        // E|phi_hat(k)|^2 = 1/lam, with Var(|omega|^2/lam) = 1/lam^2
        const double m2 = ens.samples.row(i).cwiseAbs2().mean();
        CHECK(std::abs(m2 - 1.0 / lam) <= 4.0 / (lam * std::sqrt(double(n))));
    }

    // E ||phi||^2 == truncated Tr(h^{-1}); the full sum has the closed form
    // (1/(2 sqrt(kappa))) coth(sqrt(kappa)/2) as a consistency anchor
    double mass_mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mass_mean += ens.samples.col(i).squaredNorm();
    mass_mean /= static_cast<double>(n);
    const double tr = h.trace_h_inverse();
    CHECK(std::abs(mass_mean - tr) < 4.0 * tr / std::sqrt(double(n)));

    const double closed = 0.5 / std::sqrt(kappa) / std::tanh(0.5 * std::sqrt(kappa));
    double partial = OneBodySpectrum(ModeSet(64), kappa).trace_h_inverse();
    CHECK(partial < closed);
    CHECK(closed - partial < 1e-2);
    CHECK(closed - OneBodySpectrum(ModeSet(2048), kappa).trace_h_inverse() < 1e-4);
}

TEST_CASE("reproducibility and substream independence") {
    const ModeSet modes(3);
    const FieldEnsemble a = sample_free_ensemble(modes, 1.0, 500, 7);
    const FieldEnsemble b = sample_free_ensemble(modes, 1.0, 500, 7);
    CHECK(a.samples == b.samples);
    const FieldEnsemble c = sample_free_ensemble(modes, 1.0, 500, 8);
    CHECK(a.samples != c.samples);
    // serial reference produces the identical ensemble
    const FieldEnsemble s = sample_free_ensemble_serial(modes, 1.0, 500, 7);
    CHECK(a.samples == s.samples);
}

TEST_CASE("wick oracle basics") {
    const ModeSet modes(2);
    const OneBodySpectrum h(modes, 1.3);

    // two factors phi_bar(g) phi(g), g the unit mode-k vector -> 1/lambda_k
    for (int k : {-2, 0, 1}) {
        Eigen::VectorXcd g = Eigen::VectorXcd::Zero(modes.size());
        g[modes.index_of(k)] = 1.0;
        std::vector<WickFactor> fs{{g, false}, {g, true}};
        CHECK(wick_moment_oracle(fs, h).real() ==
              doctest::Approx(1.0 / h.lambda_of(k)).epsilon(1e-14));
    }

    // |phi_hat(k)|^4: two complete pairings -> 2/lambda_k^2
    {
        Eigen::VectorXcd g = Eigen::VectorXcd::Zero(modes.size());
        g[modes.index_of(1)] = 1.0;
        std::vector<WickFactor> fs{{g, false}, {g, false}, {g, true}, {g, true}};
        const double lam = h.lambda_of(1);
        CHECK(wick_moment_oracle(fs, h).real() ==
              doctest::Approx(2.0 / (lam * lam)).epsilon(1e-14));
    }

    // odd number of factors -> 0; unbalanced conjugation -> 0
    {
        Eigen::VectorXcd g = Eigen::VectorXcd::Ones(modes.size());
        std::vector<WickFactor> odd{{g, false}, {g, true}, {g, false}};
        CHECK(wick_moment_oracle(odd, h) == Complex(0, 0));
        std::vector<WickFactor> unbal{{g, false}, {g, false}};
        CHECK(wick_moment_oracle(unbal, h) == Complex(0, 0));
    }

    std::vector<WickFactor> too_many(10, {Eigen::VectorXcd::Ones(modes.size()), false});
    CHECK_THROWS_AS(wick_moment_oracle(too_many, h), SizeError);

    // monomial oracle agrees with the vector form
    const std::vector<int> ks{1, -1}, ls{1, -1};
    const double expect = 1.0 / (h.lambda_of(1) * h.lambda_of(-1));
    CHECK(wick_monomial_oracle(ks, ls, h).real() == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("empirical moments vs oracles") {
    const ModeSet modes(1);
    const double kappa = 1.0;
    const OneBodySpectrum h(modes, kappa);
    const std::size_t n = 100000;
    const FieldEnsemble ens = sample_free_ensemble(modes, kappa, n, 99);

    // constant observable: mean 1, SE 0
    const ComplexEstimate one =
        empirical_moment(ens, [](const SpectralField&) { return Complex(1.0, 0.0); });
    CHECK(one.value.real() == 1.0);
    CHECK(one.std_error == 0.0);

    // N against truncated Tr h^{-1}
    const ComplexEstimate mn =
        empirical_moment(ens, [](const SpectralField& f) { return Complex(mass(f), 0.0); });
    CHECK(std::abs(mn.value.real() - h.trace_h_inverse()) <= 4.0 * mn.std_error);

    // |phi_hat(1)|^4 against the Wick value 2/lambda_1^2
    const int i1 = modes.index_of(1);
    const ComplexEstimate m4 = empirical_moment(ens, [i1](const SpectralField& f) {
        const double a = std::norm(f.coeffs[i1]);
        return Complex(a * a, 0.0);
    });
    const double lam = h.lambda_of(1);
    CHECK(std::abs(m4.value.real() - 2.0 / (lam * lam)) <= 5.0 * m4.std_error);

    // gauge invariance: E[phi_hat(0)^2] = 0 within 5 SE
    const int i0 = modes.index_of(0);
    const ComplexEstimate gauge = empirical_moment(
        ens, [i0](const SpectralField& f) { return f.coeffs[i0] * f.coeffs[i0]; });
    CHECK(std::abs(gauge.value) <= 5.0 * gauge.std_error);
}

TEST_CASE("wick consistency battery at low degree") {
    const ModeSet modes(1);
    const OneBodySpectrum h(modes, 1.0);
    const std::size_t n = 30000;
    const FieldEnsemble ens = sample_free_ensemble(modes, 1.0, n, 1234);
    const int d = modes.size();

    // all monomials prod phi_hat(k_i) prod conj(phi_hat(l_j)) of degree <= 4
    int checked = 0;
    for (int deg = 1; deg <= 4; ++deg) {
        std::vector<int> sel(deg, 0);
        // each slot chooses (mode, conj) out of 2d options
        const int options = 2 * d;
        std::vector<int> stack(deg, 0);
        while (true) {
            // non-decreasing stacks only: monomials are unordered products
            bool sorted = true;
            for (int i = 1; i < deg; ++i) sorted &= stack[i] >= stack[i - 1];
            if (sorted) {
                std::vector<int> ks, ls;
                for (int i = 0; i < deg; ++i) {
                    const int mode = modes.mode_at(stack[i] % d);
                    if (stack[i] < d)
                        ks.push_back(mode);
                    else
                        ls.push_back(mode);
                }
                const Complex oracle = wick_monomial_oracle(ks, ls, h);
                const ComplexEstimate mc = empirical_moment(ens, [&](const SpectralField& f) {
                    Complex v{1.0, 0.0};
                    for (int k : ks) v *= f.at(k);
                    for (int l : ls) v *= std::conj(f.at(l));
                    return v;
                });
                CHECK(std::abs(mc.value - oracle) <= 5.0 * std::max(mc.std_error, 1e-12));
                ++checked;
            }
            int pos = deg - 1;
            while (pos >= 0 && ++stack[pos] == options) stack[pos--] = 0;
            if (pos < 0) break;
        }
    }
    CHECK(checked > 50);
}
