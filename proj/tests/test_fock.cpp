#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nlsgibbs/fock.hpp"

using namespace nlsgibbs;

TEST_CASE("basis enumeration and block structure") {
    // one mode, n_max = 3: occupations 0..3
    const FockBasis b1 = build_basis(ModeSet(0), 3);
    CHECK(b1.n_states == 4);

    // d = 3, n_max = 2: 1 + 3 + 6 = 10 states
    const FockBasis b3 = build_basis(ModeSet(1), 2);
    CHECK(b3.n_states == 10);

    // state (1,0,1) over modes (-1,0,1) has momentum 0 and n = 2
    const std::uint16_t occ[3] = {1, 0, 1};
    const std::int64_t s = b3.find_state(occ);
    REQUIRE(s >= 0);
    CHECK(b3.total_n(s) == 2);
    CHECK(b3.total_momentum(s) == 0);
    const auto& blk = b3.blocks[b3.state_block[s]];
    CHECK(blk.n == 2);
    CHECK(blk.momentum == 0);

    // deterministic enumeration: same call, same layout
    const FockBasis again = build_basis(ModeSet(1), 2);
    CHECK(again.occ_flat == b3.occ_flat);

    CHECK_THROWS_AS(build_basis(ModeSet(2), 64, 1000), SizeError);
}

TEST_CASE("ladder consistency below the top layer") {
    // [a_k, a*_k] = 1 on every state with n < n_max; the defect is confined to
    // the top layer where a*_k leaves the truncated basis
    const FockBasis b = build_basis(ModeSet(1), 4);
    std::vector<std::uint16_t> tmp(3);
    std::size_t checked = 0, top = 0;
    for (std::size_t s = 0; s < b.n_states; ++s) {
        for (int k = 0; k < 3; ++k) {
            const std::uint16_t* occ = b.occ(s);
            std::copy(occ, occ + 3, tmp.begin());
            ++tmp[k];
            const std::int64_t raised = b.find_state(tmp.data());
            if (b.total_n(s) < b.n_max) {
                REQUIRE(raised >= 0);
                // <s| a a* |s> - <s| a* a |s> = (n_k + 1) - n_k = 1
                const double comm = (occ[k] + 1.0) - occ[k];
                CHECK(comm == 1.0);
                ++checked;
            } else {
                CHECK(raised < 0);  // boundary effect, never silent
                ++top;
            }
        }
    }
    CHECK(checked > 0);
    CHECK(top > 0);
}

TEST_CASE("theta lift: sector scalars for the identity kernel") {
    const FockBasis b = build_basis(ModeSet(1), 4);
    const double tau = 2.0;

    // p = 1: on sector n the identity lift is n / tau (n=3 -> 3/2)
    const BlockOperator t1 =
        build_theta(b, tau, Eigen::MatrixXcd::Identity(3, 3), 1);
    for (std::size_t bi = 0; bi < b.blocks.size(); ++bi) {
        const int n = b.blocks[bi].n;
        CHECK((t1.blocks[bi] -
               (n / tau) * Eigen::MatrixXcd::Identity(t1.blocks[bi].rows(),
                                                      t1.blocks[bi].cols()))
                  .cwiseAbs()
                  .maxCoeff() < 1e-14);
    }

    // p = 2: identity lift acts as (2!/tau^2) C(n,2); in particular 0 on n = 1
    const BlockOperator t2 = build_theta(b, tau, Eigen::MatrixXcd::Identity(9, 9), 2);
    for (std::size_t bi = 0; bi < b.blocks.size(); ++bi) {
        const int n = b.blocks[bi].n;
        const double expect = 2.0 / (tau * tau) * (n * (n - 1) / 2.0);
        CHECK((t2.blocks[bi] -
               expect * Eigen::MatrixXcd::Identity(t2.blocks[bi].rows(), t2.blocks[bi].cols()))
                  .cwiseAbs()
                  .maxCoeff() < 1e-13);
    }

    // momentum-violating kernels are rejected
    Eigen::MatrixXcd bad = Eigen::MatrixXcd::Zero(3, 3);
    bad(0, 1) = 1.0;
    CHECK_THROWS_AS(build_theta(b, tau, bad, 1), std::invalid_argument);
}

TEST_CASE("W_tau assembly vs two-particle position-space kernel") {
    // on the n = 2 sector, W_tau acts with kernel (1/tau^2) w(x1 - x2); build
    // the sector matrix by brute-force double quadrature over symmetrized
    // plane waves and compare entrywise
    const ModeSet modes(1);
    const double tau = 1.7;
    const Potential w = Potential::fourier({0.4, -0.3, 0.2});
    const FockBasis b = build_basis(modes, 2);
    const BlockOperator W = build_w(b, tau, w);
    CHECK(W.hermiticity_defect() < 1e-12);

    const int n_x = 32;
    const int d = 3;
    // two-particle basis states with n = 2: |k1 k2> symmetrized
    struct Pair {
        int k1, k2;
    };
    std::vector<Pair> pairs;
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) pairs.push_back({modes.mode_at(i), modes.mode_at(j)});

    auto sym_wave2 = [&](const Pair& p, double x1, double x2) -> Complex {
        const Complex e1 = std::polar(1.0, 2 * std::numbers::pi * (p.k1 * x1 + p.k2 * x2));
        if (p.k1 == p.k2) return e1;
        const Complex e2 = std::polar(1.0, 2 * std::numbers::pi * (p.k2 * x1 + p.k1 * x2));
        return (e1 + e2) / std::sqrt(2.0);
    };

    for (std::size_t a = 0; a < pairs.size(); ++a) {
        for (std::size_t c = 0; c < pairs.size(); ++c) {
            if (pairs[a].k1 + pairs[a].k2 != pairs[c].k1 + pairs[c].k2) continue;
            Complex acc{0.0, 0.0};
            for (int i = 0; i < n_x; ++i)
                for (int j = 0; j < n_x; ++j) {
                    const double x1 = -0.5 + static_cast<double>(i) / n_x;
                    const double x2 = -0.5 + static_cast<double>(j) / n_x;
                    double wv = w.fourier_coefficient(0);
                    for (int m = 1; m <= 2; ++m)
                        wv += 2.0 * w.fourier_coefficient(m) *
                              std::cos(2 * std::numbers::pi * m * (x1 - x2));
                    acc += std::conj(sym_wave2(pairs[a], x1, x2)) * wv *
                           sym_wave2(pairs[c], x1, x2);
                }
            acc /= static_cast<double>(n_x) * n_x * (tau * tau);

            // locate the matrix element in the block operator
            std::uint16_t occ_a[3] = {0, 0, 0}, occ_c[3] = {0, 0, 0};
            ++occ_a[modes.index_of(pairs[a].k1)];
            ++occ_a[modes.index_of(pairs[a].k2)];
            ++occ_c[modes.index_of(pairs[c].k1)];
            ++occ_c[modes.index_of(pairs[c].k2)];
            const std::int64_t sa = b.find_state(occ_a), sc = b.find_state(occ_c);
            REQUIRE(sa >= 0);
            REQUIRE(sc >= 0);
            REQUIRE(b.state_block[sa] == b.state_block[sc]);
            const Complex got =
                W.blocks[b.state_block[sa]](b.state_pos[sa], b.state_pos[sc]);
            CHECK(std::abs(got - acc) < 1e-10);
        }
    }
}

TEST_CASE("W'_tau = W_tau + (w(0)/(2 tau)) N_tau") {
    const FockBasis b = build_basis(ModeSet(1), 3);
    const Potential w = Potential::fourier({0.4, 0.1, 0.05});
    const double tau = 2.0;
    const BlockOperator wp = build_w_prime(b, tau, w);
    const BlockOperator wn = build_w(b, tau, w);
    const BlockOperator nt = build_n(b, tau);
    double w0 = 0.0;
    for (int m = -2; m <= 2; ++m) w0 += w.fourier_coefficient(m);
    for (std::size_t bi = 0; bi < b.blocks.size(); ++bi)
        CHECK((wp.blocks[bi] - wn.blocks[bi] - 0.5 * w0 / tau * nt.blocks[bi])
                  .cwiseAbs()
                  .maxCoeff() < 1e-13);
}

TEST_CASE("partition functions") {
    // single mode with lambda/tau = 1: Z_{tau,0} = 1/(1 - e^{-1})
    {
        const double kappa = 2.0, tau = 2.0;  // lambda_0 = 2, lambda/tau = 1
        const OneBodySpectrum h(ModeSet(0), kappa);
        const FockBasis b = build_basis(ModeSet(0), 60);
        const ThermalDecomposition dec = decompose(build_h0(b, h, tau));
        const PartitionFunctions pf =
            partition_functions(dec, CutoffFunction::diagnostic_one(), h);
        CHECK(pf.Z_tau0 == doctest::Approx(1.0 / (1.0 - std::exp(-1.0))).epsilon(1e-12));
        CHECK(pf.Z_rel == 1.0);
    }

    // free diagnostic on several modes: Z_rel = 1 exactly
    {
        const OneBodySpectrum h(ModeSet(1), 1.0);
        const FockBasis b = build_basis(ModeSet(1), 20);
        const ThermalDecomposition dec = decompose(build_h0(b, h, 2.0));
        const PartitionFunctions pf =
            partition_functions(dec, CutoffFunction::diagnostic_one(), h);
        CHECK(pf.Z_rel == 1.0);
    }

    // truncated free sum approaches the product formula when the tail is small
    {
        const OneBodySpectrum h(ModeSet(2), 1.0);
        const double tau = 16.0;
        double zp = 1.0;
        for (int i = 0; i < h.modes.size(); ++i) zp /= -std::expm1(-h.lambda[i] / tau);
        CHECK(std::abs(free_partition_truncated(h, tau, 512) - zp) < 1e-10 * zp);
    }

    // K tau > n_max is refused, not silently truncated
    {
        const OneBodySpectrum h(ModeSet(1), 1.0);
        const FockBasis b = build_basis(ModeSet(1), 4);
        const BlockOperator H0 = build_h0(b, h, 4.0);
        const BlockOperator W = build_w(b, 4.0, Potential::constant(0.1));
        const ThermalDecomposition dec = decompose(H0, W, 1.0);
        CHECK_THROWS_AS(
            partition_functions(dec, CutoffFunction::plateau_bump(4.0, 0.5), h),
            TruncationError);
    }

    // monotonicity: increasing a nonnegative w decreases Z_tau
    {
        const OneBodySpectrum h(ModeSet(1), 1.0);
        const double tau = 2.0;
        const CutoffFunction f = CutoffFunction::plateau_bump(3.0, 0.5);
        const FockBasis b = build_basis(ModeSet(1), 6);
        const BlockOperator H0 = build_h0(b, h, tau);
        double prev = 1e300;
        for (double scale : {0.1, 0.3, 0.9}) {
            const BlockOperator W = build_w(b, tau, Potential::constant(scale));
            const PartitionFunctions pf = partition_functions(decompose(H0, W, 1.0), f, h);
            CHECK(pf.Z_tau < prev);
            prev = pf.Z_tau;
        }
    }
}

TEST_CASE("quantum expectation and free Bose factor") {
    const OneBodySpectrum h(ModeSet(1), 6.0);  // kappa large: truncation tail ~ e^{-6 n/tau}
    const double tau = 1.0;
    const FockBasis b = build_basis(ModeSet(1), 40);
    const ThermalDecomposition dec = decompose(build_h0(b, h, tau));
    const CutoffFunction f1 = CutoffFunction::diagnostic_one();

    // A = identity -> 1
    BlockOperator id = BlockOperator::zeros(b, tau);
    for (auto& m : id.blocks) m.setIdentity();
    CHECK(quantum_expectation(id, dec, f1).real() == doctest::Approx(1.0).epsilon(1e-13));

    // free two-point: gamma_{tau,1}(k,k) = 1/(tau (e^{lambda_k/tau} - 1))
    const Eigen::MatrixXcd g = gamma_tau_p(dec, f1, 1);
    for (int i = 0; i < 3; ++i) {
        const double expect = bose_two_point(h.lambda[i], tau);
        CHECK(g(i, i).real() == doctest::Approx(expect).epsilon(1e-10));
    }
    // off-diagonals vanish by momentum conservation
    CHECK(std::abs(g(0, 1)) < 1e-14);

    // trace consistency: tr gamma_1 == rho(N_tau)
    const BlockOperator nt = build_n(b, tau);
    const Complex nexp = quantum_expectation(nt, dec, f1);
    CHECK(std::abs(g.trace().real() - nexp.real()) < 1e-10);

    // PSD
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10);

    // N_tau expectation lies inside the cutoff support for compact f
    const CutoffFunction fc = CutoffFunction::plateau_bump(3.0, 0.5);
    const FockBasis bc = build_basis(ModeSet(1), 3);
    const BlockOperator H0c = build_h0(bc, h, 1.0);
    const BlockOperator Wc = build_w(bc, 1.0, Potential::constant(0.2));
    const ThermalDecomposition decc = decompose(H0c, Wc, 1.0);
    const Complex nv = quantum_expectation(build_n(bc, 1.0), decc, fc);
    CHECK(nv.real() >= 0.0);
    CHECK(nv.real() <= 3.0);
}

TEST_CASE("free-state quantum Wick property for the 4-point function") {
    const OneBodySpectrum h(ModeSet(1), 6.0);
    const double tau = 1.0;
    const FockBasis b = build_basis(ModeSet(1), 40);
    const ThermalDecomposition dec = decompose(build_h0(b, h, tau));
    const Eigen::MatrixXcd g2 = gamma_tau_p(dec, CutoffFunction::diagnostic_one(), 2);
    const Eigen::MatrixXcd g1 = gamma_tau_p(dec, CutoffFunction::diagnostic_one(), 1);
    const int d = 3;
    // gamma_2((k1,k2),(l1,l2)) = g1(k1,l1) g1(k2,l2) + g1(k1,l2) g1(k2,l1)
    for (int k1 = 0; k1 < d; ++k1)
        for (int k2 = 0; k2 < d; ++k2)
            for (int l1 = 0; l1 < d; ++l1)
                for (int l2 = 0; l2 < d; ++l2) {
                    const Complex expect =
                        g1(k1, l1) * g1(k2, l2) + g1(k1, l2) * g1(k2, l1);
                    CHECK(std::abs(g2(k1 * d + k2, l1 * d + l2) - expect) < 1e-10);
                }
}

TEST_CASE("gamma_tau trend toward the classical covariance") {
    const OneBodySpectrum h(ModeSet(1), 1.0);
    double prev = 1e300;
    for (double tau : {4.0, 8.0, 16.0}) {
        double dev = 0.0;
        for (int i = 0; i < 3; ++i)
            dev += std::abs(bose_two_point(h.lambda[i], tau) - 1.0 / h.lambda[i]);
        // deviation per mode is ~ 1/(2 tau): halves when tau doubles
        CHECK(dev < prev * 0.6);
        CHECK(dev == doctest::Approx(3.0 / (2.0 * tau)).epsilon(0.25));
        prev = dev;
    }
}

TEST_CASE("duhamel coefficients: m=0 formula, m=1 oracle, m=2 bound") {
    const ModeSet modes(1);
    const double kappa = 1.0, tau = 3.0, K = 4.0;
    const OneBodySpectrum h(modes, kappa);
    const CutoffFunction f = CutoffFunction::plateau_bump(K, 0.5);
    const Potential w = Potential::constant(0.2);
    const FockBasis b = build_basis(modes, static_cast<int>(std::ceil(K * tau)));
    const Eigen::MatrixXcd xi = Eigen::MatrixXcd::Identity(3, 3);

    // m = 0: Tr(Theta e^{-H0} f)/Z0 is also reachable through a plain trace
    const double a0 = duhamel_coefficient_a_tau_m(b, h, tau, w, f, xi, 1, 0);
    const ThermalDecomposition dec0 = decompose(build_h0(b, h, tau));
    const BlockOperator theta = build_theta(b, tau, xi, 1);
    double z0 = 1.0;
    for (int i = 0; i < 3; ++i) z0 /= -std::expm1(-h.lambda[i] / tau);
    double direct = 0.0;
    for (std::size_t bi = 0; bi < b.blocks.size(); ++bi) {
        const double fv = f(static_cast<double>(b.blocks[bi].n) / tau);
        for (Eigen::Index j = 0; j < dec0.eigenvalues[bi].size(); ++j)
            direct += fv * std::exp(-dec0.eigenvalues[bi][j]) *
                      (dec0.eigenvectors[bi].adjoint() * theta.blocks[bi] *
                       dec0.eigenvectors[bi])(j, j)
                          .real();
    }
    CHECK(a0 == doctest::Approx(direct / z0).epsilon(1e-10));

    // m = 1: quadrature vs closed-form eigenbasis integral
    const double a1q = duhamel_coefficient_a_tau_m(b, h, tau, w, f, xi, 1, 1);
    const double a1c = duhamel_m1_closed_form(b, h, tau, w, f, xi, 1);
    CHECK(std::abs(a1q - a1c) < 1e-8);

    // m = 2 obeys the bound K^p ||xi|| (K^2 ||w||_inf)^2 / 8
    const double a2 = duhamel_coefficient_a_tau_m(b, h, tau, w, f, xi, 1, 2);
    CHECK(std::abs(a2) <= K * 1.0 * std::pow(K * K * 0.2, 2) / 8.0);

    CHECK_THROWS_AS(duhamel_coefficient_a_tau_m(b, h, tau, w, f, xi, 1, 3), SizeError);
}

TEST_CASE("heisenberg evolution") {
    const ModeSet modes(1);
    const OneBodySpectrum h(modes, 1.0);
    const double tau = 2.0;
    const FockBasis b = build_basis(modes, 8);
    const BlockOperator H0 = build_h0(b, h, tau);
    const BlockOperator W = build_w(b, tau, Potential::constant(0.3));
    const ThermalDecomposition dec = decompose(H0, W, 1.0);
    const BlockOperator H = block_add(H0, W, 1.0);
    const BlockOperator N = build_n(b, tau);

    // t = 0: unchanged
    const BlockOperator same = heisenberg_evolve(N, dec, 0.0);
    for (std::size_t bi = 0; bi < b.blocks.size(); ++bi)
        CHECK((same.blocks[bi] - N.blocks[bi]).cwiseAbs().maxCoeff() < 1e-12);

    // A = H_tau commutes with the evolution
    const BlockOperator hsame = heisenberg_evolve(H, dec, 0.37);
    for (std::size_t bi = 0; bi < b.blocks.size(); ++bi)
        CHECK((hsame.blocks[bi] - H.blocks[bi]).cwiseAbs().maxCoeff() < 1e-10);

    // N_tau is conserved: the normal-ordered W_tau commutes with N
    const BlockOperator nsame = heisenberg_evolve(N, dec, 0.53);
    for (std::size_t bi = 0; bi < b.blocks.size(); ++bi)
        CHECK((nsame.blocks[bi] - N.blocks[bi]).cwiseAbs().maxCoeff() < 1e-10);

    // unitary similarity preserves the spectrum
    const BlockOperator A = build_theta(b, tau, Eigen::MatrixXcd::Identity(3, 3), 1);
    const BlockOperator At = heisenberg_evolve(A, dec, 0.7);
    for (std::size_t bi = 0; bi < b.blocks.size(); ++bi) {
        if (A.blocks[bi].rows() == 0) continue;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ea(A.blocks[bi]), eb(At.blocks[bi]);
        CHECK((ea.eigenvalues() - eb.eigenvalues()).cwiseAbs().maxCoeff() < 1e-10);
    }

    // [H, N] = 0 and momentum conservation hold exactly by block structure:
    // H assembled block-diagonal in (n, momentum)
    CHECK(H.hermiticity_defect() < 1e-12);
}
