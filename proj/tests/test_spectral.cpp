#include <doctest.h>

#include <numbers>

#include "nlsgibbs/free_field.hpp"
#include "nlsgibbs/spectral.hpp"

using namespace nlsgibbs;

namespace {
constexpr double kPi = std::numbers::pi;

SpectralField random_field(int k_max, double kappa, std::uint64_t seed) {
    SampleRng rng({seed, 0});
    return sample_free_field(ModeSet(k_max), kappa, rng);
}
}  // namespace

TEST_CASE("eigenvalue formula and symmetry") {
    CHECK(eigenvalue(0, 1.0) == 1.0);
    CHECK(eigenvalue(1, 1.0) == doctest::Approx(4 * kPi * kPi + 1.0).epsilon(1e-15));
    CHECK(eigenvalue(-2, 0.5) == eigenvalue(2, 0.5));
    CHECK_THROWS_AS(eigenvalue(1, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(eigenvalue(1, -1.0), std::invalid_argument);
    // strict positivity across a mode set
    const OneBodySpectrum h(ModeSet(8), 0.3);
    CHECK(h.lambda.minCoeff() > 0.0);
}

TEST_CASE("transform: constant field and single mode") {
    SpectralField f{ModeSet(3)};
    f.at(0) = Complex(0.7, -0.2);
    const GridField g = to_grid(f, 16);
    for (int j = 0; j < 16; ++j) CHECK(std::abs(g.values[j] - Complex(0.7, -0.2)) < 1e-14);
    const SpectralField back = to_spectral(g, 3);
    CHECK(std::abs(back.at(0) - Complex(0.7, -0.2)) < 1e-14);
    for (int k = -3; k <= 3; ++k)
        if (k != 0) CHECK(std::abs(back.at(k)) < 1e-14);

    // g(x) = e^{2 pi i x} -> g_hat(1) = 1
    GridField pw;
    pw.n_x = 32;
    pw.values.resize(32);
    for (int j = 0; j < 32; ++j) {
        const double x = -0.5 + j / 32.0;
        pw.values[j] = std::polar(1.0, 2 * kPi * x);
    }
    const SpectralField sp = to_spectral(pw, 4);
    CHECK(std::abs(sp.at(1) - 1.0) < 1e-14);
    for (int k = -4; k <= 4; ++k)
        if (k != 1) CHECK(std::abs(sp.at(k)) < 1e-14);
}

TEST_CASE("transform round trip and Parseval on random fields") {
    for (std::uint64_t seed : {11u, 12u, 13u}) {
        const SpectralField f = random_field(5, 1.0, seed);
        const GridField g = to_grid(f, 16);
        const SpectralField back = to_spectral(g, 5);
        CHECK((back.coeffs - f.coeffs).norm() <= 1e-12 * f.coeffs.norm());
        // Parseval: sum |g_hat|^2 == int |g|^2
        double grid_l2 = 0.0;
        for (int j = 0; j < g.n_x; ++j) grid_l2 += std::norm(g.values[j]);
        grid_l2 /= g.n_x;
        CHECK(f.coeffs.squaredNorm() == doctest::Approx(grid_l2).epsilon(1e-12));
    }
    CHECK_THROWS_AS(to_grid(random_field(5, 1.0, 1), 8), AliasingError);
}

TEST_CASE("norms") {
    SpectralField f{ModeSet(2)};
    f.at(0) = 1.0;
    CHECK(field_norm(f, NormKind::L2) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(field_norm(f, NormKind::L4) == doctest::Approx(1.0).epsilon(1e-14));

    SpectralField g{ModeSet(2)};
    g.at(0) = 1.0;
    g.at(1) = 1.0;
    CHECK(field_norm(g, NormKind::L2) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    // Hs at s = 0 equals L2
    const SpectralField r = random_field(4, 0.7, 3);
    CHECK(field_norm(r, NormKind::Hs, 0.0) ==
          doctest::Approx(field_norm(r, NormKind::L2)).epsilon(1e-14));
    CHECK_THROWS_AS(norm_l4_pow4_on_grid(r, 8), PrecisionError);
    // density-coefficient identity: ||f||_4^4 = sum_m |g_hat(m)|^2
    const double l4g = norm_l4_pow4_on_grid(r, 32);
    CHECK(density_coefficients(r).squaredNorm() == doctest::Approx(l4g).epsilon(1e-12));
}

TEST_CASE("heat propagator: diagonal action and limits") {
    const SpectralField f = random_field(4, 1.0, 7);
    CHECK_THROWS_AS(heat_propagator(0.0, f, 1.0), std::invalid_argument);
    // t -> 0: output -> input
    const SpectralField tiny = heat_propagator(1e-14, f, 1.0);
    CHECK((tiny.coeffs - f.coeffs).norm() < 1e-10 * f.coeffs.norm());
    // single mode scaling at t = 1
    SpectralField one{ModeSet(3)};
    one.at(2) = 1.0;
    const SpectralField out = heat_propagator(1.0, one, 0.5);
    CHECK(std::abs(out.at(2) - std::exp(-eigenvalue(2, 0.5))) < 1e-15);
    // L2 contraction
    const SpectralField c = heat_propagator(0.3, f, 1.0);
    CHECK(field_norm(c, NormKind::L2) <= std::exp(-0.3 * 1.0) * field_norm(f, NormKind::L2));
}

TEST_CASE("heat propagator vs truncated image-sum kernel") {
    // e^{-t h} phi == e^{-t kappa} psi^t * phi with the periodic heat kernel
    // psi^t(x) = sum_n (4 pi t)^{-1/2} e^{-(x-n)^2/(4t)}
    const double t = 0.1, kappa = 1.0;
    const int k_max = 4, n_x = 64;
    const SpectralField f = random_field(k_max, kappa, 21);
    const GridField g = to_grid(f, n_x);
    Eigen::VectorXcd conv = Eigen::VectorXcd::Zero(n_x);
    for (int j = 0; j < n_x; ++j) {
        const double x = -0.5 + static_cast<double>(j) / n_x;
        Complex acc{0.0, 0.0};
        for (int i = 0; i < n_x; ++i) {
            const double y = -0.5 + static_cast<double>(i) / n_x;
            double kernel = 0.0;
            for (int n = -10; n <= 10; ++n)
                kernel += std::exp(-(x - y - n) * (x - y - n) / (4 * t)) /
                          std::sqrt(4 * kPi * t);
            acc += kernel * g.values[i];
        }
        conv[j] = std::exp(-t * kappa) * acc / static_cast<double>(n_x);
    }
    const SpectralField via_kernel = to_spectral(GridField{n_x, conv}, k_max);
    const SpectralField via_diag = heat_propagator(t, f, kappa);
    CHECK((via_kernel.coeffs - via_diag.coeffs).norm() < 1e-10);
}
