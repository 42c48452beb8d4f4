#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nlsgibbs/potential.hpp"

using namespace nlsgibbs;

TEST_CASE("fourier coefficients of the basic variants") {
    const Potential c = Potential::constant(0.7);
    CHECK(c.fourier_coefficient(0) == 0.7);
    CHECK(c.fourier_coefficient(3) == 0.0);

    const Potential d = Potential::exact_delta();
    for (int m : {0, 1, 5, 17}) CHECK(d.fourier_coefficient(m) == -1.0);

    const Potential w = Potential::delta_approx({DeltaProfile::Shape::Triangle, 0.5}, 0.1);
    CHECK(w.fourier_coefficient(0) == doctest::Approx(-1.0).epsilon(1e-10));
}

TEST_CASE("delta approximation: scaling and small-epsilon limit") {
    // epsilon = 1: w^1 == U itself
    const DeltaProfile tri{DeltaProfile::Shape::Triangle, 0.25};
    const Potential w1 = Potential::delta_approx(tri, 1.0);
    const auto& v = w1.grid_values();
    const int n = static_cast<int>(v.size());
    for (int j = 0; j < n; j += 7) {
        const double x = -0.5 + static_cast<double>(j) / n;
        CHECK(v[j] == doctest::Approx(tri(x)).epsilon(1e-12));
    }

    // epsilon = 1/2, box profile on [-1/2,1/2]: w = -2 on [-1/4,1/4), 0 elsewhere
    const Potential wb = Potential::delta_approx({DeltaProfile::Shape::Box, 0.5}, 0.5);
    const auto& vb = wb.grid_values();
    const int nb = static_cast<int>(vb.size());
    for (int j = 0; j < nb; j += 5) {
        const double x = -0.5 + static_cast<double>(j) / nb;
        if (std::abs(x) < 0.249)
            CHECK(vb[j] == doctest::Approx(-2.0).epsilon(1e-12));
        else if (std::abs(x) > 0.251)
            CHECK(vb[j] == 0.0);
    }

    // w_hat^eps(m) -> -1 pointwise and monotonically as eps decreases
    for (int m : {1, 2}) {
        double prev = -2.0;
        for (double eps : {0.2, 0.1, 0.05}) {
            const double cur =
                Potential::delta_approx({DeltaProfile::Shape::Triangle, 0.5}, eps)
                    .fourier_coefficient(m);
            CHECK(cur > prev);
            CHECK(cur < 0.0);
            prev = cur;
        }
        CHECK(prev == doctest::Approx(-1.0).epsilon(1e-2));
    }

    // mass check: int w^eps = -1 to 1e-8 via the stored samples
    for (double eps : {0.3, 0.05}) {
        const Potential w = Potential::delta_approx({DeltaProfile::Shape::Triangle, 0.5}, eps);
        const auto& s = w.grid_values();
        double acc = 0.0;
        for (double x : s) acc += x;
        CHECK(acc / static_cast<double>(s.size()) == doctest::Approx(-1.0).epsilon(1e-8));
    }
}

TEST_CASE("delta approximation rejects bad profiles") {
    DeltaProfile bad{DeltaProfile::Shape::Triangle, 0.5};
    CHECK_THROWS_AS(Potential::delta_approx(bad, 1.5), std::invalid_argument);
    DeltaProfile wide{DeltaProfile::Shape::Box, 0.7};
    CHECK_THROWS_AS(Potential::delta_approx(wide, 0.5), std::invalid_argument);
}

TEST_CASE("L1 clipping") {
    // bounded potential below the threshold: unchanged
    const Potential flat = Potential::constant(0.5);
    const Potential clipped = Potential::l1_clip(flat, 1.0);
    CHECK(clipped.fourier_coefficient(0) == doctest::Approx(0.5).epsilon(1e-14));

    // a spike of height 2/eps is zeroed
    std::vector<double> v(64, 0.1);
    v[0] = 20.0;  // x = -1/2, its own mirror
    const Potential spiky = Potential::grid(v);
    const Potential cl = Potential::l1_clip(spiky, 0.1);  // threshold 10
    CHECK(cl.grid_values()[0] == 0.0);
    CHECK(cl.grid_values()[5] == 0.1);
    CHECK(cl.linf_norm() <= 10.0);

    // L1 distance to w nonincreasing as eps decreases
    const Potential spike = Potential::inverse_sqrt_spike(-0.4, 1024);
    double prev = 1e300;
    for (double eps : {1.0, 0.5, 0.25}) {
        const Potential we = Potential::l1_clip(spike, eps);
        const auto &a = spike.grid_values(), &b = we.grid_values();
        double dist = 0.0;
        for (std::size_t j = 0; j < a.size(); ++j) dist += std::abs(a[j] - b[j]);
        dist /= static_cast<double>(a.size());
        CHECK(dist <= prev + 1e-15);
        prev = dist;
    }
    CHECK_THROWS_AS(Potential::l1_clip(Potential::exact_delta(), 0.5), std::invalid_argument);
}

TEST_CASE("positive type check") {
    CHECK(Potential::constant(0.3).positive_type_check(8));
    CHECK(Potential::constant(0.0).positive_type_check(8));
    CHECK_FALSE(Potential::exact_delta().positive_type_check(3));

    // w(x) = cos(2 pi x): w_hat(+-1) = 1/2 >= 0, from grid quadrature
    std::vector<double> v(128);
    for (int j = 0; j < 128; ++j)
        v[j] = std::cos(2 * std::numbers::pi * (-0.5 + j / 128.0));
    const Potential w = Potential::grid(v);
    CHECK(w.positive_type_check(8));
    CHECK(w.fourier_coefficient(1) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(w.fourier_coefficient(-1) == doctest::Approx(0.5).epsilon(1e-12));

    // minus it is not of positive type
    for (auto& x : v) x = -x;
    CHECK_FALSE(Potential::grid(v).positive_type_check(8));
}

TEST_CASE("grid constructor enforces evenness and realness") {
    std::vector<double> odd(16, 0.0);
    odd[1] = 1.0;  // x = -1/2 + 1/16; mirror at index 15 stays 0
    CHECK_THROWS_AS(Potential::grid(odd), std::invalid_argument);
    odd[15] = 1.0;
    CHECK_NOTHROW(Potential::grid(odd));
    std::vector<double> nan(16, 0.0);
    nan[3] = std::nan("");
    CHECK_THROWS_AS(Potential::grid(nan), std::invalid_argument);
}

TEST_CASE("fourier coefficients are real and even for every variant") {
    const Potential w = Potential::inverse_sqrt_spike(-0.4, 512);
    for (int m = 0; m <= 6; ++m)
        CHECK(w.fourier_coefficient(m) == w.fourier_coefficient(-m));
    const Potential d = Potential::delta_approx({DeltaProfile::Shape::Triangle, 0.5}, 0.2);
    for (int m = 0; m <= 6; ++m)
        CHECK(d.fourier_coefficient(m) == d.fourier_coefficient(-m));
}
