#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace nlsgibbs {

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t n_samples = 0;
};

struct ComplexEstimate {
    std::complex<double> value{0.0, 0.0};
    double std_error = 0.0;  // combined re/im uncertainty
    std::size_t n_samples = 0;
};

/// Sample mean with the classical standard error s/sqrt(n).
Estimate mean_se(std::span<const double> values);

/// Delete-one-batch jackknife standard error of the mean.
Estimate mean_jackknife(std::span<const double> values, int n_batches = 50);

/// Ratio estimator R = sum(num) / sum(den) with linearized standard error.
Estimate ratio_se(std::span<const double> num, std::span<const double> den);

ComplexEstimate ratio_se(std::span<const std::complex<double>> num,
                         std::span<const double> den);

}  // namespace nlsgibbs
