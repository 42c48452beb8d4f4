#include "nlsgibbs/estimators.hpp"

#include <cmath>
#include <stdexcept>

namespace nlsgibbs {

Estimate mean_se(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n == 0) throw std::invalid_argument("mean_se: empty sample");
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(n);
    if (n == 1) return {mean, 0.0, 1};
    double ss = 0.0;
    for (double v : values) {
        const double d = v - mean;
        ss += d * d;
    }
    return {mean, std::sqrt(ss / (static_cast<double>(n) - 1.0) / static_cast<double>(n)), n};
}

Estimate mean_jackknife(std::span<const double> values, int n_batches) {
    const std::size_t n = values.size();
    if (n < 2) throw std::invalid_argument("mean_jackknife: need at least 2 samples");
    const int B = static_cast<int>(std::min<std::size_t>(n_batches, n));
    std::vector<double> batch_sum(B, 0.0);
    std::vector<std::size_t> batch_cnt(B, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const int b = static_cast<int>(i % B);
        batch_sum[b] += values[i];
        ++batch_cnt[b];
    }
    double total = 0.0;
    for (double s : batch_sum) total += s;
    const double full = total / static_cast<double>(n);
    // leave-one-batch-out means
    std::vector<double> loo(B);
    for (int b = 0; b < B; ++b)
        loo[b] = (total - batch_sum[b]) / static_cast<double>(n - batch_cnt[b]);
    double lbar = 0.0;
    for (double v : loo) lbar += v;
    lbar /= B;
    double ss = 0.0;
    for (double v : loo) ss += (v - lbar) * (v - lbar);
    const double se = std::sqrt(ss * static_cast<double>(B - 1) / static_cast<double>(B));
    return {full, se, n};
}

Estimate ratio_se(std::span<const double> num, std::span<const double> den) {
    const std::size_t n = num.size();
    if (n == 0 || n != den.size()) throw std::invalid_argument("ratio_se: bad input sizes");
    double sn = 0.0, sd = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sn += num[i];
        sd += den[i];
    }
    if (sd == 0.0) throw std::invalid_argument("ratio_se: denominator sums to zero");
    const double R = sn / sd;
    if (n == 1) return {R, 0.0, 1};
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = num[i] - R * den[i];
        ss += r * r;
    }
    const double dbar = sd / static_cast<double>(n);
    const double se =
        std::sqrt(ss / (static_cast<double>(n) - 1.0) / static_cast<double>(n)) / std::abs(dbar);
    return {R, se, n};
}

ComplexEstimate ratio_se(std::span<const std::complex<double>> num,
                         std::span<const double> den) {
    const std::size_t n = num.size();
    if (n == 0 || n != den.size()) throw std::invalid_argument("ratio_se: bad input sizes");
    std::vector<double> re(n), im(n);
    for (std::size_t i = 0; i < n; ++i) {
        re[i] = num[i].real();
        im[i] = num[i].imag();
    }
    const Estimate er = ratio_se(re, den);
    const Estimate ei = ratio_se(im, den);
    return {{er.value, ei.value},
            std::sqrt(er.std_error * er.std_error + ei.std_error * ei.std_error),
            n};
}

}  // namespace nlsgibbs
