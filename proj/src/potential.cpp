#include "nlsgibbs/potential.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace nlsgibbs {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double sinc(double x) { return std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }

// Samples of w^eps(x) = (1/eps) U([x]/eps) on x_j = -1/2 + j/n.
std::vector<double> sample_delta_approx(const DeltaProfile& U, double eps, int n) {
    std::vector<double> v(n);
    for (int j = 0; j < n; ++j) {
        double x = -0.5 + static_cast<double>(j) / n;
        v[j] = U(x / eps) / eps;
    }
    return v;
}
}  // namespace

double DeltaProfile::operator()(double y) const {
    const double a = std::abs(y);
    if (a >= half_width) return 0.0;
    switch (shape) {
        case Shape::Triangle:
            return -(1.0 / half_width) * (1.0 - a / half_width);
        case Shape::Box:
            return -1.0 / (2.0 * half_width);
    }
    return 0.0;
}

double DeltaProfile::cosine_moment(double a) const {
    switch (shape) {
        case Shape::Triangle: {
            const double u = std::numbers::pi * a * half_width;
            const double s = sinc(u);
            return -s * s;
        }
        case Shape::Box:
            return -sinc(kTwoPi * a * half_width);
    }
    return 0.0;
}

double DeltaProfile::integral_by_quadrature(int n_points) const {
    // composite trapezoid over the support; piecewise-linear profiles are
    // integrated exactly once the kink at 0 lies on the grid (n_points odd)
    if (n_points % 2 == 0) ++n_points;
    const double h = 2.0 * half_width / (n_points - 1);
    double acc = 0.0;
    for (int i = 0; i < n_points; ++i) {
        const double y = -half_width + i * h;
        const double wgt = (i == 0 || i == n_points - 1) ? 0.5 : 1.0;
        acc += wgt * (*this)(y);
    }
    return acc * h;
}

Potential Potential::constant(double c) {
    Potential p;
    p.kind_ = Kind::Constant;
    p.c_ = c;
    return p;
}

Potential Potential::fourier(std::vector<double> coeffs) {
    if (coeffs.empty()) throw std::invalid_argument("Potential::fourier: empty coefficients");
    for (double v : coeffs)
        if (!std::isfinite(v)) throw std::invalid_argument("Potential::fourier: nonfinite");
    Potential p;
    p.kind_ = Kind::FourierCoeffs;
    p.fourier_ = std::move(coeffs);
    return p;
}

Potential Potential::grid(std::vector<double> values) {
    const int n = static_cast<int>(values.size());
    if (n < 2) throw std::invalid_argument("Potential::grid: need at least 2 samples");
    for (int j = 0; j < n; ++j) {
        if (!std::isfinite(values[j])) throw std::invalid_argument("Potential::grid: nonfinite");
        const double mirror = values[(n - j) % n];
        const double scale = std::max(1.0, std::abs(values[j]));
        if (std::abs(values[j] - mirror) > 1e-12 * scale)
            throw std::invalid_argument("Potential::grid: samples not even about x = 0");
    }
    Potential p;
    p.kind_ = Kind::GridSamples;
    p.samples_ = std::move(values);
    return p;
}

Potential Potential::delta_approx(DeltaProfile profile, double epsilon) {
    if (!(epsilon > 0.0 && epsilon <= 1.0))
        throw std::invalid_argument("delta_approx: epsilon must be in (0,1]");
    if (!(profile.half_width > 0.0 && profile.half_width <= 0.5))
        throw std::invalid_argument("delta_approx: profile support must lie inside Lambda");
    const double mass = profile.integral_by_quadrature();
    if (std::abs(mass + 1.0) > 1e-10)
        throw std::invalid_argument("delta_approx: profile mass differs from -1");
    Potential p;
    p.kind_ = Kind::DeltaApprox;
    p.profile_ = profile;
    p.epsilon_ = epsilon;
    // at least 32 samples across the support width of w^eps
    const double support = 2.0 * profile.half_width * epsilon;
    int n = 1;
    while (n < std::max(1024.0, 32.0 / support)) n *= 2;
    p.samples_ = sample_delta_approx(profile, epsilon, n);
    return p;
}

Potential Potential::exact_delta() {
    Potential p;
    p.kind_ = Kind::ExactDelta;
    return p;
}

Potential Potential::l1_clip(const Potential& base, double epsilon) {
    if (epsilon <= 0.0) throw std::invalid_argument("l1_clip: epsilon must be > 0");
    if (!base.has_grid_samples() && base.kind() != Kind::Constant)
        throw std::invalid_argument("l1_clip: base potential has no grid samples");
    Potential p;
    p.kind_ = Kind::L1Clip;
    p.epsilon_ = epsilon;
    p.base_ = std::make_shared<Potential>(base);
    const double thr = 1.0 / epsilon;
    if (base.kind() == Kind::Constant) {
        p.samples_ = {std::abs(base.c_) <= thr ? base.c_ : 0.0,
                      std::abs(base.c_) <= thr ? base.c_ : 0.0};
    } else {
        p.samples_ = base.grid_values();
        for (double& v : p.samples_)
            if (std::abs(v) > thr) v = 0.0;
    }
    return p;
}

Potential Potential::inverse_sqrt_spike(double amplitude, int resolution) {
    if (resolution < 4 || resolution % 2 != 0)
        throw std::invalid_argument("inverse_sqrt_spike: resolution must be even and >= 4");
    std::vector<double> v(resolution);
    const double h = 1.0 / resolution;
    for (int j = 0; j < resolution; ++j) {
        const double x = -0.5 + j * h;
        if (std::abs(x) < 0.5 * h) {
            // cell average of |x|^{-1/2} over [-h/2, h/2]
            v[j] = amplitude * 2.0 * std::sqrt(2.0) / std::sqrt(h);
        } else {
            v[j] = amplitude / std::sqrt(std::abs(x));
        }
    }
    return grid(std::move(v));
}

std::string Potential::kind_name() const {
    switch (kind_) {
        case Kind::Constant: return "constant";
        case Kind::FourierCoeffs: return "fourier";
        case Kind::GridSamples: return "grid";
        case Kind::DeltaApprox: return "delta_approx";
        case Kind::ExactDelta: return "exact_delta";
        case Kind::L1Clip: return "l1_clip";
    }
    return "?";
}

bool Potential::is_zero() const {
    switch (kind_) {
        case Kind::Constant: return c_ == 0.0;
        case Kind::FourierCoeffs:
            return std::all_of(fourier_.begin(), fourier_.end(), [](double v) { return v == 0.0; });
        case Kind::GridSamples:
        case Kind::L1Clip:
            return std::all_of(samples_.begin(), samples_.end(), [](double v) { return v == 0.0; });
        default: return false;
    }
}

double Potential::fourier_coefficient(int m) const {
    const int am = std::abs(m);
    switch (kind_) {
        case Kind::Constant:
            return am == 0 ? c_ : 0.0;
        case Kind::FourierCoeffs:
            return am < static_cast<int>(fourier_.size()) ? fourier_[am] : 0.0;
        case Kind::ExactDelta:
            return -1.0;
        case Kind::DeltaApprox:
            // w^eps_hat(m) = int U(y) cos(2 pi m eps y) dy, exact by closed form
            return profile_.cosine_moment(static_cast<double>(am) * epsilon_);
        case Kind::GridSamples:
        case Kind::L1Clip: {
            // cosine quadrature keeps realness and evenness exact
            const int n = static_cast<int>(samples_.size());
            double acc = 0.0;
            for (int j = 0; j < n; ++j) {
                const double x = -0.5 + static_cast<double>(j) / n;
                acc += samples_[j] * std::cos(kTwoPi * am * x);
            }
            return acc / n;
        }
    }
    return 0.0;
}

std::vector<double> Potential::fourier_coefficients(int up_to) const {
    if (up_to < 0) throw std::invalid_argument("fourier_coefficients: up_to must be >= 0");
    std::vector<double> out(up_to + 1);
    for (int m = 0; m <= up_to; ++m) out[m] = fourier_coefficient(m);
    return out;
}

bool Potential::positive_type_check(int up_to) const {
    for (int m = 0; m <= up_to; ++m)
        if (fourier_coefficient(m) < -1e-12) return false;
    return true;
}

double Potential::linf_norm() const {
    switch (kind_) {
        case Kind::Constant: return std::abs(c_);
        case Kind::ExactDelta:
            throw std::invalid_argument("linf_norm: exact delta is unbounded");
        case Kind::FourierCoeffs: {
            // |w(x)| <= |w_hat(0)| + 2 sum_{m>0} |w_hat(m)|, attained-at-0 bound
            double acc = std::abs(fourier_[0]);
            for (std::size_t m = 1; m < fourier_.size(); ++m) acc += 2.0 * std::abs(fourier_[m]);
            return acc;
        }
        default: {
            double mx = 0.0;
            for (double v : samples_) mx = std::max(mx, std::abs(v));
            return mx;
        }
    }
}

double Potential::l1_norm() const {
    switch (kind_) {
        case Kind::Constant: return std::abs(c_);
        case Kind::ExactDelta: return 1.0;  // total variation of delta
        case Kind::FourierCoeffs: {
            // approximate by grid quadrature of the synthesized function
            const int n = 4096;
            double acc = 0.0;
            for (int j = 0; j < n; ++j) {
                const double x = -0.5 + static_cast<double>(j) / n;
                double w = fourier_[0];
                for (std::size_t m = 1; m < fourier_.size(); ++m)
                    w += 2.0 * fourier_[m] * std::cos(kTwoPi * m * x);
                acc += std::abs(w);
            }
            return acc / n;
        }
        default: {
            double acc = 0.0;
            for (double v : samples_) acc += std::abs(v);
            return acc / samples_.size();
        }
    }
}

bool Potential::has_grid_samples() const { return !samples_.empty(); }

const std::vector<double>& Potential::grid_values() const {
    if (samples_.empty()) throw std::invalid_argument("grid_values: no grid representation");
    return samples_;
}

const std::vector<double>& Potential::fourier_data() const {
    if (kind_ != Kind::FourierCoeffs) throw std::invalid_argument("fourier_data: wrong kind");
    return fourier_;
}

double Potential::constant_value() const {
    if (kind_ != Kind::Constant) throw std::invalid_argument("constant_value: wrong kind");
    return c_;
}

double Potential::clip_epsilon() const {
    if (kind_ != Kind::L1Clip) throw std::invalid_argument("clip_epsilon: wrong kind");
    return epsilon_;
}

double Potential::delta_epsilon() const {
    if (kind_ != Kind::DeltaApprox) throw std::invalid_argument("delta_epsilon: wrong kind");
    return epsilon_;
}

const DeltaProfile& Potential::profile() const {
    if (kind_ != Kind::DeltaApprox) throw std::invalid_argument("profile: wrong kind");
    return profile_;
}

}  // namespace nlsgibbs
