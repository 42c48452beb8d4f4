#include "nlsgibbs/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <unordered_map>

namespace nlsgibbs {

double eigenvalue(int k, double kappa) {
    if (kappa <= 0.0) throw std::invalid_argument("eigenvalue: kappa must be > 0");
    const double pk = 2.0 * std::numbers::pi * k;
    return pk * pk + kappa;
}

OneBodySpectrum::OneBodySpectrum(ModeSet modes_, double kappa_) : kappa(kappa_), modes(modes_) {
    if (kappa <= 0.0) throw std::invalid_argument("OneBodySpectrum: kappa must be > 0");
    lambda.resize(modes.size());
    for (int i = 0; i < modes.size(); ++i) lambda[i] = eigenvalue(modes.mode_at(i), kappa);
}

namespace {

// FFTW plan creation is not thread-safe; execution on distinct buffers is.
// Each thread keeps its own workspace per transform size.
class FftWorkspace {
  public:
    explicit FftWorkspace(int n) : n_(n) {
        buf_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
        static std::mutex plan_mutex;
        std::lock_guard<std::mutex> lock(plan_mutex);
        fwd_ = fftw_plan_dft_1d(n, buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft_1d(n, buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    ~FftWorkspace() {
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(buf_);
    }
    FftWorkspace(const FftWorkspace&) = delete;
    FftWorkspace& operator=(const FftWorkspace&) = delete;

    Complex* buffer() { return reinterpret_cast<Complex*>(buf_); }
    void forward() { fftw_execute(fwd_); }
    void backward() { fftw_execute(bwd_); }

  private:
    int n_;
    fftw_complex* buf_;
    fftw_plan fwd_, bwd_;
};

FftWorkspace& local_workspace(int n) {
    thread_local std::unordered_map<int, std::unique_ptr<FftWorkspace>> cache;
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<FftWorkspace>(n);
    return *slot;
}

// Phase (-1)^k accounts for the grid starting at x = -1/2.
inline double mode_sign(int k) { return (k & 1) ? -1.0 : 1.0; }

}  // namespace

GridField to_grid(const SpectralField& f, int n_x) {
    const int d = f.modes.size();
    if (n_x < d)
        throw AliasingError("to_grid: n_x smaller than mode count, synthesis would alias");
    auto& ws = local_workspace(n_x);
    Complex* buf = ws.buffer();
    std::fill(buf, buf + n_x, Complex(0.0, 0.0));
    for (int i = 0; i < d; ++i) {
        const int k = f.modes.mode_at(i);
        const int bin = (k % n_x + n_x) % n_x;
        buf[bin] = mode_sign(k) * f.coeffs[i];
    }
    ws.backward();
    GridField g;
    g.n_x = n_x;
    g.values = Eigen::Map<Eigen::VectorXcd>(buf, n_x);
    return g;
}

SpectralField to_spectral(const GridField& g, int k_max) {
    const int d = 2 * k_max + 1;
    if (g.n_x < d)
        throw AliasingError("to_spectral: n_x smaller than requested band, analysis would alias");
    auto& ws = local_workspace(g.n_x);
    Complex* buf = ws.buffer();
    std::copy(g.values.data(), g.values.data() + g.n_x, buf);
    ws.forward();
    SpectralField f{ModeSet(k_max)};
    for (int i = 0; i < d; ++i) {
        const int k = f.modes.mode_at(i);
        const int bin = (k % g.n_x + g.n_x) % g.n_x;
        f.coeffs[i] = mode_sign(k) * buf[bin] / static_cast<double>(g.n_x);
    }
    return f;
}

double field_norm(const SpectralField& f, NormKind kind, double s) {
    switch (kind) {
        case NormKind::L2:
            return f.coeffs.norm();
        case NormKind::L4:
            return std::pow(norm_l4_pow4_on_grid(f, quartic_grid_size(f.modes.k_max)), 0.25);
        case NormKind::Hs: {
            double acc = 0.0;
            for (int i = 0; i < f.modes.size(); ++i) {
                const double w = std::pow(1.0 + std::abs(f.modes.mode_at(i)), 2.0 * s);
                acc += w * std::norm(f.coeffs[i]);
            }
            return std::sqrt(acc);
        }
    }
    throw std::logic_error("field_norm: unknown kind");
}

double norm_l4_pow4_on_grid(const SpectralField& f, int n_x) {
    if (n_x < 4 * f.modes.k_max + 1)
        throw PrecisionError("norm_l4: grid undersized, |f|^4 is band-limited to 4*k_max");
    const GridField g = to_grid(f, n_x);
    double acc = 0.0;
    for (int j = 0; j < n_x; ++j) {
        const double a = std::norm(g.values[j]);
        acc += a * a;
    }
    return acc / n_x;
}

SpectralField heat_propagator(double t, const SpectralField& f, double kappa) {
    if (t <= 0.0) throw std::invalid_argument("heat_propagator: t must be > 0");
    SpectralField out = f;
    for (int i = 0; i < f.modes.size(); ++i)
        out.coeffs[i] *= std::exp(-t * eigenvalue(f.modes.mode_at(i), kappa));
    return out;
}

Eigen::VectorXcd density_coefficients(const SpectralField& f) {
    const int kmax = f.modes.k_max;
    Eigen::VectorXcd g = Eigen::VectorXcd::Zero(4 * kmax + 1);
    for (int m = -2 * kmax; m <= 2 * kmax; ++m) {
        Complex acc(0.0, 0.0);
        const int lo = std::max(-kmax, -kmax - m);
        const int hi = std::min(kmax, kmax - m);
        for (int k = lo; k <= hi; ++k)
            acc += std::conj(f.coeffs[k + kmax]) * f.coeffs[k + m + kmax];
        g[m + 2 * kmax] = acc;
    }
    return g;
}

int next_pow2(int n) {
    int p = 1;
    while (p < n) p *= 2;
    return p;
}

int quartic_grid_size(int k_max) { return next_pow2(4 * k_max + 1); }

}  // namespace nlsgibbs
