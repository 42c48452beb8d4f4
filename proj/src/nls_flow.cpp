#include "nlsgibbs/nls_flow.hpp"

#include <cmath>
#include <numbers>

#include "nlsgibbs/errors.hpp"
#include "nlsgibbs/gibbs.hpp"

namespace nlsgibbs {

namespace {

constexpr Complex kI{0.0, 1.0};

// ----------------------------------------------------------- Galerkin stepper
//
// Truncated Hamiltonian flow on C^d. Linear substep is an exact phase
// rotation. The nonlinear substep integrates phi' = -i V(phi) phi, with the
// Hermitian matrix V(phi)_{k,k'} = w_hat(k-k') g_hat(k-k'), by an exponential
// midpoint rule: V is evaluated at the start and at an Euler-exponential
// predictor, and e^{-i dt (V0+V1)/2} is applied. Each application is unitary,
// so the mass is conserved to rounding regardless of dt.
class GalerkinStepper {
  public:
    GalerkinStepper(const ModeSet& modes, double kappa, const Potential& w)
        : modes_(modes), d_(modes.size()), kmax_(modes.k_max) {
        lambda_.resize(d_);
        for (int i = 0; i < d_; ++i) lambda_[i] = eigenvalue(modes.mode_at(i), kappa);
        what_.resize(4 * kmax_ + 1);
        for (int m = -2 * kmax_; m <= 2 * kmax_; ++m)
            what_[m + 2 * kmax_] = w.fourier_coefficient(m);
    }

    void step(Eigen::VectorXcd& v, double dt) {
        half_linear(v, dt);
        nonlinear(v, dt);
        half_linear(v, dt);
    }

  private:
    void half_linear(Eigen::VectorXcd& v, double dt) const {
        for (int i = 0; i < d_; ++i) v[i] *= std::polar(1.0, -0.5 * dt * lambda_[i]);
    }

    Eigen::MatrixXcd potential_matrix(const Eigen::VectorXcd& v) const {
        // g_hat(m) = sum_k conj(v_k) v_{k+m}
        Eigen::VectorXcd g = Eigen::VectorXcd::Zero(4 * kmax_ + 1);
        for (int m = -2 * kmax_; m <= 2 * kmax_; ++m) {
            Complex acc{0.0, 0.0};
            const int lo = std::max(-kmax_, -kmax_ - m);
            const int hi = std::min(kmax_, kmax_ - m);
            for (int k = lo; k <= hi; ++k)
                acc += std::conj(v[k + kmax_]) * v[k + m + kmax_];
            g[m + 2 * kmax_] = acc;
        }
        Eigen::MatrixXcd V(d_, d_);
        for (int a = 0; a < d_; ++a)
            for (int b = 0; b < d_; ++b) {
                const int m = modes_.mode_at(a) - modes_.mode_at(b);
                V(a, b) = what_[m + 2 * kmax_] * g[m + 2 * kmax_];
            }
        return V;
    }

    // y <- e^{-i dt V} y by Taylor summation with step splitting; the order is
    // chosen so the truncated tail is below 1e-16 relative
    void apply_exponential(const Eigen::MatrixXcd& V, Eigen::VectorXcd& y, double dt) const {
        const double theta = std::abs(dt) * V.cwiseAbs().rowwise().sum().maxCoeff();
        int splits = 1;
        while (theta / splits > 0.5) splits *= 2;
        const double h = dt / splits;
        for (int s = 0; s < splits; ++s) {
            Eigen::VectorXcd term = y;
            const double th = theta / splits;
            double tail = 1.0;
            for (int j = 1; j <= 32; ++j) {
                term = (-kI * h / static_cast<double>(j)) * (V * term);
                y += term;
                tail *= th / (j + 1);
                if (tail < 1e-17) break;
            }
        }
    }

    void nonlinear(Eigen::VectorXcd& v, double dt) const {
        const Eigen::MatrixXcd V0 = potential_matrix(v);
        Eigen::VectorXcd pred = v;
        apply_exponential(V0, pred, dt);
        const Eigen::MatrixXcd Vmid = 0.5 * (V0 + potential_matrix(pred));
        apply_exponential(Vmid, v, dt);
    }

    ModeSet modes_;
    int d_, kmax_;
    Eigen::VectorXd lambda_;
    std::vector<double> what_;
};

// -------------------------------------------------------------- grid stepper
//
// Standard split-step Fourier on the n_x grid: linear phases in Fourier bins,
// nonlinear pointwise phase e^{-i dt (w*|phi|^2)(x)}; both substeps preserve
// the grid l2 norm exactly.
class GridStepper {
  public:
    GridStepper(int n_x, double kappa, const Potential& w) : n_x_(n_x), delta_(w.is_exact_delta()) {
        lin_.resize(n_x);
        wbin_.resize(n_x);
        for (int b = 0; b < n_x; ++b) {
            const int k = b <= n_x / 2 ? b : b - n_x;
            lin_[b] = eigenvalue(k, kappa);
            wbin_[b] = delta_ ? -1.0 : w.fourier_coefficient(k);
        }
    }

    void step(Eigen::VectorXcd& grid, double dt, Eigen::VectorXcd& work) {
        half_linear(grid, dt);
        nonlinear(grid, dt, work);
        half_linear(grid, dt);
    }

  private:
    void half_linear(Eigen::VectorXcd& grid, double dt) const {
        fft_inplace(grid, true);
        for (int b = 0; b < n_x_; ++b) grid[b] *= std::polar(1.0, -0.5 * dt * lin_[b]);
        fft_inplace(grid, false);
    }

    void nonlinear(Eigen::VectorXcd& grid, double dt, Eigen::VectorXcd& work) const {
        if (delta_) {
            for (int j = 0; j < n_x_; ++j)
                grid[j] *= std::polar(1.0, dt * std::norm(grid[j]));
            return;
        }
        work.resize(n_x_);
        for (int j = 0; j < n_x_; ++j) work[j] = std::norm(grid[j]);
        fft_inplace(work, true);
        for (int b = 0; b < n_x_; ++b) work[b] *= wbin_[b];
        fft_inplace(work, false);
        for (int j = 0; j < n_x_; ++j) grid[j] *= std::polar(1.0, -dt * work[j].real());
    }

    void fft_inplace(Eigen::VectorXcd& v, bool forward) const;

    int n_x_;
    bool delta_;
    std::vector<double> lin_;
    std::vector<double> wbin_;
};

}  // namespace
}  // namespace nlsgibbs

// FFT passes share the spectral module's FFTW workspaces through the public
// transform API; expose thin wrappers here.
#include <fftw3.h>

#include <memory>
#include <mutex>
#include <unordered_map>

namespace nlsgibbs {
namespace {

class RawFft {
  public:
    explicit RawFft(int n) : n_(n) {
        buf_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
        static std::mutex plan_mutex;
        std::lock_guard<std::mutex> lock(plan_mutex);
        fwd_ = fftw_plan_dft_1d(n, buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft_1d(n, buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    ~RawFft() {
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(buf_);
    }
    RawFft(const RawFft&) = delete;
    RawFft& operator=(const RawFft&) = delete;

    void run(Eigen::VectorXcd& v, bool forward) {
        auto* b = reinterpret_cast<Complex*>(buf_);
        std::copy(v.data(), v.data() + n_, b);
        fftw_execute(forward ? fwd_ : bwd_);
        if (forward) {
            const double scale = 1.0 / n_;
            for (int i = 0; i < n_; ++i) v[i] = b[i] * scale;
        } else {
            std::copy(b, b + n_, v.data());
        }
    }

  private:
    int n_;
    fftw_complex* buf_;
    fftw_plan fwd_, bwd_;
};

RawFft& raw_fft(int n) {
    thread_local std::unordered_map<int, std::unique_ptr<RawFft>> cache;
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<RawFft>(n);
    return *slot;
}

}  // namespace

void GridStepper::fft_inplace(Eigen::VectorXcd& v, bool forward) const {
    raw_fft(n_x_).run(v, forward);
}

namespace {

void check_finite(const Eigen::VectorXcd& v, double t_reached) {
    if (!v.allFinite())
        throw BlowUpError("evolve: field left the floating-point range (blow-up diagnostic)",
                          t_reached);
}

SpectralField evolve_one(const SpectralField& phi0, double t, const FlowConfig& config) {
    if (config.dt <= 0.0) throw std::invalid_argument("evolve: dt must be > 0");
    const double steps_needed = std::abs(t) / config.dt;
    if (steps_needed > 1e8) throw SizeError("evolve: |t|/dt exceeds the 1e8 step guard");
    const long n_full = static_cast<long>(steps_needed + 1e-9);
    const double sign = t >= 0.0 ? 1.0 : -1.0;
    const double remainder = std::abs(t) - n_full * config.dt;

    if (config.galerkin) {
        const int nx = config.resolved_nx(phi0.modes.k_max);
        if (nx < 4 * phi0.modes.k_max + 1)
            throw AliasingError("evolve: galerkin mode needs n_x >= 4*k_max+1");
        GalerkinStepper stepper(phi0.modes, config.kappa, config.w);
        Eigen::VectorXcd v = phi0.coeffs;
        for (long s = 0; s < n_full; ++s) {
            stepper.step(v, sign * config.dt);
            if ((s & 63) == 0) check_finite(v, sign * s * config.dt);
        }
        if (remainder > 1e-12) stepper.step(v, sign * remainder);
        check_finite(v, t);
        return SpectralField{phi0.modes, std::move(v)};
    }

    const int nx = config.resolved_nx(phi0.modes.k_max);
    const int out_kmax = nx / 2 - 1;
    if (phi0.modes.k_max > out_kmax)
        throw AliasingError("evolve: grid too small for the initial band");
    GridStepper stepper(nx, config.kappa, config.w);
    Eigen::VectorXcd grid = to_grid(phi0, nx).values;
    Eigen::VectorXcd work;
    for (long s = 0; s < n_full; ++s) {
        stepper.step(grid, sign * config.dt, work);
        if ((s & 63) == 0) check_finite(grid, sign * s * config.dt);
    }
    if (remainder > 1e-12) stepper.step(grid, sign * remainder, work);
    check_finite(grid, t);
    return to_spectral(GridField{nx, std::move(grid)}, out_kmax);
}

}  // namespace

SpectralField evolve(const SpectralField& phi0, double t, const FlowConfig& config) {
    return evolve_one(phi0, t, config);
}

void evolve_batch(std::vector<SpectralField>& fields, double t, const FlowConfig& config) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(fields.size()); ++i)
        fields[i] = evolve_one(fields[i], t, config);
}

void evolve_batch_serial(std::vector<SpectralField>& fields, double t,
                         const FlowConfig& config) {
    for (auto& f : fields) f = evolve_one(f, t, config);
}

FlowDifferenceReport flow_difference(const SpectralField& phi0, const Potential& w,
                                     const Potential& w_eps, double T,
                                     const FlowConfig& config) {
    if (T < 0.0) throw std::invalid_argument("flow_difference: T must be >= 0");
    FlowConfig ca = config, cb = config;
    ca.w = w;
    cb.w = w_eps;
    // lockstep evolution on a shared grid/time step, sampling every step
    const long n_steps = static_cast<long>(T / config.dt + 1e-9);
    FlowDifferenceReport rep;
    rep.times.push_back(0.0);
    rep.distances.push_back(0.0);

    if (config.galerkin) {
        GalerkinStepper sa(phi0.modes, config.kappa, w);
        GalerkinStepper sb(phi0.modes, config.kappa, w_eps);
        Eigen::VectorXcd va = phi0.coeffs, vb = phi0.coeffs;
        for (long s = 0; s < n_steps; ++s) {
            sa.step(va, config.dt);
            sb.step(vb, config.dt);
            check_finite(va, (s + 1) * config.dt);
            check_finite(vb, (s + 1) * config.dt);
            rep.times.push_back((s + 1) * config.dt);
            rep.distances.push_back((va - vb).norm());
        }
    } else {
        const int nx = config.resolved_nx(phi0.modes.k_max);
        GridStepper sa(nx, config.kappa, w);
        GridStepper sb(nx, config.kappa, w_eps);
        Eigen::VectorXcd va = to_grid(phi0, nx).values, vb = va;
        Eigen::VectorXcd work;
        const double scale = 1.0 / std::sqrt(static_cast<double>(nx));
        for (long s = 0; s < n_steps; ++s) {
            sa.step(va, config.dt, work);
            sb.step(vb, config.dt, work);
            check_finite(va, (s + 1) * config.dt);
            check_finite(vb, (s + 1) * config.dt);
            rep.times.push_back((s + 1) * config.dt);
            rep.distances.push_back((va - vb).norm() * scale);
        }
    }
    rep.sup_distance = *std::max_element(rep.distances.begin(), rep.distances.end());
    return rep;
}

}  // namespace nlsgibbs
