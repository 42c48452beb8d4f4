#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nlsgibbs/errors.hpp"

namespace nlsgibbs {

/// Continuous even profile U with supp U inside Lambda and int U = -1,
/// used to build the delta approximation w^eps(x) = (1/eps) U([x]/eps).
struct DeltaProfile {
    enum class Shape { Triangle, Box };
    Shape shape = Shape::Triangle;
    double half_width = 0.5;  // support is [-half_width, half_width]

    double operator()(double y) const;
    /// Closed-form int U(y) cos(2 pi a y) dy over the support.
    double cosine_moment(double a) const;
    /// Quadrature check of int U = -1 (validation path, tolerance 1e-10).
    double integral_by_quadrature(int n_points = 200001) const;
};

/// Pair interaction w per the admissible classes: bounded representations
/// (constant, Fourier, grid), the delta approximation w^eps, the exact
/// delta (sign -1), and the L1 clipping w * 1{|w| <= 1/eps}.
class Potential {
  public:
    enum class Kind { Constant, FourierCoeffs, GridSamples, DeltaApprox, ExactDelta, L1Clip };

    static Potential constant(double c);
    /// coeffs[m] = w_hat(m) for m = 0..m_max (even extension w_hat(-m)=w_hat(m)).
    static Potential fourier(std::vector<double> coeffs);
    /// Real samples on x_j = -1/2 + j/n; must satisfy v[j] == v[(n-j) mod n].
    static Potential grid(std::vector<double> values);
    static Potential delta_approx(DeltaProfile profile, double epsilon);
    static Potential exact_delta();
    static Potential l1_clip(const Potential& base, double epsilon);
    /// Integrable spike A/sqrt(|x|), sampled on a grid of the given size with
    /// a cell-averaged value at x = 0.
    static Potential inverse_sqrt_spike(double amplitude, int resolution = 4096);

    Kind kind() const { return kind_; }
    std::string kind_name() const;
    bool is_exact_delta() const { return kind_ == Kind::ExactDelta; }
    /// True when all Fourier data vanish (w == 0); enables diagnostic free mode.
    bool is_zero() const;

    /// w_hat(m) = int w(x) e^{-2 pi i m x} dx; real and even in m by construction.
    double fourier_coefficient(int m) const;
    std::vector<double> fourier_coefficients(int up_to) const;

    /// True iff w_hat(m) >= -1e-12 for all |m| <= up_to.
    bool positive_type_check(int up_to) const;

    double linf_norm() const;  // throws for ExactDelta
    double l1_norm() const;

    bool has_grid_samples() const;
    const std::vector<double>& grid_values() const;
    const std::vector<double>& fourier_data() const;  // Kind::FourierCoeffs only

    double constant_value() const;  // Kind::Constant only
    double clip_epsilon() const;    // Kind::L1Clip only
    double delta_epsilon() const;   // Kind::DeltaApprox only
    const DeltaProfile& profile() const;

  private:
    Potential() = default;
    Kind kind_ = Kind::Constant;
    double c_ = 0.0;                     // Constant
    std::vector<double> fourier_;        // FourierCoeffs, m = 0..m_max
    std::vector<double> samples_;        // GridSamples / DeltaApprox / L1Clip
    DeltaProfile profile_;               // DeltaApprox
    double epsilon_ = 0.0;               // DeltaApprox / L1Clip
    std::shared_ptr<Potential> base_;    // L1Clip
};

}  // namespace nlsgibbs
