#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace nlsgibbs {

/// Mass cutoff f: [0,1]-valued, equal to 1 on [0, plateau*K], joined to 0 at K
/// by the bump profile e^{1 - 1/(1-s^2)}, and identically 0 for |x| >= K.
/// The diagnostic_one variant (f == 1) is admissible only for free-theory runs.
class CutoffFunction {
  public:
    static CutoffFunction plateau_bump(double K, double plateau = 0.5) {
        if (K <= 0.0) throw std::invalid_argument("CutoffFunction: K must be > 0");
        if (!(plateau > 0.0 && plateau < 1.0))
            throw std::invalid_argument("CutoffFunction: plateau fraction must be in (0,1)");
        CutoffFunction f;
        f.K_ = K;
        f.plateau_ = plateau;
        return f;
    }

    static CutoffFunction diagnostic_one() {
        CutoffFunction f;
        f.diagnostic_ = true;
        return f;
    }

    double operator()(double x) const {
        if (diagnostic_) return 1.0;
        const double a = x < 0.0 ? -x : x;
        const double inner = plateau_ * K_;
        if (a <= inner) return 1.0;
        if (a >= K_) return 0.0;
        const double s = (a - inner) / (K_ - inner);
        return std::exp(1.0 - 1.0 / (1.0 - s * s));
    }

    bool is_diagnostic_one() const { return diagnostic_; }
    /// Support radius K; diagnostic f == 1 reports +inf.
    double support_radius() const {
        return diagnostic_ ? std::numeric_limits<double>::infinity() : K_;
    }
    double plateau_fraction() const { return plateau_; }

  private:
    CutoffFunction() = default;
    double K_ = 4.0;
    double plateau_ = 0.5;
    bool diagnostic_ = false;
};

}  // namespace nlsgibbs
