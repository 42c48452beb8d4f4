#include "nlsgibbs/fock.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <numeric>

#include "nlsgibbs/errors.hpp"

namespace nlsgibbs {

int FockBasis::total_n(std::size_t state) const {
    const std::uint16_t* o = occ(state);
    int n = 0;
    for (int i = 0; i < d(); ++i) n += o[i];
    return n;
}

int FockBasis::total_momentum(std::size_t state) const {
    const std::uint16_t* o = occ(state);
    int P = 0;
    for (int i = 0; i < d(); ++i) P += modes.mode_at(i) * o[i];
    return P;
}

std::int64_t FockBasis::find_state(const std::uint16_t* o) const {
    // states are enumerated in lexicographic order; binary search
    const int dd = d();
    std::int64_t lo = 0, hi = static_cast<std::int64_t>(n_states) - 1;
    while (lo <= hi) {
        const std::int64_t mid = (lo + hi) / 2;
        const std::uint16_t* m = occ(static_cast<std::size_t>(mid));
        int cmp = 0;
        for (int i = 0; i < dd; ++i) {
            if (m[i] != o[i]) {
                cmp = m[i] < o[i] ? -1 : 1;
                break;
            }
        }
        if (cmp == 0) return mid;
        if (cmp < 0)
            lo = mid + 1;
        else
            hi = mid - 1;
    }
    return -1;
}

FockBasis build_basis(const ModeSet& modes, int n_max, std::size_t max_states) {
    if (n_max < 0) throw std::invalid_argument("build_basis: n_max must be >= 0");
    FockBasis b;
    b.modes = modes;
    b.n_max = n_max;
    const int d = modes.size();

    std::vector<std::uint16_t> cur(d, 0);
    const std::function<void(int, int)> rec = [&](int i, int rem) {
        if (i == d - 1) {
            for (int nk = 0; nk <= rem; ++nk) {
                cur[i] = static_cast<std::uint16_t>(nk);
                b.occ_flat.insert(b.occ_flat.end(), cur.begin(), cur.end());
                if (++b.n_states > max_states)
                    throw SizeError("build_basis: state count exceeds limit " +
                                    std::to_string(max_states));
            }
            cur[i] = 0;
            return;
        }
        for (int nk = 0; nk <= rem; ++nk) {
            cur[i] = static_cast<std::uint16_t>(nk);
            rec(i + 1, rem - nk);
        }
        cur[i] = 0;
    };
    rec(0, n_max);

    std::map<std::pair<int, int>, std::vector<std::int32_t>> groups;
    for (std::size_t s = 0; s < b.n_states; ++s)
        groups[{b.total_n(s), b.total_momentum(s)}].push_back(static_cast<std::int32_t>(s));
    b.state_block.resize(b.n_states);
    b.state_pos.resize(b.n_states);
    for (auto& [key, states] : groups) {
        FockBasis::Block blk;
        blk.n = key.first;
        blk.momentum = key.second;
        blk.states = std::move(states);
        const auto bi = static_cast<std::int32_t>(b.blocks.size());
        for (std::size_t p = 0; p < blk.states.size(); ++p) {
            b.state_block[blk.states[p]] = bi;
            b.state_pos[blk.states[p]] = static_cast<std::int32_t>(p);
        }
        b.blocks.push_back(std::move(blk));
    }
    return b;
}

BlockOperator BlockOperator::zeros(const FockBasis& basis, double tau) {
    BlockOperator op;
    op.basis = &basis;
    op.tau = tau;
    op.blocks.reserve(basis.blocks.size());
    for (const auto& blk : basis.blocks)
        op.blocks.emplace_back(
            Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(blk.states.size()),
                                   static_cast<Eigen::Index>(blk.states.size())));
    return op;
}

double BlockOperator::hermiticity_defect() const {
    double defect = 0.0;
    for (const auto& m : blocks)
        if (m.size() > 0)
            defect = std::max(defect, (m - m.adjoint()).cwiseAbs().maxCoeff());
    return defect;
}

BlockOperator build_h0(const FockBasis& basis, const OneBodySpectrum& h, double tau) {
    if (tau <= 0.0) throw std::invalid_argument("build_h0: tau must be > 0");
    BlockOperator op = BlockOperator::zeros(basis, tau);
    for (std::size_t bi = 0; bi < basis.blocks.size(); ++bi) {
        const auto& blk = basis.blocks[bi];
        for (std::size_t p = 0; p < blk.states.size(); ++p) {
            const std::uint16_t* occ = basis.occ(blk.states[p]);
            double e = 0.0;
            for (int i = 0; i < basis.d(); ++i) e += h.lambda[i] * occ[i];
            op.blocks[bi](p, p) = e / tau;
        }
    }
    return op;
}

BlockOperator build_n(const FockBasis& basis, double tau) {
    if (tau <= 0.0) throw std::invalid_argument("build_n: tau must be > 0");
    BlockOperator op = BlockOperator::zeros(basis, tau);
    for (std::size_t bi = 0; bi < basis.blocks.size(); ++bi) {
        const auto& blk = basis.blocks[bi];
        for (std::size_t p = 0; p < blk.states.size(); ++p)
            op.blocks[bi](p, p) = static_cast<double>(blk.n) / tau;
    }
    return op;
}

BlockOperator build_w(const FockBasis& basis, double tau, const Potential& w) {
    if (tau <= 0.0) throw std::invalid_argument("build_w: tau must be > 0");
    const int kmax = basis.modes.k_max;
    const int d = basis.d();
    std::vector<double> what(4 * kmax + 1);  // m = -2kmax .. 2kmax
    for (int m = -2 * kmax; m <= 2 * kmax; ++m) what[m + 2 * kmax] = w.fourier_coefficient(m);

    BlockOperator op = BlockOperator::zeros(basis, tau);
    const double pref = 0.5 / (tau * tau);
    std::vector<std::uint16_t> tmp(d);
#pragma omp parallel for schedule(dynamic) firstprivate(tmp)
    for (std::int64_t bi = 0; bi < static_cast<std::int64_t>(basis.blocks.size()); ++bi) {
        const auto& blk = basis.blocks[bi];
        auto& mat = op.blocks[bi];
        for (std::size_t pos = 0; pos < blk.states.size(); ++pos) {
            const std::int32_t s = blk.states[pos];
            const std::uint16_t* occ = basis.occ(s);
            // a_r a_{s2} then a*_{s2-m} a*_{r+m}
            for (int ri = 0; ri < d; ++ri) {
                if (occ[ri] == 0) continue;
                for (int si = 0; si < d; ++si) {
                    std::copy(occ, occ + d, tmp.begin());
                    if (tmp[si] == 0) continue;
                    double amp = std::sqrt(static_cast<double>(tmp[si]));
                    --tmp[si];
                    if (tmp[ri] == 0) continue;
                    amp *= std::sqrt(static_cast<double>(tmp[ri]));
                    --tmp[ri];
                    const int r = basis.modes.mode_at(ri);
                    const int s2 = basis.modes.mode_at(si);
                    for (int m = -2 * kmax; m <= 2 * kmax; ++m) {
                        const double wh = what[m + 2 * kmax];
                        if (wh == 0.0) continue;
                        const int t1 = r + m, t2 = s2 - m;
                        if (!basis.modes.contains(t1) || !basis.modes.contains(t2)) continue;
                        const int t2i = basis.modes.index_of(t2);
                        const int t1i = basis.modes.index_of(t1);
                        double amp2 = amp * std::sqrt(static_cast<double>(tmp[t2i] + 1));
                        ++tmp[t2i];
                        amp2 *= std::sqrt(static_cast<double>(tmp[t1i] + 1));
                        ++tmp[t1i];
                        const std::int64_t target = basis.find_state(tmp.data());
                        --tmp[t1i];
                        --tmp[t2i];
                        // momentum and particle number are conserved: the
                        // target sits in the same block by construction
                        mat(basis.state_pos[target], pos) += pref * wh * amp2;
                    }
                }
            }
        }
    }
    if (op.hermiticity_defect() > 1e-12)
        throw std::runtime_error("build_w: non-Hermitian assembly");
    return op;
}

BlockOperator build_w_prime(const FockBasis& basis, double tau, const Potential& w) {
    const int kmax = basis.modes.k_max;
    double w0 = 0.0;  // w(0) of the truncated model
    for (int m = -2 * kmax; m <= 2 * kmax; ++m) w0 += w.fourier_coefficient(m);
    BlockOperator op = build_w(basis, tau, w);
    const BlockOperator n = build_n(basis, tau);
    return block_add(op, n, 0.5 * w0 / tau);
}

BlockOperator build_theta(const FockBasis& basis, double tau, const Eigen::MatrixXcd& xi,
                          int p) {
    if (tau <= 0.0) throw std::invalid_argument("build_theta: tau must be > 0");
    const int d = basis.d();
    BlockOperator op = BlockOperator::zeros(basis, tau);
    if (p == 1) {
        if (xi.rows() != d || xi.cols() != d)
            throw std::invalid_argument("build_theta: p=1 kernel must be d x d");
        for (Eigen::Index k = 0; k < d; ++k)
            for (Eigen::Index l = 0; l < d; ++l)
                if (xi(k, l) != Complex(0, 0) && k != l)
                    throw std::invalid_argument(
                        "build_theta: p=1 kernel must conserve momentum (diagonal in the mode "
                        "basis); off-diagonal lifts leave the (n, momentum) block structure");
        for (std::size_t bi = 0; bi < basis.blocks.size(); ++bi) {
            const auto& blk = basis.blocks[bi];
            for (std::size_t pos = 0; pos < blk.states.size(); ++pos) {
                const std::uint16_t* occ = basis.occ(blk.states[pos]);
                Complex e{0.0, 0.0};
                for (int i = 0; i < d; ++i) e += xi(i, i) * static_cast<double>(occ[i]);
                op.blocks[bi](pos, pos) = e / tau;
            }
        }
        return op;
    }
    if (p != 2) throw SizeError("build_theta: p must be 1 or 2");
    if (xi.rows() != d * d || xi.cols() != d * d)
        throw std::invalid_argument("build_theta: p=2 kernel must be d^2 x d^2");
    // momentum conservation: k1 + k2 == l1 + l2 wherever xi is nonzero
    for (Eigen::Index r = 0; r < d * d; ++r)
        for (Eigen::Index c = 0; c < d * d; ++c) {
            if (xi(r, c) == Complex(0, 0)) continue;
            const int k1 = basis.modes.mode_at(static_cast<int>(r / d));
            const int k2 = basis.modes.mode_at(static_cast<int>(r % d));
            const int l1 = basis.modes.mode_at(static_cast<int>(c / d));
            const int l2 = basis.modes.mode_at(static_cast<int>(c % d));
            if (k1 + k2 != l1 + l2)
                throw std::invalid_argument(
                    "build_theta: p=2 kernel must conserve total momentum");
        }
    const double pref = 1.0 / (tau * tau);
    std::vector<std::uint16_t> tmp(d);
    for (std::size_t bi = 0; bi < basis.blocks.size(); ++bi) {
        const auto& blk = basis.blocks[bi];
        auto& mat = op.blocks[bi];
        for (std::size_t pos = 0; pos < blk.states.size(); ++pos) {
            const std::uint16_t* occ = basis.occ(blk.states[pos]);
            for (int l1 = 0; l1 < d; ++l1) {
                for (int l2 = 0; l2 < d; ++l2) {
                    std::copy(occ, occ + d, tmp.begin());
                    if (tmp[l2] == 0) continue;
                    double amp = std::sqrt(static_cast<double>(tmp[l2]));
                    --tmp[l2];
                    if (tmp[l1] == 0) continue;
                    amp *= std::sqrt(static_cast<double>(tmp[l1]));
                    --tmp[l1];
                    for (int k1 = 0; k1 < d; ++k1) {
                        for (int k2 = 0; k2 < d; ++k2) {
                            const Complex x = xi(static_cast<Eigen::Index>(k1) * d + k2,
                                                 static_cast<Eigen::Index>(l1) * d + l2);
                            if (x == Complex(0, 0)) continue;
                            double amp2 = amp * std::sqrt(static_cast<double>(tmp[k2] + 1));
                            ++tmp[k2];
                            amp2 *= std::sqrt(static_cast<double>(tmp[k1] + 1));
                            ++tmp[k1];
                            const std::int64_t target = basis.find_state(tmp.data());
                            --tmp[k1];
                            --tmp[k2];
                            mat(basis.state_pos[target], pos) += pref * x * amp2;
                        }
                    }
                }
            }
        }
    }
    return op;
}

BlockOperator block_add(const BlockOperator& A, const BlockOperator& B, double c) {
    if (A.basis != B.basis) throw std::invalid_argument("block_add: basis mismatch");
    BlockOperator out = A;
    for (std::size_t i = 0; i < out.blocks.size(); ++i) out.blocks[i] += c * B.blocks[i];
    return out;
}

ThermalDecomposition decompose(const BlockOperator& H) {
    if (H.hermiticity_defect() > 1e-12)
        throw std::invalid_argument("decompose: operator is not Hermitian");
    ThermalDecomposition dec;
    dec.basis = H.basis;
    dec.tau = H.tau;
    dec.zeta = 1.0;
    dec.eigenvalues.resize(H.blocks.size());
    dec.eigenvectors.resize(H.blocks.size());
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(H.blocks.size()); ++i) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H.blocks[i]);
        dec.eigenvalues[i] = es.eigenvalues();
        dec.eigenvectors[i] = es.eigenvectors();
        const double err = (H.blocks[i] - dec.eigenvectors[i] *
                                              dec.eigenvalues[i].asDiagonal() *
                                              dec.eigenvectors[i].adjoint())
                               .cwiseAbs()
                               .maxCoeff();
        if (err > 1e-10)
            throw std::runtime_error("decompose: eigendecomposition reconstruction above 1e-10");
    }
    return dec;
}

ThermalDecomposition decompose(const BlockOperator& H0, const BlockOperator& W, double zeta) {
    ThermalDecomposition dec = decompose(block_add(H0, W, zeta));
    dec.zeta = zeta;
    return dec;
}

double bose_two_point(double lambda, double tau) {
    return 1.0 / (tau * std::expm1(lambda / tau));
}

double free_partition_truncated(const OneBodySpectrum& h, double tau, int n_max) {
    std::vector<double> coef(n_max + 1, 0.0);
    coef[0] = 1.0;
    std::vector<double> next(n_max + 1);
    for (int i = 0; i < h.modes.size(); ++i) {
        const double fac = std::exp(-h.lambda[i] / tau);
        std::fill(next.begin(), next.end(), 0.0);
        for (int n0 = 0; n0 <= n_max; ++n0) {
            if (coef[n0] == 0.0) continue;
            double p = coef[n0];
            for (int j = n0; j <= n_max; ++j) {
                next[j] += p;
                p *= fac;
            }
        }
        coef.swap(next);
    }
    return std::accumulate(coef.begin(), coef.end(), 0.0);
}

PartitionFunctions partition_functions(const ThermalDecomposition& dec, const CutoffFunction& f,
                                       const OneBodySpectrum& h) {
    const FockBasis& basis = *dec.basis;
    const double tau = dec.tau;
    PartitionFunctions out;
    out.Z_tau0 = 1.0;
    for (int i = 0; i < h.modes.size(); ++i)
        out.Z_tau0 /= -std::expm1(-h.lambda[i] / tau);

    if (f.is_diagnostic_one()) {
        // only the free state admits f == 1: then Z_tau = Z_{tau,0} exactly
        for (std::size_t bi = 0; bi < basis.blocks.size(); ++bi) {
            Eigen::VectorXd free_e(dec.eigenvalues[bi].size());
            const auto& blk = basis.blocks[bi];
            for (std::size_t p = 0; p < blk.states.size(); ++p) {
                const std::uint16_t* occ = basis.occ(blk.states[p]);
                double e = 0.0;
                for (int i = 0; i < basis.d(); ++i) e += h.lambda[i] * occ[i];
                free_e[static_cast<Eigen::Index>(p)] = e / tau;
            }
            // any interacting deviation means the diagnostic is unsound
            Eigen::VectorXd ev = dec.eigenvalues[bi];
            std::sort(free_e.data(), free_e.data() + free_e.size());
            if ((ev - free_e).cwiseAbs().maxCoeff() > 1e-9)
                throw std::invalid_argument(
                    "partition_functions: f == 1 diagnostic requires the free state (w == 0)");
        }
        out.Z_tau = out.Z_tau0;
        out.Z_rel = 1.0;
        return out;
    }

    const double K = f.support_radius();
    if (K * tau > static_cast<double>(basis.n_max) + 1e-9)
        throw TruncationError(
            "partition_functions: K*tau exceeds n_max, truncation would be silently lossy");
    double Z = 0.0;
    for (std::size_t bi = 0; bi < basis.blocks.size(); ++bi) {
        const double fv = f(static_cast<double>(basis.blocks[bi].n) / tau);
        if (fv == 0.0) continue;
        Z += fv * dec.eigenvalues[bi].unaryExpr([](double e) { return std::exp(-e); }).sum();
    }
    out.Z_tau = Z;
    out.Z_rel = Z / out.Z_tau0;
    return out;
}

Complex quantum_expectation(const BlockOperator& A, const ThermalDecomposition& dec,
                            const CutoffFunction& f) {
    const FockBasis& basis = *dec.basis;
    const double tau = dec.tau;
    if (!f.is_diagnostic_one() &&
        f.support_radius() * tau > static_cast<double>(basis.n_max) + 1e-9)
        throw TruncationError("quantum_expectation: K*tau exceeds n_max");
    Complex num{0.0, 0.0};
    double den = 0.0;
    for (std::size_t bi = 0; bi < basis.blocks.size(); ++bi) {
        const double fv = f(static_cast<double>(basis.blocks[bi].n) / tau);
        if (fv == 0.0) continue;
        const Eigen::VectorXd bw =
            dec.eigenvalues[bi].unaryExpr([](double e) { return std::exp(-e); });
        const Eigen::MatrixXcd At =
            dec.eigenvectors[bi].adjoint() * A.blocks[bi] * dec.eigenvectors[bi];
        for (Eigen::Index j = 0; j < bw.size(); ++j) num += fv * bw[j] * At(j, j);
        den += fv * bw.sum();
    }
    if (den == 0.0) throw DegenerateEnsembleError("quantum_expectation: vanishing trace weight");
    return num / den;
}

namespace {
// apply a_k to a vector given in the coordinates of block `src`; the result
// lives in the block with (n-1, P-k), or nowhere when n_k = 0 everywhere
struct LoweredVector {
    std::int64_t block = -1;
    Eigen::VectorXcd v;
};

LoweredVector apply_annihilation(const FockBasis& basis, std::size_t src_block,
                                 const Eigen::VectorXcd& v, int mode_index) {
    const auto& blk = basis.blocks[src_block];
    LoweredVector out;
    std::vector<std::uint16_t> tmp(basis.d());
    for (std::size_t pos = 0; pos < blk.states.size(); ++pos) {
        if (v[static_cast<Eigen::Index>(pos)] == Complex(0, 0)) continue;
        const std::uint16_t* occ = basis.occ(blk.states[pos]);
        if (occ[mode_index] == 0) continue;
        std::copy(occ, occ + basis.d(), tmp.begin());
        --tmp[mode_index];
        const std::int64_t target = basis.find_state(tmp.data());
        if (target < 0) continue;  // cannot happen: lowering stays in the basis
        const std::int32_t tb = basis.state_block[target];
        if (out.block < 0) {
            out.block = tb;
            out.v = Eigen::VectorXcd::Zero(
                static_cast<Eigen::Index>(basis.blocks[tb].states.size()));
        }
        out.v[basis.state_pos[target]] +=
            std::sqrt(static_cast<double>(occ[mode_index])) * v[static_cast<Eigen::Index>(pos)];
    }
    return out;
}
}  // namespace

Eigen::MatrixXcd gamma_tau_p(const ThermalDecomposition& dec, const CutoffFunction& f, int p) {
    if (p < 1 || p > 2) throw SizeError("gamma_tau_p: p must be 1 or 2");
    const FockBasis& basis = *dec.basis;
    const double tau = dec.tau;
    const int d = basis.d();
    const Eigen::Index dim = p == 1 ? d : d * d;
    Eigen::MatrixXcd gamma = Eigen::MatrixXcd::Zero(dim, dim);
    double Z = 0.0;

    for (std::size_t bi = 0; bi < basis.blocks.size(); ++bi) {
        const double fv = f(static_cast<double>(basis.blocks[bi].n) / tau);
        if (fv == 0.0) continue;
        const auto& V = dec.eigenvectors[bi];
        const auto& E = dec.eigenvalues[bi];
        for (Eigen::Index j = 0; j < E.size(); ++j) {
            const double wj = fv * std::exp(-E[j]);
            Z += wj;
            if (wj == 0.0) continue;
            const Eigen::VectorXcd vj = V.col(j);
            if (p == 1) {
                std::vector<LoweredVector> low(d);
                for (int k = 0; k < d; ++k) low[k] = apply_annihilation(basis, bi, vj, k);
                for (int k = 0; k < d; ++k) {
                    if (low[k].block < 0) continue;
                    for (int l = 0; l < d; ++l) {
                        if (low[l].block != low[k].block) continue;  // momentum selection
                        gamma(k, l) += wj * low[l].v.dot(low[k].v);  // <a_l v, a_k v>
                    }
                }
            } else {
                std::vector<LoweredVector> low2(static_cast<std::size_t>(d) * d);
                for (int k1 = 0; k1 < d; ++k1) {
                    const LoweredVector l1v = apply_annihilation(basis, bi, vj, k1);
                    for (int k2 = 0; k2 < d; ++k2) {
                        auto& slot = low2[static_cast<std::size_t>(k1) * d + k2];
                        if (l1v.block >= 0)
                            slot = apply_annihilation(
                                basis, static_cast<std::size_t>(l1v.block), l1v.v, k2);
                    }
                }
                // entry ((k1,k2),(l1,l2)) = <a_{l2} a_{l1} v, a_{k1} a_{k2} v>;
                // rows use a_{k1} a_{k2} applied as k2 first
                for (Eigen::Index r = 0; r < dim; ++r) {
                    const int k1 = static_cast<int>(r / d), k2 = static_cast<int>(r % d);
                    const auto& rv = low2[static_cast<std::size_t>(k2) * d + k1];
                    if (rv.block < 0) continue;
                    for (Eigen::Index c = 0; c < dim; ++c) {
                        const int l1 = static_cast<int>(c / d), l2 = static_cast<int>(c % d);
                        const auto& cv = low2[static_cast<std::size_t>(l1) * d + l2];
                        if (cv.block != rv.block) continue;
                        gamma(r, c) += wj * cv.v.dot(rv.v);
                    }
                }
            }
        }
    }
    if (Z == 0.0) throw DegenerateEnsembleError("gamma_tau_p: vanishing trace weight");
    gamma /= Z * std::pow(tau, p);
    const double defect = (gamma - gamma.adjoint()).cwiseAbs().maxCoeff();
    if (defect > 1e-10) throw std::runtime_error("gamma_tau_p: Hermiticity defect above 1e-10");
    gamma = 0.5 * (gamma + gamma.adjoint().eval());
    return gamma;
}

namespace {
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int order) {
    // nodes/weights on (0,1) by Newton iteration on Legendre polynomials
    std::vector<double> x(order), w(order);
    for (int i = 0; i < order; ++i) {
        double t = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = t;
            for (int j = 2; j <= order; ++j) {
                const double p2 = ((2.0 * j - 1.0) * t * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            const double dp = order * (t * p1 - p0) / (t * t - 1.0);
            const double dt = p1 / dp;
            t -= dt;
            if (std::abs(dt) < 1e-15) break;
        }
        double p0 = 1.0, p1 = t;
        for (int j = 2; j <= order; ++j) {
            const double p2 = ((2.0 * j - 1.0) * t * p1 - (j - 1.0) * p0) / j;
            p0 = p1;
            p1 = p2;
        }
        const double dp = order * (t * p1 - p0) / (t * t - 1.0);
        x[i] = 0.5 * (1.0 + t);
        w[i] = 1.0 / ((1.0 - t * t) * dp * dp);
    }
    return {x, w};
}

// per-state free energies E_s = sum_k lambda_k n_k / tau for one block
Eigen::VectorXd block_free_energies(const FockBasis& basis, std::size_t bi,
                                    const OneBodySpectrum& h, double tau) {
    const auto& blk = basis.blocks[bi];
    Eigen::VectorXd e(static_cast<Eigen::Index>(blk.states.size()));
    for (std::size_t p = 0; p < blk.states.size(); ++p) {
        const std::uint16_t* occ = basis.occ(blk.states[p]);
        double acc = 0.0;
        for (int i = 0; i < basis.d(); ++i) acc += h.lambda[i] * occ[i];
        e[static_cast<Eigen::Index>(p)] = acc / tau;
    }
    return e;
}
}  // namespace

double duhamel_coefficient_a_tau_m(const FockBasis& basis, const OneBodySpectrum& h, double tau,
                                   const Potential& w, const CutoffFunction& f,
                                   const Eigen::MatrixXcd& xi, int p, int m,
                                   int quadrature_order) {
    if (m < 0 || m > 2) throw SizeError("duhamel_coefficient: m must be in {0,1,2}");
    if (!f.is_diagnostic_one() &&
        f.support_radius() * tau > static_cast<double>(basis.n_max) + 1e-9)
        throw TruncationError("duhamel_coefficient: K*tau exceeds n_max");
    const double Z0 = [&] {
        double z = 1.0;
        for (int i = 0; i < h.modes.size(); ++i) z /= -std::expm1(-h.lambda[i] / tau);
        return z;
    }();
    const BlockOperator theta = build_theta(basis, tau, xi, p);

    if (m == 0) {
        double acc = 0.0;
        for (std::size_t bi = 0; bi < basis.blocks.size(); ++bi) {
            const double fv = f(static_cast<double>(basis.blocks[bi].n) / tau);
            if (fv == 0.0) continue;
            const Eigen::VectorXd e = block_free_energies(basis, bi, h, tau);
            for (Eigen::Index j = 0; j < e.size(); ++j)
                acc += fv * std::exp(-e[j]) * theta.blocks[bi](j, j).real();
        }
        return acc / Z0;
    }

    const BlockOperator W = build_w(basis, tau, w);
    const auto [nodes, weights] = gauss_legendre(quadrature_order);
    double acc = 0.0;
    for (std::size_t bi = 0; bi < basis.blocks.size(); ++bi) {
        const double fv = f(static_cast<double>(basis.blocks[bi].n) / tau);
        if (fv == 0.0) continue;
        const Eigen::VectorXd e = block_free_energies(basis, bi, h, tau);
        const auto& Th = theta.blocks[bi];
        const auto& Wb = W.blocks[bi];
        const auto expd = [&](double u) {
            return (-u * e.array()).exp().matrix().asDiagonal();
        };
        if (m == 1) {
            double block_acc = 0.0;
            for (int q = 0; q < quadrature_order; ++q) {
                const double t1 = nodes[q];
                const Complex tr =
                    (Th * expd(1.0 - t1) * Wb * expd(t1)).trace();
                block_acc += weights[q] * tr.real();
            }
            acc += -fv * block_acc;
        } else {
            double block_acc = 0.0;
            for (int q1 = 0; q1 < quadrature_order; ++q1) {
                const double t1 = nodes[q1];
                const Eigen::MatrixXcd left = Th * expd(1.0 - t1) * Wb;
                double inner = 0.0;
                for (int q2 = 0; q2 < quadrature_order; ++q2) {
                    const double t2 = t1 * nodes[q2];  // 0 < t2 < t1
                    const Complex tr =
                        (left * expd(t1 - t2) * Wb * expd(t2)).trace();
                    inner += t1 * weights[q2] * tr.real();
                }
                block_acc += weights[q1] * inner;
            }
            acc += fv * block_acc;
        }
    }
    return acc / Z0;
}

double duhamel_m1_closed_form(const FockBasis& basis, const OneBodySpectrum& h, double tau,
                              const Potential& w, const CutoffFunction& f,
                              const Eigen::MatrixXcd& xi, int p) {
    const double Z0 = [&] {
        double z = 1.0;
        for (int i = 0; i < h.modes.size(); ++i) z /= -std::expm1(-h.lambda[i] / tau);
        return z;
    }();
    const BlockOperator theta = build_theta(basis, tau, xi, p);
    const BlockOperator W = build_w(basis, tau, w);
    double acc = 0.0;
    for (std::size_t bi = 0; bi < basis.blocks.size(); ++bi) {
        const double fv = f(static_cast<double>(basis.blocks[bi].n) / tau);
        if (fv == 0.0) continue;
        const Eigen::VectorXd e = block_free_energies(basis, bi, h, tau);
        const auto& Th = theta.blocks[bi];
        const auto& Wb = W.blocks[bi];
        // int_0^1 e^{-(1-t)E'} e^{-tE} dt = (e^{-E} - e^{-E'})/(E' - E)
        for (Eigen::Index a = 0; a < e.size(); ++a)
            for (Eigen::Index b = 0; b < e.size(); ++b) {
                const Complex c = Th(a, b) * Wb(b, a);
                if (c == Complex(0, 0)) continue;
                const double Ea = e[a], Eb = e[b];
                const double I = std::abs(Ea - Eb) < 1e-12
                                     ? std::exp(-Ea)
                                     : (std::exp(-Ea) - std::exp(-Eb)) / (Eb - Ea);
                acc += fv * (c * I).real();
            }
    }
    return -acc / Z0;
}

BlockOperator heisenberg_evolve(const BlockOperator& A, const ThermalDecomposition& dec,
                                double t) {
    if (A.basis != dec.basis) throw std::invalid_argument("heisenberg_evolve: basis mismatch");
    BlockOperator out = A;
    const double tau = dec.tau;
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t bi = 0; bi < static_cast<std::int64_t>(A.blocks.size()); ++bi) {
        const auto& V = dec.eigenvectors[bi];
        const auto& E = dec.eigenvalues[bi];
        Eigen::VectorXcd ph(E.size());
        for (Eigen::Index j = 0; j < E.size(); ++j)
            ph[j] = std::polar(1.0, t * tau * E[j]);
        const Eigen::MatrixXcd At = V.adjoint() * A.blocks[bi] * V;
        const Eigen::MatrixXcd evolved =
            ph.asDiagonal() * At * ph.conjugate().asDiagonal();
        out.blocks[bi] = V * evolved * V.adjoint();
    }
    out.hermitian = A.hermitian;
    return out;
}

Complex quantum_time_correlation(const std::vector<const BlockOperator*>& ops,
                                 const std::vector<double>& times,
                                 const ThermalDecomposition& dec, const CutoffFunction& f) {
    if (ops.size() != times.size() || ops.empty())
        throw std::invalid_argument("quantum_time_correlation: ops/times mismatch");
    const FockBasis& basis = *dec.basis;
    const double tau = dec.tau;
    if (!f.is_diagnostic_one() &&
        f.support_radius() * tau > static_cast<double>(basis.n_max) + 1e-9)
        throw TruncationError("quantum_time_correlation: K*tau exceeds n_max");
    Complex num{0.0, 0.0};
    double den = 0.0;
    for (std::size_t bi = 0; bi < basis.blocks.size(); ++bi) {
        const double fv = f(static_cast<double>(basis.blocks[bi].n) / tau);
        if (fv == 0.0) continue;
        const auto& V = dec.eigenvectors[bi];
        const auto& E = dec.eigenvalues[bi];
        const Eigen::Index dim = E.size();
        Eigen::MatrixXcd prod = Eigen::MatrixXcd::Identity(dim, dim);
        for (std::size_t j = 0; j < ops.size(); ++j) {
            Eigen::MatrixXcd At = V.adjoint() * ops[j]->blocks[bi] * V;
            Eigen::VectorXcd ph(dim);
            for (Eigen::Index a = 0; a < dim; ++a)
                ph[a] = std::polar(1.0, times[j] * tau * E[a]);
            prod = prod * (ph.asDiagonal() * At * ph.conjugate().asDiagonal());
        }
        for (Eigen::Index a = 0; a < dim; ++a) {
            const double bw = fv * std::exp(-E[a]);
            num += bw * prod(a, a);
            den += bw;
        }
    }
    if (den == 0.0)
        throw DegenerateEnsembleError("quantum_time_correlation: vanishing trace weight");
    return num / den;
}

}  // namespace nlsgibbs
