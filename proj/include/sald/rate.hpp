#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "sald/extreal.hpp"
#include "sald/kernel.hpp"
#include "sald/model.hpp"
#include "sald/schedule.hpp"
#include "sald/types.hpp"

namespace sald {

/// Relative entropy R(p || q) = sum p log(p/q), with 0 log(0/.) = 0 and
/// +infinity as soon as p charges a q-null point.
inline ExtReal relative_entropy(const Vec& p, const Vec& q) {
    if (p.size() != q.size()) throw std::invalid_argument("relative_entropy: shape mismatch");
    double acc = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) continue;
        if (q[i] <= 0.0) return ExtReal::infinity();
        acc += p[i] * std::log(p[i] / q[i]);
    }
    return acc;
}

inline ExtReal relative_entropy(const Mat& p, const Mat& q) {
    if (p.rows() != q.rows() || p.cols() != q.cols())
        throw std::invalid_argument("relative_entropy: shape mismatch");
    double acc = 0.0;
    for (Eigen::Index i = 0; i < p.rows(); ++i)
        for (Eigen::Index j = 0; j < p.cols(); ++j) {
            if (p(i, j) == 0.0) continue;
            if (q(i, j) <= 0.0) return ExtReal::infinity();
            acc += p(i, j) * std::log(p(i, j) / q(i, j));
        }
    return acc;
}

namespace detail {

inline double logsumexp(const std::vector<double>& xs) {
    double m = -std::numeric_limits<double>::infinity();
    for (double x : xs) m = std::max(m, x);
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double x : xs) s += std::exp(x - m);
    return m + std::log(s);
}

struct PerronData {
    double log_root = 0.0;  // log of the Perron eigenvalue
    Vec log_right;          // log right eigenvector, max-normalized
    Vec log_left;           // log left eigenvector, max-normalized
    int iterations = 0;
};

// Power iteration for the Perron root of exp(logK), run entirely in log
// space so arbitrarily tilted kernels cannot overflow. logK entries may be
// -inf (structural zeros). Requires a primitive support pattern.
// Rayleigh-style residual stop on the normalized vectors; stagnation is
// broken by a deterministic perturbation restart.
inline PerronData perron_log(const Mat& logK, double tol = 1e-13, int max_iter = 200000) {
    const int s = static_cast<int>(logK.rows());
    auto iterate = [&](bool left) {
        Vec lv = Vec::Zero(s);
        double lr = 0.0;
        double best_res = std::numeric_limits<double>::infinity();
        int since_best = 0;
        int it = 0;
        for (; it < max_iter; ++it) {
            Vec lw(s);
            for (int i = 0; i < s; ++i) {
                double m = -std::numeric_limits<double>::infinity();
                for (int j = 0; j < s; ++j) {
                    const double e = (left ? logK(j, i) : logK(i, j)) + lv[j];
                    if (e > m) m = e;
                }
                if (!std::isfinite(m)) {
                    lw[i] = -std::numeric_limits<double>::infinity();
                    continue;
                }
                double acc = 0.0;
                for (int j = 0; j < s; ++j) {
                    const double e = (left ? logK(j, i) : logK(i, j)) + lv[j];
                    if (std::isfinite(e)) acc += std::exp(e - m);
                }
                lw[i] = m + std::log(acc);
            }
            const double nv = lv.maxCoeff();
            const double nw = lw.maxCoeff();
            if (!std::isfinite(nw))
                throw ErgodicityError("perron: tilted kernel annihilated the iterate");
            // norm growth estimates the root; residual compares directions
            double res = 0.0;
            for (int i = 0; i < s; ++i) {
                const double a = std::exp(lw[i] - nw);
                const double b = std::exp(lv[i] - nv);
                res = std::max(res, std::abs(a - b));
            }
            lr = nw - nv;
            lv = lw - Vec::Constant(s, nw);
            if (res <= tol) break;
            if (res < best_res * (1.0 - 1e-3)) {
                best_res = res;
                since_best = 0;
            } else if (++since_best > 2000) {
                // stagnation: likely a near-periodic pattern; perturb and go on
                for (int i = 0; i < s; ++i) lv[i] += 1e-8 * ((i % 2 == 0) ? 1.0 : -1.0);
                since_best = 0;
            }
        }
        if (it >= max_iter)
            throw NumericalError("perron: power iteration did not reach tolerance");
        return std::make_pair(lv, std::make_pair(lr, it));
    };

    PerronData out;
    auto right = iterate(false);
    auto leftp = iterate(true);
    out.log_right = right.first;
    out.log_left = leftp.first;
    out.log_root = right.second.first;
    out.iterations = right.second.second + leftp.second.second;
    return out;
}

}  // namespace detail

/// Pointwise rate-function evaluator at a frozen x: the exponentially
/// tilted kernel K_alpha(y,z) = rho_x(y,z) exp{<alpha, g(x,z)>}, its Perron
/// data, the limiting Hamiltonian H(x, alpha) = log-Perron-root(K_alpha),
/// the gradient of H, and the local rate L(x, .) as the Legendre-Fenchel
/// transform of H(x, .).
class RateEval {
public:
    RateEval(const SAModel& m, Vec x, double tol = 1e-13)
        : x_(std::move(x)), d1_(m.d1), tol_(tol) {
        if (m.hamiltonian_override) {
            h_override_ = m.hamiltonian_override;
            hg_override_ = m.hamiltonian_grad_override;
            size_ = 0;
            return;
        }
        if (!m.has_kernel()) throw std::logic_error("RateEval: model has neither kernel nor Hamiltonian override");
        size_ = m.space.size;
        Mat rho = m.kernel.matrix(x_);
        log_rho_ = Mat::Constant(size_, size_, -std::numeric_limits<double>::infinity());
        for (int y = 0; y < size_; ++y)
            for (int z = 0; z < size_; ++z)
                if (rho(y, z) > 0.0) log_rho_(y, z) = std::log(rho(y, z));
        gvals_ = m.g_matrix(x_);
        if (!detail::primitivity_index(detail::BoolMat::support(rho)))
            throw ErgodicityError("RateEval: kernel is not primitive at this x");
        // K_0 = rho_x must have Perron root 1
        const double h0 = hamiltonian(Vec::Zero(d1_));
        if (std::abs(h0) > 1e-10)
            throw NumericalError("RateEval: Perron root of the untilted kernel is off 1");
    }

    const Vec& x() const { return x_; }
    int dim() const { return d1_; }

    /// K_alpha as a dense matrix (exponential form; test/diagnostic use).
    Mat tilted(const Vec& alpha) const {
        require_kernel();
        Mat out(size_, size_);
        for (int y = 0; y < size_; ++y)
            for (int z = 0; z < size_; ++z)
                out(y, z) = std::isfinite(log_rho_(y, z))
                                ? std::exp(log_rho_(y, z) + alpha.dot(gvals_.row(z)))
                                : 0.0;
        return out;
    }

    double hamiltonian(const Vec& alpha) const {
        if (h_override_) return h_override_(x_, alpha);
        return perron(alpha).log_root;
    }

    /// grad_alpha H via Perron left/right vectors: the mean of g(x, .)
    /// under the stationary pair law of the Doob-twisted kernel.
    Vec hamiltonian_grad(const Vec& alpha) const {
        if (h_override_) {
            if (hg_override_) return hg_override_(x_, alpha);
            return fd_grad([&](const Vec& a) { return h_override_(x_, a); }, alpha, 1e-6);
        }
        detail::PerronData pd = perron(alpha);
        // pair weights P(y,z) ~ exp(lu_y + logK(y,z) + lv_z), normalized
        double shift = -std::numeric_limits<double>::infinity();
        for (int y = 0; y < size_; ++y)
            for (int z = 0; z < size_; ++z) {
                const double lk = log_rho_(y, z);
                if (!std::isfinite(lk)) continue;
                shift = std::max(shift, pd.log_left[y] + lk + alpha.dot(gvals_.row(z)) + pd.log_right[z]);
            }
        double norm = 0.0;
        Vec acc = Vec::Zero(d1_);
        for (int y = 0; y < size_; ++y)
            for (int z = 0; z < size_; ++z) {
                const double lk = log_rho_(y, z);
                if (!std::isfinite(lk)) continue;
                const double w = std::exp(pd.log_left[y] + lk + alpha.dot(gvals_.row(z)) +
                                          pd.log_right[z] - shift);
                norm += w;
                acc += w * gvals_.row(z).transpose();
            }
        return acc / norm;
    }

    struct Legendre {
        ExtReal value;
        Vec alpha_star;       // maximizer (or last iterate when divergent)
        bool boundary = false;  // value reached at the velocity-range boundary
        bool converged = false;
        int iterations = 0;
    };

    /// Local rate L(x, beta) = sup_alpha { <alpha, beta> - H(x, alpha) }.
    /// Damped Newton ascent on the smooth concave objective starting from
    /// alpha = 0 (or the supplied warm start); iterates escaping
    /// ||alpha|| > alpha_cap with the objective still climbing signal
    /// beta outside the closure of the attainable-velocity range: +infinity.
    Legendre local_rate(const Vec& beta, std::optional<Vec> warm_start = std::nullopt,
                        double grad_tol = 1e-11, double alpha_cap = 1e3) const {
        Vec alpha = warm_start ? *warm_start : Vec::Zero(d1_);
        if (alpha.norm() > alpha_cap) alpha = Vec::Zero(d1_);
        auto psi = [&](const Vec& a) { return a.dot(beta) - hamiltonian(a); };
        double f = psi(alpha);
        Legendre out;
        const int max_iter = 300;
        int it = 0;
        for (; it < max_iter; ++it) {
            Vec grad = beta - hamiltonian_grad(alpha);
            if (grad.norm() <= grad_tol * (1.0 + beta.norm())) {
                out.converged = true;
                break;
            }
            // Newton direction from a finite-difference Hessian of H
            Vec dir = grad;
            {
                Mat hess(d1_, d1_);
                const double h = 1e-5 * (1.0 + alpha.norm());
                for (int k = 0; k < d1_; ++k) {
                    Vec ap = alpha, am = alpha;
                    ap[k] += h;
                    am[k] -= h;
                    hess.col(k) = (hamiltonian_grad(ap) - hamiltonian_grad(am)) / (2.0 * h);
                }
                hess = 0.5 * (hess + hess.transpose());
                Eigen::LLT<Mat> llt(hess + 1e-14 * Mat::Identity(d1_, d1_));
                if (llt.info() == Eigen::Success) {
                    Vec cand = llt.solve(grad);
                    if (cand.dot(grad) > 0.0) dir = cand;
                }
            }
            // backtracking line search on the concave objective
            double step = 1.0;
            bool moved = false;
            for (int ls = 0; ls < 60; ++ls) {
                Vec trial = alpha + step * dir;
                double ft = psi(trial);
                if (ft > f + 1e-12 * std::abs(f)) {
                    alpha = trial;
                    f = ft;
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if (!moved) {
                out.converged = grad.norm() <= 1e-6 * (1.0 + beta.norm());
                break;
            }
            if (alpha.norm() > alpha_cap) {
                // still climbing at the cap: beta lies outside the closed
                // velocity range; a flat objective means a boundary velocity
                Vec grad_now = beta - hamiltonian_grad(alpha);
                if (grad_now.norm() > 1e-7) {
                    out.value = ExtReal::infinity();
                    out.alpha_star = alpha;
                    out.iterations = it + 1;
                    return out;
                }
                out.boundary = true;
                out.converged = true;
                break;
            }
        }
        out.value = f;
        out.alpha_star = alpha;
        out.iterations = it;
        return out;
    }

private:
    void require_kernel() const {
        if (size_ == 0) throw std::logic_error("RateEval: analytic-override model has no kernel");
    }

    detail::PerronData perron(const Vec& alpha) const {
        require_kernel();
        Mat logK = log_rho_;
        for (int z = 0; z < size_; ++z) {
            const double t = alpha.dot(gvals_.row(z));
            for (int y = 0; y < size_; ++y)
                if (std::isfinite(logK(y, z))) logK(y, z) += t;
        }
        return detail::perron_log(logK, tol_);
    }

    template <typename F>
    static Vec fd_grad(F&& f, const Vec& a, double h) {
        Vec g(a.size());
        for (Eigen::Index k = 0; k < a.size(); ++k) {
            Vec ap = a, am = a;
            ap[k] += h;
            am[k] -= h;
            g[k] = (f(ap) - f(am)) / (2.0 * h);
        }
        return g;
    }

    Vec x_;
    int d1_;
    double tol_;
    int size_ = 0;
    Mat log_rho_;
    Mat gvals_;
    std::function<double(const Vec&, const Vec&)> h_override_;
    std::function<Vec(const Vec&, const Vec&)> hg_override_;
};

/// H(x, alpha): log Perron eigenvalue of the tilted kernel (the limiting
/// log-moment generating function of sum <alpha, g(x, Y_i)>).
inline double hamiltonian(const SAModel& m, const Vec& x, const Vec& alpha) {
    return RateEval(m, x).hamiltonian(alpha);
}

inline Vec hamiltonian_grad(const SAModel& m, const Vec& x, const Vec& alpha) {
    return RateEval(m, x).hamiltonian_grad(alpha);
}

/// L(x, beta) by Legendre-Fenchel transform of H(x, .).
inline ExtReal local_rate(const SAModel& m, const Vec& x, const Vec& beta) {
    return RateEval(m, x).local_rate(beta).value;
}

/// Time-dependent Hamiltonian H(t, x, alpha) = H(x, alpha h(t)) / h(t).
inline double time_dep_hamiltonian(const SAModel& m, const StepSchedule& sch, double T, double t,
                                   const Vec& x, const Vec& alpha) {
    const double h = sch.h_limit(T, t);
    return hamiltonian(m, x, Vec(alpha * h)) / h;
}

}  // namespace sald
