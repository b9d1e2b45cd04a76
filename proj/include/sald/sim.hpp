#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "sald/kernel.hpp"
#include "sald/model.hpp"
#include "sald/path.hpp"
#include "sald/rng.hpp"
#include "sald/schedule.hpp"
#include "sald/types.hpp"

namespace sald {

namespace detail {

// Kernel-row sampler with the trust-radius matrix cache. Exact inverse-CDF
// sampling on the cached row; rebuilds are always exact.
class KernelSampler {
public:
    KernelSampler(const StateKernel& k, const Vec& x0) : kernel_(k) { rebuild(x0); }

    int sample(const Vec& x, int y, double u) {
        if (kernel_.x_dependent() && (x - built_at_).norm() > kernel_.rebuild_radius())
            rebuild(x);
        const int s = kernel_.size();
        double cum = 0.0;
        for (int z = 0; z < s; ++z) {
            cum += matrix_(y, z);
            if (u < cum) return z;
        }
        return s - 1;  // guard against rounding at u ~ 1
    }

private:
    void rebuild(const Vec& x) {
        matrix_ = kernel_.matrix(x);
        built_at_ = x;
    }
    const StateKernel& kernel_;
    Mat matrix_;
    Vec built_at_;
};

}  // namespace detail

/// Run the recursion restarted at step n:
///   X_n = x0,  X_{k+1} = X_k + eps_{n+k+1} g(X_k, Y_{k+1}),
/// with Y_{k+1} sampled from rho_{X_k}(Y_k, .), interpolated piecewise
/// linearly with breakpoints at t_{n+k} - t_n, and truncated so the last
/// breakpoint lands exactly at the horizon T. Deterministic given the seed.
inline Path simulate_segment(const SAModel& m, const StepSchedule& sch, Index n, double T,
                             std::uint64_t seed) {
    if (!(T > 0.0)) throw std::invalid_argument("simulate_segment: T must be > 0");
    if (!m.has_kernel()) throw std::logic_error("simulate_segment: model has no kernel");
    const Index beta = sch.beta_n(n, T);
    if (beta < 1)
        throw std::invalid_argument("simulate_segment: window holds no steps (beta_n = 0)");
    auto snap = sch.sums_through(n + beta + 2);
    const std::vector<double>& sums = *snap;
    const double tn = sums[static_cast<std::size_t>(n)];

    RngStream rng(seed);
    detail::KernelSampler sampler(m.kernel, m.x0);

    std::vector<double> times;
    std::vector<Vec> values;
    times.reserve(static_cast<std::size_t>(beta) + 2);
    values.reserve(static_cast<std::size_t>(beta) + 2);
    times.push_back(0.0);
    values.push_back(m.x0);

    Vec x = m.x0;
    int y = m.y0;
    double tau_prev = 0.0;
    for (Index j = 0;; ++j) {
        const double eps = sch.eps(n + j + 1);
        const double tau_next = sums[static_cast<std::size_t>(n + j + 1)] - tn;
        const int z = sampler.sample(x, y, rng.next_u01());
        Vec x_next = m.step(x, eps, z);
        y = z;
        if (tau_next >= T) {
            if (tau_next > T) {
                const double w = (T - tau_prev) / (tau_next - tau_prev);
                x_next = x + w * (x_next - x);
            }
            times.push_back(T);
            values.push_back(x_next);
            break;
        }
        times.push_back(tau_next);
        values.push_back(x_next);
        x = std::move(x_next);
        tau_prev = tau_next;
    }
    return Path(std::move(times), std::move(values));
}

/// Run exactly `steps` recursion steps starting from index n, with
/// breakpoints at t_{n+k} - t_n. Convenience for the demo algorithms that
/// are specified by iteration count rather than horizon.
inline Path simulate_steps(const SAModel& m, const StepSchedule& sch, Index n, Index steps,
                           std::uint64_t seed) {
    if (steps < 1) throw std::invalid_argument("simulate_steps: need steps >= 1");
    const double T = sch.t_of(n + steps) - sch.t_of(n);
    return simulate_segment(m, sch, n, T, seed);
}

/// Sample average of g(x, Y_k) along the noise chain run at frozen x, with
/// batch-means standard errors (the chain is autocorrelated, so naive
/// i.i.d. errors would be too small). Used by the persistent-chain checks.
struct ChainMean {
    Vec mean;
    Vec std_error;  // per coordinate, from batch means
    int steps = 0;
    int batches = 0;
};

inline ChainMean frozen_chain_mean(const SAModel& m, const Vec& x, Index steps,
                                   std::uint64_t seed, int batches = 100) {
    if (steps < batches || batches < 2)
        throw std::invalid_argument("frozen_chain_mean: need steps >= batches >= 2");
    RngStream rng(seed);
    const Mat rho = m.kernel.matrix(x);
    const Index per_batch = steps / batches;
    const Index used = per_batch * batches;
    int y = m.y0;
    Mat batch_means = Mat::Zero(batches, m.d1);
    for (int b = 0; b < batches; ++b) {
        Vec acc = Vec::Zero(m.d1);
        for (Index k = 0; k < per_batch; ++k) {
            const double u = rng.next_u01();
            double cum = 0.0;
            int z = rho.cols() - 1;
            for (int c = 0; c < rho.cols(); ++c) {
                cum += rho(y, c);
                if (u < cum) {
                    z = c;
                    break;
                }
            }
            y = z;
            acc += m.g(x, z);
        }
        batch_means.row(b) = (acc / static_cast<double>(per_batch)).transpose();
    }
    ChainMean out;
    out.mean = batch_means.colwise().mean().transpose();
    out.std_error = Vec(m.d1);
    for (int k = 0; k < m.d1; ++k) {
        double var = 0.0;
        for (int b = 0; b < batches; ++b) {
            const double d = batch_means(b, k) - out.mean[k];
            var += d * d;
        }
        var /= (batches - 1);
        out.std_error[k] = std::sqrt(var / batches);
    }
    out.steps = static_cast<int>(used);
    out.batches = batches;
    return out;
}

/// Averaged drift g_bar(x) = sum_y g(x, y) pi_x(y).
inline Vec g_bar(const SAModel& m, const Vec& x) {
    InvariantMeasure inv = invariant_measure(m.kernel, x);
    Vec out = Vec::Zero(m.d1);
    for (int y = 0; y < m.space.size; ++y) out += inv.pi[y] * m.g(x, y);
    return out;
}

/// Classical 4th-order Runge-Kutta solution of the limit ODE
/// xdot = g_bar(x) on [0, T], sampled every dt (final partial step lands
/// exactly on T).
inline Path ode_limit(const SAModel& m, const Vec& x0, double T, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("ode_limit: dt must be > 0");
    std::vector<double> times{0.0};
    std::vector<Vec> values{x0};
    Vec x = x0;
    double t = 0.0;
    while (t < T - 1e-15 * std::max(1.0, T)) {
        const double h = std::min(dt, T - t);
        Vec k1 = g_bar(m, x);
        Vec k2 = g_bar(m, x + 0.5 * h * k1);
        Vec k3 = g_bar(m, x + 0.5 * h * k2);
        Vec k4 = g_bar(m, x + h * k3);
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t = (T - t <= dt * (1.0 + 1e-12)) ? T : t + h;
        times.push_back(t);
        values.push_back(x);
    }
    if (times.size() < 2) {
        times.push_back(T);
        values.push_back(x);
    }
    return Path(std::move(times), std::move(values));
}

}  // namespace sald
