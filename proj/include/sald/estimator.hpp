#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "sald/model.hpp"
#include "sald/path.hpp"
#include "sald/schedule.hpp"
#include "sald/sim.hpp"
#include "sald/types.hpp"

namespace sald {

/// Bounded path functional F with its caller-declared bound M. Values are
/// clamped to [-M, M]; how often that happened is reported, not hidden.
struct PathFunctional {
    std::string name;
    std::function<double(const Path&)> f;
    double bound = 1.0;
};

struct LaplaceEstimate {
    Index n = 0;
    double T = 0.0;
    int samples = 0;
    double beta_n = 0.0;
    double value = 0.0;      // -(1/beta_n) log( (1/N) sum exp(-beta_n F_i) )
    double std_error = 0.0;  // jackknife proxy
    int clamped = 0;
};

namespace detail {

// Deterministic parallel map: sample i always lands in slot i, and the
// reduction runs single-threaded over the slots, so the thread count can
// never change the result.
template <typename Fn>
inline void parallel_samples(int N, int threads, Fn&& fn) {
    threads = std::max(1, threads);
    if (threads == 1) {
        for (int i = 0; i < N; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    auto worker = [&] {
        for (;;) {
            int i = next.fetch_add(64);
            if (i >= N) return;
            const int hi = std::min(N, i + 64);
            for (; i < hi; ++i) fn(i);
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

}  // namespace detail

/// Monte Carlo Laplace functional
///   -(1/beta_n) log (1/N) sum_i exp{-beta_n F(X^n_i)}
/// with per-sample streams seed^i, log-space reduction (max shift), and a
/// leave-one-out jackknife error proxy. Deterministic given the seed at any
/// thread count.
inline LaplaceEstimate laplace_functional(const SAModel& m, const StepSchedule& sch,
                                          const PathFunctional& F, Index n, double T, int N,
                                          std::uint64_t seed, int threads = 1) {
    if (N < 2) throw std::invalid_argument("laplace_functional: need N >= 2");
    const double beta = static_cast<double>(sch.beta_n(n, T));
    std::vector<double> w(static_cast<std::size_t>(N));
    std::atomic<int> clamped{0};
    detail::parallel_samples(N, threads, [&](int i) {
        Path p = simulate_segment(m, sch, n, T, seed ^ static_cast<std::uint64_t>(i));
        double v = F.f(p);
        if (std::abs(v) > F.bound) {
            v = std::clamp(v, -F.bound, F.bound);
            clamped.fetch_add(1);
        }
        w[static_cast<std::size_t>(i)] = v;
    });

    // two-pass log-sum-exp with a fixed shift: order-insensitive
    double amax = -std::numeric_limits<double>::infinity();
    for (double v : w) amax = std::max(amax, -beta * v);
    double sum = 0.0;
    for (double v : w) sum += std::exp(-beta * v - amax);
    const double lse = amax + std::log(sum);

    LaplaceEstimate out;
    out.n = n;
    out.T = T;
    out.samples = N;
    out.beta_n = beta;
    out.clamped = clamped.load();
    out.value = -(lse - std::log(static_cast<double>(N))) / beta;

    // jackknife over leave-one-out estimates
    std::vector<double> loo(static_cast<std::size_t>(N));
    double mean = 0.0;
    for (int i = 0; i < N; ++i) {
        double si = sum - std::exp(-beta * w[static_cast<std::size_t>(i)] - amax);
        si = std::max(si, 1e-300);
        loo[static_cast<std::size_t>(i)] =
            -(amax + std::log(si) - std::log(static_cast<double>(N - 1))) / beta;
        mean += loo[static_cast<std::size_t>(i)];
    }
    mean /= N;
    double var = 0.0;
    for (double v : loo) var += (v - mean) * (v - mean);
    out.std_error = std::sqrt(var * (static_cast<double>(N - 1) / N));
    return out;
}

struct TubeEstimate {
    Index n = 0;
    int samples = 0;
    int hits = 0;
    double beta_n = 0.0;
    double p_hat = 0.0;
    bool censored = false;  // zero hits: log_rate is a one-sided lower bound
    double log_rate = 0.0;  // -(1/beta_n) log p_hat, or log(N)/beta_n when censored
};

/// Fraction of simulated trajectories staying within sup-norm radius delta
/// of the target path, with the log-scaled rate. Zero hits are reported as
/// a censored one-sided bound (log N / beta_n), never as infinity.
inline TubeEstimate tube_probability(const SAModel& m, const StepSchedule& sch, const Path& target,
                                     double delta, Index n, double T, int N, std::uint64_t seed,
                                     int threads = 1) {
    if (N < 1) throw std::invalid_argument("tube_probability: need N >= 1");
    if (!(delta > 0.0)) throw std::invalid_argument("tube_probability: delta must be > 0");
    std::vector<char> hit(static_cast<std::size_t>(N), 0);
    detail::parallel_samples(N, threads, [&](int i) {
        Path p = simulate_segment(m, sch, n, T, seed ^ static_cast<std::uint64_t>(i));
        const double dev = std::isinf(delta) ? 0.0 : deviation_sup(p, target);
        hit[static_cast<std::size_t>(i)] = dev <= delta ? 1 : 0;
    });
    int count = 0;
    for (char h : hit) count += h;

    TubeEstimate out;
    out.n = n;
    out.samples = N;
    out.hits = count;
    out.beta_n = static_cast<double>(sch.beta_n(n, T));
    out.p_hat = static_cast<double>(count) / N;
    if (count == 0) {
        out.censored = true;
        out.log_rate = std::log(static_cast<double>(N)) / out.beta_n;  // rate >= this
    } else {
        out.log_rate = -std::log(out.p_hat) / out.beta_n;
    }
    return out;
}

}  // namespace sald
