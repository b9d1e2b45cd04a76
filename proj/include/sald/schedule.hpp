#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sald/types.hpp"

namespace sald {

enum class ScheduleKind { Harmonic, Polynomial, Constant, Custom };

inline const char* to_string(ScheduleKind k) {
    switch (k) {
        case ScheduleKind::Harmonic: return "harmonic";
        case ScheduleKind::Polynomial: return "polynomial";
        case ScheduleKind::Constant: return "constant";
        case ScheduleKind::Custom: return "custom";
    }
    return "?";
}

/// Step-size schedule eps_k (k >= 1) together with all derived time
/// bookkeeping: partial sums t_n, the inverse map m(t) = max{n : t_n <= t},
/// the window count beta_n = m(t_n + T) - n, the step-scale profile
/// h_n(t) = beta_n * eps_{n+i-1} on [t_{n+i-1}-t_n, t_{n+i}-t_n), and its
/// large-n limit h(t).
///
/// Conventions pinned here and used everywhere else:
///   * indices are 1-based: eps(1) is the first step, t_of(0) == 0;
///   * the recursion consumes eps at the destination index (the step from
///     iterate k to k+1 has length eps_{k+1});
///   * m_of ties resolve left-closed: m_of(t_of(n)) == n exactly.
///
/// Partial sums are cached and extended on demand. Growth follows a
/// grow-then-publish contract: a fresh extended vector is built and swapped
/// in whole, so concurrent readers always see a consistent snapshot.
class StepSchedule {
public:
    /// eps_k = 1/k.
    static StepSchedule harmonic() { return StepSchedule(ScheduleKind::Harmonic, 0.0, {}); }

    /// eps_k = (k+1)^{-rho}, rho in (0,1).
    static StepSchedule polynomial(double rho) {
        if (!(rho > 0.0 && rho < 1.0))
            throw ConfigError("polynomial schedule needs rho in (0,1)");
        return StepSchedule(ScheduleKind::Polynomial, rho, {});
    }

    /// eps_k = eps > 0.
    static StepSchedule constant(double eps) {
        if (!(eps > 0.0)) throw ConfigError("constant schedule needs eps > 0");
        return StepSchedule(ScheduleKind::Constant, eps, {});
    }

    /// Explicit finite list; steps[0] is eps_1. All entries must be > 0.
    static StepSchedule custom(std::vector<double> steps) {
        if (steps.empty()) throw ConfigError("custom schedule needs at least one step");
        for (double e : steps)
            if (!(e > 0.0)) throw ConfigError("custom schedule has a non-positive step");
        return StepSchedule(ScheduleKind::Custom, 0.0, std::move(steps));
    }

    StepSchedule(const StepSchedule& o)
        : kind_(o.kind_), param_(o.param_), custom_(o.custom_), sums_(o.load()) {}
    StepSchedule& operator=(const StepSchedule& o) {
        if (this != &o) {
            kind_ = o.kind_;
            param_ = o.param_;
            custom_ = o.custom_;
            auto snap = o.load();
            std::lock_guard<std::mutex> lk(mutex_);
            sums_ = std::move(snap);
        }
        return *this;
    }

    ScheduleKind kind() const { return kind_; }
    double param() const { return param_; }
    const std::vector<double>& custom_steps() const { return custom_; }

    /// Number of steps available (Custom only; unbounded otherwise).
    Index max_index() const {
        return kind_ == ScheduleKind::Custom ? static_cast<Index>(custom_.size())
                                             : std::numeric_limits<Index>::max();
    }

    /// eps_k, k >= 1. Throws std::out_of_range past the end of a Custom list.
    double eps(Index k) const {
        if (k < 1) throw std::out_of_range("eps: index must be >= 1");
        switch (kind_) {
            case ScheduleKind::Harmonic: return 1.0 / static_cast<double>(k);
            case ScheduleKind::Polynomial:
                return std::pow(static_cast<double>(k) + 1.0, -param_);
            case ScheduleKind::Constant: return param_;
            case ScheduleKind::Custom:
                if (k > static_cast<Index>(custom_.size()))
                    throw std::out_of_range("eps: custom schedule exhausted");
                return custom_[static_cast<std::size_t>(k - 1)];
        }
        throw std::logic_error("unreachable");
    }

    /// t_n = sum_{k=1..n} eps_k, t_0 = 0.
    double t_of(Index n) const {
        if (n < 0) throw std::out_of_range("t_of: n must be >= 0");
        auto snap = sums_through(n);
        return (*snap)[static_cast<std::size_t>(n)];
    }

    /// m(t) = max{n : t_n <= t}. Ties resolve to n (left-closed), so
    /// m_of(t_of(n)) == n holds exactly on the cached sums. An exact tie in
    /// real arithmetic can land one ulp past t in the accumulated sums, so
    /// the comparison carries a slack of 1e-9 + 1e-12 |t|; every supported
    /// step size is orders of magnitude larger at desk scale. For Custom
    /// schedules the result saturates at the list length.
    Index m_of(double t) const {
        if (t < 0.0) throw std::out_of_range("m_of: t must be >= 0");
        const double slack = 1e-9 + 1e-12 * std::abs(t);
        auto snap = sums_behind(t + slack);
        const std::vector<double>& s = *snap;
        // first index with t_n > t (+slack); predecessor is the answer
        auto it = std::upper_bound(s.begin(), s.end(), t + slack);
        return static_cast<Index>(it - s.begin()) - 1;
    }

    /// beta_n = m(t_n + T) - n: the number of steps in the window (t_n, t_n+T].
    /// May be 0 for small T (T below eps_{n+1}).
    Index beta_n(Index n, double T) const {
        if (n < 0) throw std::out_of_range("beta_n: n must be >= 0");
        if (!(T > 0.0)) throw std::invalid_argument("beta_n: T must be > 0");
        return m_of(t_of(n) + T) - n;
    }

    /// h^n(t) = beta_n * eps_{n+i-1} for t in [t_{n+i-1}-t_n, t_{n+i}-t_n),
    /// i in {1..beta_n}. The sliver [t_{n+beta_n}-t_n, T), not covered by
    /// those intervals, takes the last value (i = beta_n).
    double h_n(Index n, double T, double t) const {
        if (!(t >= 0.0 && t < T)) throw std::out_of_range("h_n: t must lie in [0, T)");
        Index beta = beta_n(n, T);
        if (beta < 1)
            throw std::invalid_argument("h_n: window holds no steps (beta_n = 0)");
        auto snap = sums_through(n + beta);
        const std::vector<double>& s = *snap;
        const double tn = s[static_cast<std::size_t>(n)];
        // smallest i in {1..beta} with t < t_{n+i} - t_n
        Index lo = 1, hi = beta;
        while (lo < hi) {
            Index mid = lo + (hi - lo) / 2;
            if (t < s[static_cast<std::size_t>(n + mid)] - tn)
                hi = mid;
            else
                lo = mid + 1;
        }
        Index i = lo;
        if (!(t < s[static_cast<std::size_t>(n + i)] - tn)) i = beta;  // tail sliver
        return static_cast<double>(beta) * eps(n + i - 1);
    }

    struct NumericLimit {
        double value = 0.0;
        bool converged = false;
    };

    /// Richardson extrapolation of h_n(t) over n in {1e3, 1e4, 1e5},
    /// assuming a first-order 1/n error term. Works for any kind; it is the
    /// only route for Custom schedules.
    NumericLimit h_limit_numeric(double T, double t) const {
        const Index ns[3] = {1000, 10000, 100000};
        double h[3];
        for (int j = 0; j < 3; ++j) h[j] = h_n(ns[j], T, t);
        // h(n) ~ h + c/n with n growing by 10: eliminate the 1/n term
        const double r12 = (10.0 * h[1] - h[0]) / 9.0;
        const double r23 = (10.0 * h[2] - h[1]) / 9.0;
        NumericLimit out;
        out.value = r23;
        out.converged = std::abs(r23 - r12) <= std::max(1e-6, 1e-4 * std::abs(r23));
        return out;
    }

    /// Limit h(t) of h_n(t). Analytic where known:
    ///   Harmonic     -> exp(-t) * (exp(T) - 1)
    ///   Polynomial   -> T  (constant in t; the T = 1 case is the familiar 1)
    ///   Constant eps -> beta * eps with beta = floor-count of steps in T
    /// Custom schedules fall back to the numeric extrapolation and throw a
    /// NumericalError when it has not converged.
    double h_limit(double T, double t) const {
        if (!(T > 0.0)) throw std::invalid_argument("h_limit: T must be > 0");
        if (!(t >= 0.0 && t <= T)) throw std::out_of_range("h_limit: t must lie in [0, T]");
        switch (kind_) {
            case ScheduleKind::Harmonic: return std::exp(-t) * (std::exp(T) - 1.0);
            case ScheduleKind::Polynomial: return T;
            case ScheduleKind::Constant:
                return static_cast<double>(beta_n(1, T)) * param_;
            case ScheduleKind::Custom: {
                NumericLimit lim = h_limit_numeric(T, std::min(t, std::nexttoward(T, 0.0)));
                if (!lim.converged)
                    throw NumericalError("h_limit: custom schedule limit did not converge");
                return lim.value;
            }
        }
        throw std::logic_error("unreachable");
    }

    /// Snapshot of the cached partial sums covering indices 0..n at least.
    /// Hot loops should take one snapshot and index into it directly.
    std::shared_ptr<const std::vector<double>> sums_through(Index n) const {
        auto snap = load();
        if (static_cast<Index>(snap->size()) > n) return snap;
        return grow_to(n + 1, 0.0, false);
    }

private:
    StepSchedule(ScheduleKind k, double p, std::vector<double> c)
        : kind_(k), param_(p), custom_(std::move(c)) {
        auto base = std::make_shared<std::vector<double>>();
        base->push_back(0.0);
        sums_ = std::move(base);
    }

    std::shared_ptr<const std::vector<double>> load() const {
        std::lock_guard<std::mutex> lk(mutex_);
        return sums_;
    }

    // Snapshot guaranteed to contain an entry > t, or to end at the Custom
    // list length when the sums cannot pass t.
    std::shared_ptr<const std::vector<double>> sums_behind(double t) const {
        auto snap = load();
        if (snap->back() > t) return snap;
        return grow_to(0, t, true);
    }

    std::shared_ptr<const std::vector<double>> grow_to(Index count, double t,
                                                       bool until_past_t) const {
        std::lock_guard<std::mutex> lk(mutex_);
        auto fresh = std::make_shared<std::vector<double>>(*sums_);
        auto need_more = [&] {
            if (until_past_t) return !(fresh->back() > t);
            return static_cast<Index>(fresh->size()) < count;
        };
        while (need_more()) {
            Index next = static_cast<Index>(fresh->size());  // computing t_next
            if (kind_ == ScheduleKind::Custom &&
                next > static_cast<Index>(custom_.size())) {
                if (until_past_t) break;  // m_of saturates at the list end
                throw std::out_of_range("schedule: custom step list exhausted");
            }
            fresh->push_back(fresh->back() + eps(next));
        }
        sums_ = fresh;  // publish the fully built snapshot
        return fresh;
    }

    ScheduleKind kind_;
    double param_ = 0.0;
    std::vector<double> custom_;
    mutable std::mutex mutex_;
    mutable std::shared_ptr<const std::vector<double>> sums_;
};

}  // namespace sald
