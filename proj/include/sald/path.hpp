#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "sald/types.hpp"

namespace sald {

/// Piecewise-linear trajectory on [0, T]: strictly increasing breakpoint
/// times s_0 = 0 < ... < s_last = T with one value per breakpoint.
/// Evaluation at a breakpoint returns the stored value exactly.
class Path {
public:
    Path() = default;

    Path(std::vector<double> times, std::vector<Vec> values)
        : times_(std::move(times)), values_(std::move(values)) {
        if (times_.size() != values_.size() || times_.size() < 2)
            throw std::invalid_argument("Path: need matching times/values, at least two");
        if (times_.front() != 0.0) throw std::invalid_argument("Path: must start at time 0");
        for (std::size_t j = 1; j < times_.size(); ++j) {
            if (!(times_[j] > times_[j - 1]))
                throw std::invalid_argument("Path: breakpoint times must strictly increase");
            if (values_[j].size() != values_[0].size())
                throw std::invalid_argument("Path: inconsistent value dimensions");
        }
    }

    static Path constant(double T, const Vec& v) {
        return Path({0.0, T}, {v, v});
    }

    /// Straight line from a to b over [0, T].
    static Path line(double T, const Vec& a, const Vec& b) {
        return Path({0.0, T}, {a, b});
    }

    int dim() const { return static_cast<int>(values_.front().size()); }
    double horizon() const { return times_.back(); }
    std::size_t breakpoints() const { return times_.size(); }
    double time(std::size_t j) const { return times_[j]; }
    const Vec& value(std::size_t j) const { return values_[j]; }
    const std::vector<double>& times() const { return times_; }

    Vec at(double t) const {
        if (t <= times_.front()) return values_.front();
        if (t >= times_.back()) return values_.back();
        auto it = std::lower_bound(times_.begin(), times_.end(), t);
        std::size_t j = static_cast<std::size_t>(it - times_.begin());
        if (times_[j] == t) return values_[j];  // exact at breakpoints
        double w = (t - times_[j - 1]) / (times_[j] - times_[j - 1]);
        return (1.0 - w) * values_[j - 1] + w * values_[j];
    }

    /// Slope of the segment containing t, right-open convention: the slope
    /// at a breakpoint belongs to the segment to its right.
    Vec slope_at(double t) const {
        std::size_t j = segment_of(t);
        return (values_[j + 1] - values_[j]) / (times_[j + 1] - times_[j]);
    }

    std::size_t segment_of(double t) const {
        if (t < 0.0 || t > horizon()) throw std::out_of_range("Path: t outside [0, T]");
        auto it = std::upper_bound(times_.begin(), times_.end(), t);
        std::size_t j = static_cast<std::size_t>(it - times_.begin());
        if (j == 0) return 0;
        if (j >= times_.size()) return times_.size() - 2;  // t == T
        return j - 1;
    }

private:
    std::vector<double> times_;
    std::vector<Vec> values_;
};

/// sup_t ||a(t) - b(t)|| over the union of both breakpoint sets. The
/// difference of two piecewise-linear paths is piecewise linear, so its
/// supremum is attained at a union breakpoint.
inline double deviation_sup(const Path& a, const Path& b) {
    const double tol = 1e-9 * std::max(1.0, std::max(a.horizon(), b.horizon()));
    if (std::abs(a.horizon() - b.horizon()) > tol)
        throw std::invalid_argument("deviation_sup: horizon mismatch");
    double best = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.breakpoints() || j < b.breakpoints()) {
        double t;
        if (i >= a.breakpoints())
            t = b.time(j++);
        else if (j >= b.breakpoints())
            t = a.time(i++);
        else {
            double ta = a.time(i), tb = b.time(j);
            if (ta <= tb) {
                t = ta;
                ++i;
                if (tb == ta) ++j;
            } else {
                t = tb;
                ++j;
            }
        }
        t = std::min(t, std::min(a.horizon(), b.horizon()));
        best = std::max(best, (a.at(t) - b.at(t)).norm());
    }
    return best;
}

}  // namespace sald
