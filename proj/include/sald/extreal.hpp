#pragma once

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace sald {

/// Extended real value: a finite double or +infinity, tagged explicitly.
/// Rate functions take the value +infinity on legitimate inputs (absolute
/// continuity failure, infeasible velocity), so infinity is data here, not
/// an error and not a float sentinel.
class ExtReal {
public:
    ExtReal() = default;
    ExtReal(double v) : value_(v) {}  // implicit on purpose: finite values convert freely

    static ExtReal infinity() {
        ExtReal r;
        r.infinite_ = true;
        return r;
    }

    bool is_finite() const { return !infinite_; }
    bool is_infinite() const { return infinite_; }

    /// Finite value; throws if infinite.
    double value() const {
        if (infinite_) throw std::logic_error("ExtReal: value() on +infinity");
        return value_;
    }
    double value_or(double stand_in) const { return infinite_ ? stand_in : value_; }

    ExtReal& operator+=(const ExtReal& o) {
        if (o.infinite_) infinite_ = true;
        if (!infinite_) value_ += o.value_;
        return *this;
    }
    friend ExtReal operator+(ExtReal a, const ExtReal& b) { return a += b; }

    friend ExtReal operator*(double c, const ExtReal& x) {
        if (x.infinite_) return infinity();
        return ExtReal(c * x.value_);
    }

    friend bool operator==(const ExtReal& a, const ExtReal& b) {
        if (a.infinite_ || b.infinite_) return a.infinite_ == b.infinite_;
        return a.value_ == b.value_;
    }
    friend bool operator<(const ExtReal& a, const ExtReal& b) {
        if (a.infinite_) return false;
        if (b.infinite_) return true;
        return a.value_ < b.value_;
    }
    friend bool operator<=(const ExtReal& a, const ExtReal& b) { return a < b || a == b; }
    friend bool operator>(const ExtReal& a, const ExtReal& b) { return b < a; }
    friend bool operator>=(const ExtReal& a, const ExtReal& b) { return b <= a; }

    friend std::ostream& operator<<(std::ostream& os, const ExtReal& x) {
        if (x.infinite_) return os << "+inf";
        return os << x.value_;
    }

private:
    double value_ = 0.0;
    bool infinite_ = false;
};

}  // namespace sald
