#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sald/types.hpp"

namespace sald {

/// Finite noise state space. Points are indexed 0..size-1; `coords` embeds
/// them in R^{d2} (defaults to the index on the line) and is what the
/// exponential-moment audit integrates against.
struct FiniteNoiseSpace {
    int size = 0;
    std::vector<std::string> labels;  // empty or one per point
    Mat coords;                       // size x d2

    static FiniteNoiseSpace indexed(int s) {
        FiniteNoiseSpace sp;
        sp.size = s;
        sp.coords = Mat(s, 1);
        for (int i = 0; i < s; ++i) sp.coords(i, 0) = static_cast<double>(i);
        return sp;
    }

    int d2() const { return static_cast<int>(coords.cols()); }
};

namespace detail {

inline void validate_row_stochastic(const Mat& rho, double tol = 1e-12) {
    if (rho.rows() != rho.cols())
        throw std::invalid_argument("kernel matrix must be square");
    for (Eigen::Index y = 0; y < rho.rows(); ++y) {
        double sum = 0.0;
        for (Eigen::Index z = 0; z < rho.cols(); ++z) {
            if (rho(y, z) < -tol)
                throw std::invalid_argument("kernel matrix has a negative entry at row " +
                                            std::to_string(y));
            sum += rho(y, z);
        }
        if (std::abs(sum - 1.0) > 1e3 * tol * rho.cols() + tol)
            throw std::invalid_argument("kernel row " + std::to_string(y) +
                                        " does not sum to 1 (sum = " + std::to_string(sum) + ")");
    }
}

// Boolean square matrix with bit-packed rows; enough for support graphs.
class BoolMat {
public:
    explicit BoolMat(int n) : n_(n), words_((n + 63) / 64), bits_(static_cast<std::size_t>(n) * words_, 0) {}

    static BoolMat support(const Mat& m, double tol = 0.0) {
        BoolMat b(static_cast<int>(m.rows()));
        for (int i = 0; i < b.n_; ++i)
            for (int j = 0; j < b.n_; ++j)
                if (m(i, j) > tol) b.set(i, j);
        return b;
    }

    void set(int i, int j) { bits_[row(i) + j / 64] |= (1ULL << (j % 64)); }
    bool get(int i, int j) const { return (bits_[row(i) + j / 64] >> (j % 64)) & 1ULL; }

    bool all_ones() const {
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j)
                if (!get(i, j)) return false;
        return true;
    }

    BoolMat multiply(const BoolMat& o) const {
        BoolMat out(n_);
        for (int i = 0; i < n_; ++i) {
            for (int k = 0; k < n_; ++k) {
                if (!get(i, k)) continue;
                for (int w = 0; w < words_; ++w)
                    out.bits_[out.row(i) + w] |= o.bits_[o.row(k) + w];
            }
        }
        return out;
    }

    int size() const { return n_; }

private:
    std::size_t row(int i) const { return static_cast<std::size_t>(i) * words_; }
    int n_;
    int words_;
    std::vector<std::uint64_t> bits_;
};

// Reachability closure (paths of length >= 1).
inline BoolMat reach_closure(const BoolMat& b) {
    BoolMat r = b;
    for (int n = b.size(), steps = 1; steps < n; steps *= 2) {
        BoolMat sq = r.multiply(r);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (sq.get(i, j)) r.set(i, j);
    }
    return r;
}

inline std::optional<std::pair<int, int>> unreachable_pair(const BoolMat& b) {
    BoolMat r = reach_closure(b);
    for (int i = 0; i < b.size(); ++i)
        for (int j = 0; j < b.size(); ++j)
            if (!r.get(i, j)) return std::make_pair(i, j);
    return std::nullopt;
}

// Smallest k with (support)^k strictly positive, or nullopt if the matrix
// is not primitive. Uses the Wielandt bound (S-1)^2 + 1 and the fact that
// positivity of powers is upward-closed for irreducible matrices.
inline std::optional<int> primitivity_index(const BoolMat& b) {
    const int n = b.size();
    if (n == 1) return b.get(0, 0) ? std::optional<int>(1) : std::nullopt;
    const long bound = static_cast<long>(n - 1) * (n - 1) + 1;
    if (unreachable_pair(b)) return std::nullopt;
    // dyadic scan up, then binary search down
    std::vector<BoolMat> pows;  // b^(2^j)
    pows.push_back(b);
    long k = 1;
    while (!pows.back().all_ones()) {
        if (k > bound) return std::nullopt;  // irreducible but periodic
        pows.push_back(pows.back().multiply(pows.back()));
        k *= 2;
    }
    // positive at k = 2^(pows.size()-1); find the smallest positive power
    long lo = k / 2 + 1, hi = k;
    while (lo < hi) {
        long mid = lo + (hi - lo) / 2;
        // build b^mid from the dyadic ladder
        BoolMat acc(n);
        bool started = false;
        long rem = mid;
        for (std::size_t j = 0; j < pows.size() && rem > 0; ++j) {
            if (rem & 1) {
                acc = started ? acc.multiply(pows[j]) : pows[j];
                started = true;
            }
            rem >>= 1;
        }
        if (acc.all_ones())
            hi = mid;
        else
            lo = mid + 1;
    }
    return static_cast<int>(lo);
}

}  // namespace detail

/// State-dependent transition kernel family x -> rho_x on a finite noise
/// space: a deterministic evaluator producing a row-stochastic S x S matrix
/// (rows = current point y, columns = next point z). Entries are the
/// densities eta_x(y,z) against counting measure.
class StateKernel {
public:
    using MatrixFn = std::function<Mat(const Vec&)>;

    StateKernel() = default;

    StateKernel(int size, MatrixFn fn, bool x_dependent = true, double rebuild_radius = 0.0)
        : size_(size), fn_(std::move(fn)), x_dependent_(x_dependent), radius_(rebuild_radius) {
        if (size_ <= 0) throw std::invalid_argument("kernel size must be >= 1");
    }

    /// x-independent kernel from an explicit matrix.
    static StateKernel fixed(Mat rho) {
        detail::validate_row_stochastic(rho);
        int s = static_cast<int>(rho.rows());
        auto m = std::make_shared<Mat>(std::move(rho));
        return StateKernel(s, [m](const Vec&) { return *m; }, false);
    }

    int size() const { return size_; }
    bool x_dependent() const { return x_dependent_; }

    /// Simulation may keep the last matrix while x stays within this radius
    /// of the point it was built at; rebuilds are always exact.
    double rebuild_radius() const { return radius_; }

    /// Row-stochastic matrix rho_x (validated).
    Mat matrix(const Vec& x) const {
        if (!fn_) throw std::logic_error("StateKernel: empty evaluator");
        Mat m = fn_(x);
        detail::validate_row_stochastic(m);
        return m;
    }

private:
    int size_ = 0;
    MatrixFn fn_;
    bool x_dependent_ = true;
    double radius_ = 0.0;
};

/// Invariant probability of a row-stochastic matrix, with the attained
/// stationarity residual ||pi^T rho - pi^T||_1.
struct InvariantMeasure {
    Vec pi;
    double residual = 0.0;
    int iterations = 0;
};

/// k-step transition matrix rho^k (k >= 1).
inline Mat k_step(const Mat& rho, int k) {
    if (k < 1) throw std::invalid_argument("k_step: k must be >= 1");
    Mat acc = rho;
    for (int i = 1; i < k; ++i) acc = acc * rho;
    return acc;
}

inline Mat k_step(const StateKernel& kernel, const Vec& x, int k) {
    return k_step(kernel.matrix(x), k);
}

/// Unique invariant measure of a primitive row-stochastic matrix. Power
/// iteration with Cesaro averaging; dense linear solve of pi(rho - I) = 0,
/// sum(pi) = 1 used as a fallback (and as the fast path) for S <= 64.
/// Throws ErgodicityError when the chain is reducible or periodic.
inline InvariantMeasure invariant_measure(const Mat& rho, double tol = 1e-10,
                                          int max_iter = 200000) {
    detail::validate_row_stochastic(rho);
    const int s = static_cast<int>(rho.rows());
    auto support = detail::BoolMat::support(rho);
    if (auto bad = detail::unreachable_pair(support))
        throw ErgodicityError("invariant_measure: state " + std::to_string(bad->second) +
                              " unreachable from state " + std::to_string(bad->first));
    if (!detail::primitivity_index(support))
        throw ErgodicityError("invariant_measure: chain is periodic");

    auto residual_of = [&](const Vec& pi) {
        return (rho.transpose() * pi - pi).lpNorm<1>();
    };

    InvariantMeasure out;
    if (s <= 64) {
        // pi^T (rho - I) = 0 with the normalization row appended
        Mat a = (rho.transpose() - Mat::Identity(s, s));
        Mat sys(s + 1, s);
        sys.topRows(s) = a;
        sys.bottomRows(1) = Mat::Ones(1, s);
        Vec rhs = Vec::Zero(s + 1);
        rhs[s] = 1.0;
        Vec pi = sys.colPivHouseholderQr().solve(rhs);
        pi = pi.cwiseMax(0.0);
        pi /= pi.sum();
        out.pi = pi;
        out.residual = residual_of(pi);
        out.iterations = 0;
        if (out.residual <= tol) return out;
    }

    // power iteration on rho^T with Cesaro averaging
    Vec v = Vec::Constant(s, 1.0 / s);
    Vec cesaro = v;
    int it = 0;
    for (; it < max_iter; ++it) {
        Vec w = rho.transpose() * v;
        w /= w.sum();
        cesaro = (cesaro * (it + 1) + w) / (it + 2);
        if (residual_of(w) <= tol) {
            out.pi = w;
            out.residual = residual_of(w);
            out.iterations = it + 1;
            return out;
        }
        if ((it + 1) % 64 == 0 && residual_of(cesaro) <= tol) {
            out.pi = cesaro;
            out.residual = residual_of(cesaro);
            out.iterations = it + 1;
            return out;
        }
        v = w;
    }
    throw NumericalError("invariant_measure: no convergence to tol within max iterations");
}

inline InvariantMeasure invariant_measure(const StateKernel& kernel, const Vec& x,
                                          double tol = 1e-10) {
    return invariant_measure(kernel.matrix(x), tol);
}

}  // namespace sald
