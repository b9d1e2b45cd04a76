#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace sald {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = std::int64_t;

/// Malformed or inconsistent experiment configuration.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// A numerical routine failed to reach its requested tolerance.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// The Markov kernel is not ergodic (reducible or periodic) at the probed point.
class ErgodicityError : public NumericalError {
public:
    explicit ErgodicityError(const std::string& what) : NumericalError(what) {}
};

inline Vec make_vec(std::initializer_list<double> xs) {
    Vec v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v[i++] = x;
    return v;
}

inline Vec scalar_vec(double x) {
    Vec v(1);
    v[0] = x;
    return v;
}

}  // namespace sald
