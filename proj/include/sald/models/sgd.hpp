#pragma once

#include <cmath>
#include <vector>

#include "sald/model.hpp"
#include "sald/types.hpp"

namespace sald {

inline double sigm(double t) { return 1.0 / (1.0 + std::exp(-t)); }

/// Logistic-regression data: row m of `features` is the feature vector
/// phi(xi_m), labels are in {-1, +1}.
struct LogisticDataset {
    Mat features;  // M x p
    Vec labels;    // entries +-1

    int count() const { return static_cast<int>(features.rows()); }
    int dim() const { return static_cast<int>(features.cols()); }

    void validate() const {
        if (count() < 1) throw ConfigError("logistic dataset needs at least one example");
        if (labels.size() != count()) throw ConfigError("logistic dataset: label count mismatch");
        for (int m = 0; m < count(); ++m)
            if (labels[m] != 1.0 && labels[m] != -1.0)
                throw ConfigError("logistic dataset: labels must be -1 or +1");
    }
};

/// Per-example gradient factor upsilon_m phi(xi_m) (1 - sigm(upsilon_m x^T phi(xi_m))).
inline Vec logistic_example_gradient(const LogisticDataset& d, const Vec& x, int m) {
    const double u = d.labels[m] * d.features.row(m).dot(x);
    return d.labels[m] * (1.0 - sigm(u)) * d.features.row(m).transpose();
}

/// SGD for the logistic log-likelihood as a stochastic approximation:
/// uniform i.i.d. index noise on {1..M} and update g(x, m) = -grad_m(x).
inline SAModel sgd_logistic_model(const LogisticDataset& d) {
    d.validate();
    const int M = d.count();
    SAModel model;
    model.name = "sgd_logistic";
    model.d1 = d.dim();
    model.space = FiniteNoiseSpace::indexed(M);
    model.kernel = StateKernel::fixed(Mat::Constant(M, M, 1.0 / M));
    LogisticDataset data = d;
    model.g = [data](const Vec& x, int m) { return Vec(-logistic_example_gradient(data, x, m)); };
    model.x0 = Vec::Zero(d.dim());
    model.y0 = 0;
    return model;
}

/// Closed-form Hamiltonian for the i.i.d. SGD noise:
///   Hbar(x, alpha) = log( (1/M) sum_m exp{ -<alpha, grad_m(x)> } ),
/// which the tilted-kernel Perron route must reproduce exactly (the tilted
/// matrix is rank one for i.i.d. rows).
inline double sgd_hamiltonian_closed(const LogisticDataset& d, const Vec& x, const Vec& alpha) {
    const int M = d.count();
    double shift = -std::numeric_limits<double>::infinity();
    std::vector<double> expo(static_cast<std::size_t>(M));
    for (int m = 0; m < M; ++m) {
        expo[static_cast<std::size_t>(m)] = -alpha.dot(logistic_example_gradient(d, x, m));
        shift = std::max(shift, expo[static_cast<std::size_t>(m)]);
    }
    double acc = 0.0;
    for (double e : expo) acc += std::exp(e - shift);
    return shift + std::log(acc / M);
}

}  // namespace sald
