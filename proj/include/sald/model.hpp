#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "sald/kernel.hpp"
#include "sald/types.hpp"

namespace sald {

/// A stochastic approximation model: the update map g, the noise kernel
/// family, dimensions and initial data. Defines the recursion
///   X_{k+1} = X_k + eps_{k+1} g(X_k, Y_{k+1}),   Y_{k+1} ~ rho_{X_k}(Y_k, .)
/// unless `update` overrides the Robbins-Monro increment (Wang-Landau's
/// multiplicative reweighting is the one bundled case).
struct SAModel {
    std::string name;
    int d1 = 0;
    FiniteNoiseSpace space;
    StateKernel kernel;
    std::function<Vec(const Vec&, int)> g;  // (x, noise index) -> R^{d1}
    Vec x0;
    int y0 = 0;

    /// Optional replacement for x + eps * g(x, z).
    std::function<Vec(const Vec&, double, int)> update;

    /// Optional closed-form Hamiltonian H(x, alpha) (must satisfy H(x,0)=0);
    /// lets continuous-noise models plug into the rate machinery without a
    /// finite kernel. Optional analytic gradient alongside.
    std::function<double(const Vec&, const Vec&)> hamiltonian_override;
    std::function<Vec(const Vec&, const Vec&)> hamiltonian_grad_override;

    bool has_kernel() const { return kernel.size() > 0; }

    Vec step(const Vec& x, double eps, int z) const {
        if (update) return update(x, eps, z);
        return x + eps * g(x, z);
    }

    /// All update vectors at a frozen x: row z is g(x, z)^T. (S x d1)
    Mat g_matrix(const Vec& x) const {
        Mat out(space.size, d1);
        for (int z = 0; z < space.size; ++z) out.row(z) = g(x, z).transpose();
        return out;
    }
};

/// One-step log moment generating function
///   Lambda(x, alpha, y) = log sum_z exp{<alpha, g(x,z)>} rho_x(y, z),
/// computed with a max shift so large alpha cannot overflow.
inline double one_step_log_mgf(const SAModel& m, const Vec& x, const Vec& alpha, int y) {
    const Mat rho = m.kernel.matrix(x);
    if (y < 0 || y >= m.space.size) throw std::out_of_range("one_step_log_mgf: bad y");
    double shift = -std::numeric_limits<double>::infinity();
    Vec expo(m.space.size);
    for (int z = 0; z < m.space.size; ++z) {
        expo[z] = alpha.dot(m.g(x, z));
        if (rho(y, z) > 0.0) shift = std::max(shift, expo[z]);
    }
    if (!std::isfinite(shift)) return -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (int z = 0; z < m.space.size; ++z)
        if (rho(y, z) > 0.0) sum += rho(y, z) * std::exp(expo[z] - shift);
    return shift + std::log(sum);
}

}  // namespace sald
