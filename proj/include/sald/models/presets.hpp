#pragma once

#include <cmath>
#include <memory>
#include <utility>
#include <vector>

#include "sald/models/sgd.hpp"
#include "sald/model.hpp"
#include "sald/types.hpp"

namespace sald {

/// i.i.d. kernel: every row equals q. g defaults to the noise coordinate.
inline SAModel iid_model(const Vec& q, Mat g_values, Vec x0) {
    const int s = static_cast<int>(q.size());
    SAModel m;
    m.name = "iid";
    m.d1 = static_cast<int>(g_values.cols());
    m.space = FiniteNoiseSpace::indexed(s);
    Mat rho(s, s);
    for (int y = 0; y < s; ++y) rho.row(y) = q.transpose();
    m.kernel = StateKernel::fixed(rho);
    m.g = [g_values](const Vec&, int z) { return Vec(g_values.row(z).transpose()); };
    m.x0 = std::move(x0);
    return m;
}

/// Bernoulli(p) coin with g(x, z) = z - center: the workhorse scalar demo.
inline SAModel bernoulli_model(double p = 0.5, double center = 0.0, double x0 = 0.0) {
    Mat g(2, 1);
    g << 0.0 - center, 1.0 - center;
    Vec q(2);
    q << 1.0 - p, p;
    SAModel m = iid_model(q, g, scalar_vec(x0));
    m.name = "bernoulli";
    return m;
}

/// Two-state chain rho = [[1-a, a], [b, 1-b]] with g(x, z) = z.
inline SAModel two_state_model(double a = 0.3, double b = 0.6, double x0 = 0.0) {
    Mat rho(2, 2);
    rho << 1.0 - a, a, b, 1.0 - b;
    SAModel m;
    m.name = "two_state";
    m.d1 = 1;
    m.space = FiniteNoiseSpace::indexed(2);
    m.kernel = StateKernel::fixed(rho);
    m.g = [](const Vec&, int z) { return scalar_vec(static_cast<double>(z)); };
    m.x0 = scalar_vec(x0);
    return m;
}

/// Mean-reverting demo: Bernoulli(1/2) noise with g(x, z) = (z - 1/2) - x,
/// so the limit ODE is xdot = -x.
inline SAModel ou_bernoulli_model(double x0 = 1.0) {
    SAModel m;
    m.name = "ou_bernoulli";
    m.d1 = 1;
    m.space = FiniteNoiseSpace::indexed(2);
    m.kernel = StateKernel::fixed(Mat::Constant(2, 2, 0.5));
    m.g = [](const Vec& x, int z) { return scalar_vec(static_cast<double>(z) - 0.5 - x[0]); };
    m.x0 = scalar_vec(x0);
    return m;
}

/// x-dependent kernel rho_x = (1-s(x)) A + s(x) B with s = sigm(mean(x)):
/// a smooth state-dependent family for exercising the (x, beta) machinery.
inline SAModel blend_model(Mat A, Mat B, Mat g_values, Vec x0) {
    const int s = static_cast<int>(A.rows());
    SAModel m;
    m.name = "blend";
    m.d1 = static_cast<int>(g_values.cols());
    m.space = FiniteNoiseSpace::indexed(s);
    auto a = std::make_shared<Mat>(std::move(A));
    auto b = std::make_shared<Mat>(std::move(B));
    m.kernel = StateKernel(
        s,
        [a, b](const Vec& x) {
            const double w = sigm(x.mean());
            return Mat((1.0 - w) * (*a) + w * (*b));
        },
        true, 0.0);
    m.g = [g_values](const Vec&, int z) { return Vec(g_values.row(z).transpose()); };
    m.x0 = std::move(x0);
    return m;
}

/// Additive-Gaussian model g(x, y) = b(x) + y with closed-form Hamiltonian
/// H(x, alpha) = <alpha, b(x)> + sigma^2 ||alpha||^2 / 2: a continuous-noise
/// plugin with no finite kernel, usable by the rate machinery only.
inline SAModel gaussian_additive_model(std::function<Vec(const Vec&)> drift, double sigma, Vec x0) {
    SAModel m;
    m.name = "gaussian_additive";
    m.d1 = static_cast<int>(x0.size());
    m.x0 = std::move(x0);
    auto b = std::move(drift);
    const double s2 = sigma * sigma;
    m.hamiltonian_override = [b, s2](const Vec& x, const Vec& alpha) {
        return alpha.dot(b(x)) + 0.5 * s2 * alpha.squaredNorm();
    };
    m.hamiltonian_grad_override = [b, s2](const Vec& x, const Vec& alpha) {
        return Vec(b(x) + s2 * alpha);
    };
    m.g = [b](const Vec& x, int) { return b(x); };
    return m;
}

}  // namespace sald
