#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "sald/model.hpp"
#include "sald/types.hpp"

namespace sald {

/// Wang-Landau setup: d strata with nonnegative weight functions f_i on
/// finite sets, flattened into one union space of (stratum, point) pairs.
/// The algorithm estimates the normalized masses x(i) = sum_y f_i(y) / Z.
struct WangLandauSpec {
    std::vector<std::vector<double>> f;  // f[i][y] over stratum i's points

    int strata() const { return static_cast<int>(f.size()); }

    int union_size() const {
        int s = 0;
        for (const auto& fi : f) s += static_cast<int>(fi.size());
        return s;
    }

    void validate() const {
        if (strata() < 1) throw ConfigError("wang_landau: need at least one stratum");
        for (const auto& fi : f) {
            if (fi.empty()) throw ConfigError("wang_landau: empty stratum");
            double mass = 0.0;
            for (double v : fi) {
                if (v < 0.0) throw ConfigError("wang_landau: negative weight");
                mass += v;
            }
            if (!(mass > 0.0)) throw ConfigError("wang_landau: zero-weight stratum");
        }
    }

    int stratum_of(int flat) const {
        for (int i = 0; i < strata(); ++i) {
            if (flat < static_cast<int>(f[i].size())) return i;
            flat -= static_cast<int>(f[i].size());
        }
        throw std::out_of_range("wang_landau: flat index out of range");
    }

    double weight_of(int flat) const {
        for (const auto& fi : f) {
            if (flat < static_cast<int>(fi.size())) return fi[static_cast<std::size_t>(flat)];
            flat -= static_cast<int>(fi.size());
        }
        throw std::out_of_range("wang_landau: flat index out of range");
    }

    /// True normalizers x(i) = sum_y f_i(y) / Z, by enumeration.
    Vec true_x() const {
        Vec x(strata());
        for (int i = 0; i < strata(); ++i) {
            double m = 0.0;
            for (double v : f[static_cast<std::size_t>(i)]) m += v;
            x[i] = m;
        }
        return x / x.sum();
    }
};

/// The Wang-Landau recursion as a stochastic approximation over the union
/// space. The noise kernel is a Metropolis chain with uniform global
/// proposal and invariant density pi_x(y, i) ~ f_i(y)/x(i); the iterate
/// update is the multiplicative reweighting
///   phi_{k+1}(i) = phi_k(i) (1 + eps 1{I_{k+1} = i}),  x = phi / sum(phi),
/// which is scale free and therefore a function of the normalized x alone.
/// The increment map g(x, (z,j)) = x(j) e_j is what enters the rate
/// machinery.
inline SAModel wang_landau_model(const WangLandauSpec& spec) {
    spec.validate();
    const int S = spec.union_size();
    const int d = spec.strata();

    SAModel model;
    model.name = "wang_landau";
    model.d1 = d;
    model.space = FiniteNoiseSpace::indexed(S);

    std::vector<int> stratum(S);
    std::vector<double> weight(S);
    for (int z = 0; z < S; ++z) {
        stratum[static_cast<std::size_t>(z)] = spec.stratum_of(z);
        weight[static_cast<std::size_t>(z)] = spec.weight_of(z);
    }

    model.kernel = StateKernel(
        S,
        [S, stratum, weight](const Vec& x) {
            // pi(z) ~ f(z) / x(stratum(z)); zero-weight points are never
            // accepted and never left, so give them a self-loop row
            std::vector<double> pi(static_cast<std::size_t>(S));
            for (int z = 0; z < S; ++z) {
                const double xs = std::max(x[stratum[static_cast<std::size_t>(z)]], 1e-300);
                pi[static_cast<std::size_t>(z)] = weight[static_cast<std::size_t>(z)] / xs;
            }
            Mat rho = Mat::Zero(S, S);
            for (int y = 0; y < S; ++y) {
                if (pi[static_cast<std::size_t>(y)] <= 0.0) {
                    rho(y, y) = 1.0;
                    continue;
                }
                double stay = 0.0;
                for (int z = 0; z < S; ++z) {
                    if (z == y) continue;
                    const double acc =
                        std::min(1.0, pi[static_cast<std::size_t>(z)] / pi[static_cast<std::size_t>(y)]);
                    rho(y, z) = acc / S;
                    stay += (1.0 - acc) / S;
                }
                rho(y, y) = stay + 1.0 / S;  // self-proposal plus rejected mass
            }
            return rho;
        },
        true, 0.0);

    model.g = [stratum, d](const Vec& x, int z) {
        Vec out = Vec::Zero(d);
        const int j = stratum[static_cast<std::size_t>(z)];
        out[j] = x[j];
        return out;
    };

    model.update = [stratum, d](const Vec& x, double eps, int z) {
        Vec phi = x;
        const int j = stratum[static_cast<std::size_t>(z)];
        phi[j] *= (1.0 + eps);
        return Vec(phi / phi.sum());
    };

    model.x0 = Vec::Constant(d, 1.0 / d);
    model.y0 = 0;
    return model;
}

/// Free-energy differences F(omega_i) - F(omega_1) = -log(x(i)/x(1)) from a
/// final weight vector.
inline Vec wl_free_energy_differences(const Vec& x_final) {
    Vec out(x_final.size());
    for (Eigen::Index i = 0; i < x_final.size(); ++i) {
        if (!(x_final[i] > 0.0))
            throw NumericalError("wl_free_energy_differences: zero weight entry");
        out[i] = -std::log(x_final[i] / x_final[0]);
    }
    return out;
}

// ---- bundled Wang-Landau instances ----------------------------------------

/// Two strata with identical total weight: the weights must converge to
/// (1/2, 1/2) by symmetry.
inline WangLandauSpec wl_two_stratum_symmetric() {
    WangLandauSpec spec;
    spec.f = {{1.0, 1.0}, {1.0, 1.0}};
    return spec;
}

/// Multicanonical Monte Carlo on a 4-site +-1 spin chain with energy
/// E(s) = -sum s_k s_{k+1}: strata are the energy levels {-3,-1,1,3} and
/// the stratum weights are the Gibbs factors exp(-E), so the target masses
/// are the Gibbs probabilities of the levels.
inline WangLandauSpec wl_multicanonical_ising4() {
    const int n = 4;
    std::vector<double> levels = {-3.0, -1.0, 1.0, 3.0};
    WangLandauSpec spec;
    spec.f.resize(levels.size());
    for (int cfg = 0; cfg < (1 << n); ++cfg) {
        double e = 0.0;
        for (int k = 0; k + 1 < n; ++k) {
            const int a = (cfg >> k) & 1 ? 1 : -1;
            const int b = (cfg >> (k + 1)) & 1 ? 1 : -1;
            e -= a * b;
        }
        for (std::size_t i = 0; i < levels.size(); ++i)
            if (e == levels[i]) spec.f[i].push_back(std::exp(-e));
    }
    return spec;
}

/// Free-energy-difference estimation for a 3-site +-1 spin chain at two
/// temperatures: stratum i holds the full configuration space weighted by
/// exp(-beta_i E0), so -log(x2/x1) is the free-energy difference.
inline WangLandauSpec wl_free_energy_3site(double beta1 = 0.5, double beta2 = 1.5) {
    const int n = 3;
    WangLandauSpec spec;
    spec.f.resize(2);
    for (int cfg = 0; cfg < (1 << n); ++cfg) {
        double e0 = 0.0;
        for (int k = 0; k + 1 < n; ++k) {
            const int a = (cfg >> k) & 1 ? 1 : -1;
            const int b = (cfg >> (k + 1)) & 1 ? 1 : -1;
            e0 -= a * b;
        }
        spec.f[0].push_back(std::exp(-beta1 * e0));
        spec.f[1].push_back(std::exp(-beta2 * e0));
    }
    return spec;
}

}  // namespace sald
