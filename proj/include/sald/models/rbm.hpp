#pragma once

#include <cmath>
#include <vector>

#include "sald/models/sgd.hpp"  // sigm
#include "sald/model.hpp"
#include "sald/types.hpp"

namespace sald {

/// Restricted Boltzmann machine with binary visibles/hiddens and energy
/// E(v,h) = -v^T W h - v^T b_v - h^T b_h. Parameters pack into
/// x = [vec(W) row-major; b_v; b_h]. The joint state space must stay within
/// d_v + d_h <= 12 so every "intractable" expectation has an enumeration
/// oracle.
struct RBMSpec {
    int d_v = 0;
    int d_h = 0;
    Mat W;        // d_v x d_h
    Vec b_v;      // d_v
    Vec b_h;      // d_h
    Mat samples;  // M x d_v observed visibles (0/1 entries)

    int param_dim() const { return d_v * d_h + d_v + d_h; }
    int state_count() const { return 1 << (d_v + d_h); }

    void validate() const {
        if (d_v < 1 || d_h < 1) throw ConfigError("rbm: need d_v, d_h >= 1");
        if (d_v + d_h > 12)
            throw ConfigError("rbm: d_v + d_h exceeds the enumeration bound of 12");
        if (W.rows() != d_v || W.cols() != d_h || b_v.size() != d_v || b_h.size() != d_h)
            throw ConfigError("rbm: parameter shape mismatch");
        if (samples.rows() < 1 || samples.cols() != d_v)
            throw ConfigError("rbm: need at least one d_v-dimensional sample");
    }

    Vec pack() const {
        Vec x(param_dim());
        int k = 0;
        for (int i = 0; i < d_v; ++i)
            for (int j = 0; j < d_h; ++j) x[k++] = W(i, j);
        for (int i = 0; i < d_v; ++i) x[k++] = b_v[i];
        for (int j = 0; j < d_h; ++j) x[k++] = b_h[j];
        return x;
    }
};

namespace rbm_detail {

struct Params {
    Mat W;
    Vec b_v, b_h;
};

inline Params unpack(const RBMSpec& spec, const Vec& x) {
    Params p;
    p.W = Mat(spec.d_v, spec.d_h);
    p.b_v = Vec(spec.d_v);
    p.b_h = Vec(spec.d_h);
    int k = 0;
    for (int i = 0; i < spec.d_v; ++i)
        for (int j = 0; j < spec.d_h; ++j) p.W(i, j) = x[k++];
    for (int i = 0; i < spec.d_v; ++i) p.b_v[i] = x[k++];
    for (int j = 0; j < spec.d_h; ++j) p.b_h[j] = x[k++];
    return p;
}

// state index = v bits | (h bits << d_v)
inline Vec v_of(const RBMSpec& s, int state) {
    Vec v(s.d_v);
    for (int i = 0; i < s.d_v; ++i) v[i] = (state >> i) & 1;
    return v;
}
inline Vec h_of(const RBMSpec& s, int state) {
    Vec h(s.d_h);
    for (int j = 0; j < s.d_h; ++j) h[j] = (state >> (s.d_v + j)) & 1;
    return h;
}

inline double energy(const Params& p, const Vec& v, const Vec& h) {
    return -v.dot(p.W * h) - v.dot(p.b_v) - h.dot(p.b_h);
}

// gradient of the energy in packed parameter order
inline Vec energy_grad(const RBMSpec& s, const Vec& v, const Vec& h) {
    Vec g(s.param_dim());
    int k = 0;
    for (int i = 0; i < s.d_v; ++i)
        for (int j = 0; j < s.d_h; ++j) g[k++] = -v[i] * h[j];
    for (int i = 0; i < s.d_v; ++i) g[k++] = -v[i];
    for (int j = 0; j < s.d_h; ++j) g[k++] = -h[j];
    return g;
}

// mean of energy_grad(v, .) under p(h | v): hidden units are conditionally
// independent Bernoulli(sigm(v^T W e_j + b_h[j]))
inline Vec positive_phase(const RBMSpec& s, const Params& p, const Vec& v) {
    Vec hbar(s.d_h);
    for (int j = 0; j < s.d_h; ++j) hbar[j] = sigm(v.dot(p.W.col(j)) + p.b_h[j]);
    return energy_grad(s, v, hbar);  // energy is bilinear in h
}

}  // namespace rbm_detail

/// p(h_j = 1 | v) for every hidden unit.
inline Vec rbm_hidden_probs(const RBMSpec& spec, const Vec& x, const Vec& v) {
    auto p = rbm_detail::unpack(spec, x);
    Vec out(spec.d_h);
    for (int j = 0; j < spec.d_h; ++j) out[j] = sigm(v.dot(p.W.col(j)) + p.b_h[j]);
    return out;
}

/// Exact Gibbs law p(v, h | x) over all 2^(d_v + d_h) states, by enumeration.
inline Vec rbm_gibbs_exact(const RBMSpec& spec, const Vec& x) {
    auto p = rbm_detail::unpack(spec, x);
    const int S = spec.state_count();
    Vec loge(S);
    for (int st = 0; st < S; ++st)
        loge[st] = -rbm_detail::energy(p, rbm_detail::v_of(spec, st), rbm_detail::h_of(spec, st));
    const double mx = loge.maxCoeff();
    Vec w = (loge.array() - mx).exp();
    return w / w.sum();
}

/// Averaged drift of the PCD recursion at x, i.e. the exact gradient of the
/// negative log-likelihood (positive phase minus the model expectation of
/// the energy gradient), by enumeration.
inline Vec rbm_exact_mean_update(const RBMSpec& spec, const Vec& x) {
    auto p = rbm_detail::unpack(spec, x);
    const int M = static_cast<int>(spec.samples.rows());
    Vec pos = Vec::Zero(spec.param_dim());
    for (int m = 0; m < M; ++m)
        pos += rbm_detail::positive_phase(spec, p, spec.samples.row(m).transpose());
    pos /= M;
    Vec gibbs = rbm_gibbs_exact(spec, x);
    Vec neg = Vec::Zero(spec.param_dim());
    for (int st = 0; st < spec.state_count(); ++st)
        neg += gibbs[st] *
               rbm_detail::energy_grad(spec, rbm_detail::v_of(spec, st), rbm_detail::h_of(spec, st));
    return pos - neg;
}

/// Persistent contrastive divergence as a stochastic approximation: the
/// noise space is the joint (v, h) configuration, the kernel is the exact
/// block-Gibbs sweep rho_x((v0,h0),(v1,h1)) = p(h1 | v0, x) p(v1 | h1, x),
/// and g(x, y) = (1/M) sum_m E_{p(h|v^m,x)}[grad E(v^m, h)] - grad E(y).
/// The kernel matrix is rebuilt whenever x moves past `rebuild_radius`
/// (rebuilds are exact; radius 0 rebuilds on any movement).
inline SAModel rbm_model(const RBMSpec& spec, double rebuild_radius = 0.0) {
    spec.validate();
    const int S = spec.state_count();
    SAModel model;
    model.name = "rbm_pcd";
    model.d1 = spec.param_dim();

    model.space.size = S;
    model.space.coords = Mat(S, spec.d_v + spec.d_h);
    for (int st = 0; st < S; ++st)
        for (int b = 0; b < spec.d_v + spec.d_h; ++b)
            model.space.coords(st, b) = (st >> b) & 1;

    RBMSpec s = spec;
    model.kernel = StateKernel(
        S,
        [s](const Vec& x) {
            auto p = rbm_detail::unpack(s, x);
            const int nv = 1 << s.d_v, nh = 1 << s.d_h;
            // p(h1 | v0) and p(v1 | h1) factor over units
            Mat PH(nv, nh), PV(nh, nv);
            for (int v = 0; v < nv; ++v) {
                Vec vv = rbm_detail::v_of(s, v);
                double acc;
                for (int h = 0; h < nh; ++h) {
                    acc = 1.0;
                    for (int j = 0; j < s.d_h; ++j) {
                        const double pj = sigm(vv.dot(p.W.col(j)) + p.b_h[j]);
                        acc *= ((h >> j) & 1) ? pj : 1.0 - pj;
                    }
                    PH(v, h) = acc;
                }
            }
            for (int h = 0; h < nh; ++h) {
                Vec hv = rbm_detail::h_of(s, h << s.d_v);
                for (int v = 0; v < nv; ++v) {
                    double acc = 1.0;
                    for (int i = 0; i < s.d_v; ++i) {
                        const double pi = sigm(p.W.row(i).dot(hv) + p.b_v[i]);
                        acc *= ((v >> i) & 1) ? pi : 1.0 - pi;
                    }
                    PV(h, v) = acc;
                }
            }
            const int S2 = s.state_count();
            Mat rho(S2, S2);
            for (int from = 0; from < S2; ++from) {
                const int v0 = from & ((1 << s.d_v) - 1);
                for (int to = 0; to < S2; ++to) {
                    const int v1 = to & ((1 << s.d_v) - 1);
                    const int h1 = to >> s.d_v;
                    rho(from, to) = PH(v0, h1) * PV(h1, v1);
                }
            }
            return rho;
        },
        true, rebuild_radius);

    model.g = [s](const Vec& x, int y) {
        auto p = rbm_detail::unpack(s, x);
        const int M = static_cast<int>(s.samples.rows());
        Vec pos = Vec::Zero(s.param_dim());
        for (int m = 0; m < M; ++m)
            pos += rbm_detail::positive_phase(s, p, s.samples.row(m).transpose());
        pos /= M;
        return Vec(pos - rbm_detail::energy_grad(s, rbm_detail::v_of(s, y), rbm_detail::h_of(s, y)));
    };

    model.x0 = spec.pack();
    model.y0 = 0;
    return model;
}

}  // namespace sald
