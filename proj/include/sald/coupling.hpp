#pragma once

#include <cmath>
#include <iostream>
#include <limits>
#include <utility>
#include <vector>

#include "sald/extreal.hpp"
#include "sald/kernel.hpp"
#include "sald/model.hpp"
#include "sald/rate.hpp"
#include "sald/types.hpp"

namespace sald {

/// Joint law on pairs of noise points. Members of the admissible class
/// A(mu) have both marginals equal to mu.
struct Coupling {
    Mat gamma;

    Vec row_marginal() const { return gamma.rowwise().sum(); }
    Vec col_marginal() const { return gamma.colwise().sum().transpose(); }
    double marginal_gap() const { return (row_marginal() - col_marginal()).lpNorm<1>(); }
};

struct CouplingResult {
    ExtReal value;
    Mat gamma;                 // empty when infeasible
    double marginal_residual = 0.0;
    double mean_residual = 0.0;
    bool converged = false;
    int outer_iterations = 0;
    int newton_iterations = 0;
};

namespace detail {

// R(gamma || mu (x) rho) with mu = row marginal of gamma.
inline double pair_entropy(const Mat& gamma, const Mat& rho) {
    const Vec mu = gamma.rowwise().sum();
    double acc = 0.0;
    for (Eigen::Index a = 0; a < gamma.rows(); ++a)
        for (Eigen::Index b = 0; b < gamma.cols(); ++b) {
            const double g = gamma(a, b);
            if (g <= 0.0) continue;
            acc += g * std::log(g / (mu[a] * rho(a, b)));
        }
    return acc;
}

// Membership of beta in the convex hull of the rows of gvals (d1 <= 2).
inline bool in_velocity_hull(const Mat& gvals, const Vec& beta, double tol = 1e-12) {
    const int d = static_cast<int>(beta.size());
    if (d == 1) {
        const double lo = gvals.col(0).minCoeff();
        const double hi = gvals.col(0).maxCoeff();
        return beta[0] >= lo - tol && beta[0] <= hi + tol;
    }
    if (d == 2) {
        // beta is in the hull iff no line through beta has all points on one
        // strict side; test the support function over a directional sweep of
        // the exact edge normals.
        const int s = static_cast<int>(gvals.rows());
        for (int i = 0; i < s; ++i)
            for (int j = 0; j < s; ++j) {
                if (i == j) continue;
                const double ex = gvals(j, 0) - gvals(i, 0);
                const double ey = gvals(j, 1) - gvals(i, 1);
                const double nx = -ey, ny = ex;  // edge normal
                if (nx == 0.0 && ny == 0.0) continue;
                const double cb = nx * (beta[0] - gvals(i, 0)) + ny * (beta[1] - gvals(i, 1));
                bool all_other_side = true;
                double scale = 0.0;
                for (int k = 0; k < s && all_other_side; ++k) {
                    const double ck = nx * (gvals(k, 0) - gvals(i, 0)) + ny * (gvals(k, 1) - gvals(i, 1));
                    scale = std::max(scale, std::abs(ck));
                    if (ck * cb > tol * (1.0 + scale)) all_other_side = false;
                }
                if (all_other_side && std::abs(cb) > tol * (1.0 + scale)) return false;
            }
        return true;
    }
    return true;  // higher d1: rely on the solver's divergence detection
}

}  // namespace detail

/// Empirical-measure rate J_x(mu) = inf over couplings in A(mu) of
/// R(gamma || mu (x) rho_x): the classic minimum-relative-entropy coupling
/// with both marginals pinned to mu. Iterative proportional fitting on the
/// reference matrix diag(mu) rho, polished by Newton on the concave dual.
inline CouplingResult empirical_rate_J(const SAModel& m, const Vec& x, const Vec& mu,
                                       double tol = 1e-12) {
    const Mat rho = m.kernel.matrix(x);
    const int s = static_cast<int>(rho.rows());
    if (mu.size() != s) throw std::invalid_argument("empirical_rate_J: mu has wrong size");
    CouplingResult out;

    std::vector<int> sup;
    for (int a = 0; a < s; ++a)
        if (mu[a] > 0.0) sup.push_back(a);
    const int ns = static_cast<int>(sup.size());

    // log reference on the support block; -inf marks structural zeros
    Mat lM(ns, ns);
    for (int i = 0; i < ns; ++i)
        for (int j = 0; j < ns; ++j)
            lM(i, j) = rho(sup[i], sup[j]) > 0.0
                           ? std::log(mu[sup[i]]) + std::log(rho(sup[i], sup[j]))
                           : -std::numeric_limits<double>::infinity();
    // a row of mu-support with no admissible transition kills feasibility
    for (int i = 0; i < ns; ++i)
        if (!(lM.row(i).maxCoeff() > -std::numeric_limits<double>::infinity())) {
            out.value = ExtReal::infinity();
            out.converged = true;
            return out;
        }

    Vec lmu(ns);
    for (int i = 0; i < ns; ++i) lmu[i] = std::log(mu[sup[i]]);

    Vec lam = Vec::Zero(ns), kap = Vec::Zero(ns);
    auto gamma_of = [&](const Vec& l, const Vec& k) {
        Mat g(ns, ns);
        for (int i = 0; i < ns; ++i)
            for (int j = 0; j < ns; ++j)
                g(i, j) = std::isfinite(lM(i, j)) ? std::exp(lM(i, j) + l[i] + k[j]) : 0.0;
        return g;
    };

    // IPF sweeps (log domain)
    int it = 0;
    const int max_ipf = 50000;
    double gap = std::numeric_limits<double>::infinity();
    for (; it < max_ipf; ++it) {
        for (int i = 0; i < ns; ++i) {
            std::vector<double> terms;
            terms.reserve(ns);
            for (int j = 0; j < ns; ++j)
                if (std::isfinite(lM(i, j))) terms.push_back(lM(i, j) + kap[j]);
            lam[i] = lmu[i] - detail::logsumexp(terms);
        }
        for (int j = 0; j < ns; ++j) {
            std::vector<double> terms;
            terms.reserve(ns);
            for (int i = 0; i < ns; ++i)
                if (std::isfinite(lM(i, j))) terms.push_back(lM(i, j) + lam[i]);
            kap[j] = lmu[j] - detail::logsumexp(terms);
        }
        if (lam.cwiseAbs().maxCoeff() > 500.0 || kap.cwiseAbs().maxCoeff() > 500.0) {
            out.value = ExtReal::infinity();  // scalings exploding: no feasible coupling
            out.converged = true;
            return out;
        }
        Mat g = gamma_of(lam, kap);
        Vec r = g.rowwise().sum(), c = g.colwise().sum().transpose();
        gap = 0.0;
        for (int i = 0; i < ns; ++i)
            gap += std::abs(r[i] - std::exp(lmu[i])) + std::abs(c[i] - std::exp(lmu[i]));
        if (gap <= 1e-3 * tol || (it > 200 && gap < 1e-8)) break;
    }

    // Newton polish on the dual of the fixed-marginal program
    int newton_its = 0;
    for (; newton_its < 60; ++newton_its) {
        Mat g = gamma_of(lam, kap);
        Vec r = g.rowwise().sum(), c = g.colwise().sum().transpose();
        Vec grad(2 * ns);
        for (int i = 0; i < ns; ++i) {
            grad[i] = std::exp(lmu[i]) - r[i];
            grad[ns + i] = std::exp(lmu[i]) - c[i];
        }
        if (grad.lpNorm<1>() <= tol) break;
        Mat hess = Mat::Zero(2 * ns, 2 * ns);
        hess.topLeftCorner(ns, ns) = Mat(r.asDiagonal());
        hess.bottomRightCorner(ns, ns) = Mat(c.asDiagonal());
        hess.topRightCorner(ns, ns) = g;
        hess.bottomLeftCorner(ns, ns) = g.transpose();
        hess += 1e-14 * Mat::Identity(2 * ns, 2 * ns);  // gauge direction
        Vec step = hess.ldlt().solve(grad);
        double t = 1.0;
        auto dual = [&](const Vec& l, const Vec& k) {
            double lin = 0.0, mass = 0.0;
            for (int i = 0; i < ns; ++i) lin += std::exp(lmu[i]) * (l[i] + k[i]);
            Mat gg = gamma_of(l, k);
            mass = gg.sum();
            return lin - mass;
        };
        const double f0 = dual(lam, kap);
        for (int ls = 0; ls < 50; ++ls) {
            Vec l2 = lam + t * step.head(ns), k2 = kap + t * step.tail(ns);
            if (dual(l2, k2) >= f0) {
                lam = l2;
                kap = k2;
                break;
            }
            t *= 0.5;
        }
    }

    Mat g = gamma_of(lam, kap);
    // renormalize the tiny slack into an exact probability matrix
    g /= g.sum();
    Mat full = Mat::Zero(s, s);
    for (int i = 0; i < ns; ++i)
        for (int j = 0; j < ns; ++j) full(sup[i], sup[j]) = g(i, j);

    out.gamma = full;
    Vec r = full.rowwise().sum(), c = full.colwise().sum().transpose();
    out.marginal_residual = (r - mu).lpNorm<1>() + (c - mu).lpNorm<1>();
    // value against the pinned mu
    double acc = 0.0;
    for (int a = 0; a < s; ++a)
        for (int b = 0; b < s; ++b) {
            if (full(a, b) <= 0.0) continue;
            acc += full(a, b) * std::log(full(a, b) / (mu[a] * rho(a, b)));
        }
    out.value = acc;
    out.converged = out.marginal_residual <= 1e-8;
    out.outer_iterations = it;
    out.newton_iterations = newton_its;
    return out;
}

/// Donsker-Varadhan rate sup_{u > 0} int log(u / rho_x u) dmu, maximized
/// over log-parameterized u by damped Newton. Returns the attained value
/// (box-capped at |log u| <= 45, which resolves suprema attained only in
/// the limit of vanishing components).
inline double dv_rate(const SAModel& m, const Vec& x, const Vec& mu, double tol = 1e-12) {
    const Mat rho = m.kernel.matrix(x);
    const int s = static_cast<int>(rho.rows());
    if (mu.size() != s) throw std::invalid_argument("dv_rate: mu has wrong size");
    const double cap = 45.0;

    Vec w = Vec::Zero(s);
    auto value = [&](const Vec& wv) {
        double acc = 0.0;
        for (int y = 0; y < s; ++y) {
            if (mu[y] == 0.0) continue;
            std::vector<double> terms;
            terms.reserve(s);
            for (int z = 0; z < s; ++z)
                if (rho(y, z) > 0.0) terms.push_back(std::log(rho(y, z)) + wv[z]);
            acc += mu[y] * (wv[y] - detail::logsumexp(terms));
        }
        return acc;
    };

    double f = value(w);
    for (int it = 0; it < 500; ++it) {
        // softmax rows of the w-tilted kernel
        Mat p = Mat::Zero(s, s);
        for (int y = 0; y < s; ++y) {
            double mx = -std::numeric_limits<double>::infinity();
            for (int z = 0; z < s; ++z)
                if (rho(y, z) > 0.0) mx = std::max(mx, std::log(rho(y, z)) + w[z]);
            double norm = 0.0;
            for (int z = 0; z < s; ++z)
                if (rho(y, z) > 0.0) {
                    p(y, z) = std::exp(std::log(rho(y, z)) + w[z] - mx);
                    norm += p(y, z);
                }
            p.row(y) /= norm;
        }
        Vec grad = mu - p.transpose() * mu;
        const bool interior_done = grad.cwiseAbs().maxCoeff() <= tol;
        // projected optimality at the box: negative gradient pushes past -cap
        bool boxed_done = true;
        for (int z = 0; z < s; ++z) {
            const bool at_wall = w[z] <= -cap + 1e-9;
            if (!(std::abs(grad[z]) <= tol || (at_wall && grad[z] < 0.0))) boxed_done = false;
        }
        if (interior_done || boxed_done) break;

        Mat hess = Mat::Zero(s, s);
        for (int y = 0; y < s; ++y) {
            if (mu[y] == 0.0) continue;
            for (int a = 0; a < s; ++a) {
                hess(a, a) -= mu[y] * p(y, a);
                for (int b = 0; b < s; ++b) hess(a, b) += mu[y] * p(y, a) * p(y, b);
            }
        }
        hess -= 1e-12 * Mat::Identity(s, s);  // gauge direction regularizer
        Vec step = (-hess).ldlt().solve(grad);
        double t = 1.0;
        bool moved = false;
        for (int ls = 0; ls < 60; ++ls) {
            Vec w2 = (w + t * step).cwiseMax(-cap).cwiseMin(cap);
            w2.array() -= w2.mean();  // fix the gauge
            w2 = w2.cwiseMax(-cap).cwiseMin(cap);
            const double f2 = value(w2);
            if (f2 > f) {
                w = w2;
                f = f2;
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if (!moved) break;
    }
    return f;
}

/// Direct convex-program oracle for the local rate
///   L(x, beta) = inf { R(gamma || mu (x) rho_x) : gamma in A(mu),
///                      sum_z g(x,z) mu(z) = beta },
/// solved primal-side: entropic mirror descent on gamma under an augmented
/// Lagrangian for the marginal-equality and mean constraints, then polished
/// by damped Newton on the KKT system. Independent of the Legendre-transform
/// code path, so the two can cross-check each other.
inline CouplingResult local_rate_oracle(const SAModel& m, const Vec& x, const Vec& beta,
                                        double tol = 1e-9) {
    const Mat rho = m.kernel.matrix(x);
    const int s = static_cast<int>(rho.rows());
    const Mat gvals = m.g_matrix(x);
    const int d = m.d1;
    CouplingResult out;

    if (!detail::in_velocity_hull(gvals, beta)) {
        out.value = ExtReal::infinity();
        out.converged = true;
        return out;
    }

    // start at the stationary pair law
    Vec pi = invariant_measure(rho).pi;
    Mat lgam(s, s);
    const double neg_inf = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < s; ++a)
        for (int b = 0; b < s; ++b)
            lgam(a, b) = (rho(a, b) > 0.0 && pi[a] > 0.0)
                             ? std::log(pi[a]) + std::log(rho(a, b))
                             : neg_inf;

    Mat lrho = rho.unaryExpr([&](double v) { return v > 0.0 ? std::log(v) : neg_inf; });

    auto exp_gamma = [&](const Mat& lg) {
        Mat g(s, s);
        for (int a = 0; a < s; ++a)
            for (int b = 0; b < s; ++b) g(a, b) = std::isfinite(lg(a, b)) ? std::exp(lg(a, b)) : 0.0;
        return g;
    };
    auto constraints = [&](const Mat& g, Vec& r, Vec& mres) {
        Vec row = g.rowwise().sum(), col = g.colwise().sum().transpose();
        r = row - col;
        mres = gvals.transpose() * col - beta;
    };

    Vec lam = Vec::Zero(s), nu = Vec::Zero(d);
    double sigma = 10.0;
    double eta = 0.25;
    Mat best_lgam = lgam;

    auto al_value = [&](const Mat& lg) {
        Mat g = exp_gamma(lg);
        Vec r, mres;
        constraints(g, r, mres);
        double f = detail::pair_entropy(g, rho);
        return f + lam.dot(r) + nu.dot(mres) + 0.5 * sigma * (r.squaredNorm() + mres.squaredNorm());
    };

    int outer = 0;
    double cviol = std::numeric_limits<double>::infinity();
    for (; outer < 80; ++outer) {
        double fcur = al_value(lgam);
        for (int inner = 0; inner < 400; ++inner) {
            Mat g = exp_gamma(lgam);
            Vec mu = g.rowwise().sum();
            Vec r, mres;
            constraints(g, r, mres);
            // gradient of the augmented Lagrangian in gamma
            Mat grad(s, s);
            for (int a = 0; a < s; ++a)
                for (int b = 0; b < s; ++b) {
                    if (!std::isfinite(lgam(a, b))) {
                        grad(a, b) = 0.0;
                        continue;
                    }
                    double v = lgam(a, b) - std::log(mu[a]) - lrho(a, b);
                    v += (lam[a] - lam[b]) + sigma * (r[a] - r[b]);
                    v += (nu + sigma * mres).dot(gvals.row(b));
                    grad(a, b) = v;
                }
            // exponentiated-gradient step, renormalized on the simplex
            Mat trial = lgam - eta * grad;
            std::vector<double> all;
            all.reserve(s * s);
            for (int a = 0; a < s; ++a)
                for (int b = 0; b < s; ++b)
                    if (std::isfinite(trial(a, b))) all.push_back(trial(a, b));
            const double lz = detail::logsumexp(all);
            for (int a = 0; a < s; ++a)
                for (int b = 0; b < s; ++b)
                    if (std::isfinite(trial(a, b))) trial(a, b) -= lz;
            const double ftrial = al_value(trial);
            if (ftrial <= fcur + 1e-14) {
                lgam = trial;
                if (fcur - ftrial < 1e-13 * (1.0 + std::abs(fcur))) {
                    fcur = ftrial;
                    break;
                }
                fcur = ftrial;
                eta = std::min(eta * 1.05, 2.0);
            } else {
                eta *= 0.5;
                if (eta < 1e-8) break;
            }
        }
        Mat g = exp_gamma(lgam);
        Vec r, mres;
        constraints(g, r, mres);
        cviol = r.lpNorm<1>() + mres.lpNorm<1>();
        if (cviol < 1e-11) break;
        lam += sigma * r;
        nu += sigma * mres;
        sigma = std::min(sigma * 2.0, 1e8);
    }
    out.outer_iterations = outer;

    // Projected-Newton polish on the primal: the objective is convex and
    // every constraint is linear in gamma, so the equality-constrained
    // Newton iteration has no spurious stationary points. Variables are the
    // gamma entries on the support cells; positivity is kept by a
    // fraction-to-boundary line search.
    std::vector<std::pair<int, int>> cells;
    for (int a = 0; a < s; ++a)
        for (int b = 0; b < s; ++b)
            if (std::isfinite(lgam(a, b))) cells.emplace_back(a, b);
    const int nc = static_cast<int>(cells.size());
    const int m_rows = (s - 1) + 1 + d;  // marginal equality (one row redundant), mass, mean

    Mat Acon = Mat::Zero(m_rows, nc);
    Vec bcon = Vec::Zero(m_rows);
    for (int c = 0; c < nc; ++c) {
        const int a = cells[c].first, b = cells[c].second;
        if (a < s - 1) Acon(a, c) += 1.0;
        if (b < s - 1) Acon(b, c) -= 1.0;
        Acon(s - 1, c) = 1.0;
        for (int j = 0; j < d; ++j) Acon(s + j, c) = gvals(b, j);
    }
    bcon[s - 1] = 1.0;
    for (int j = 0; j < d; ++j) bcon[s + j] = beta[j];

    // Start from the mirror iterate, blended with the stationary pair law:
    // mirror descent can park cells at e^-40, and 1/gamma entries that large
    // poison the Newton linear algebra. Convexity makes the polish immune to
    // the start beyond conditioning.
    Vec gamma_v(nc);
    for (int c = 0; c < nc; ++c)
        gamma_v[c] = 0.9 * std::exp(lgam(cells[c].first, cells[c].second)) +
                     0.1 * pi[cells[c].first] * rho(cells[c].first, cells[c].second);
    gamma_v /= gamma_v.sum();

    auto objective_of = [&](const Vec& gv) {
        Vec mu = Vec::Zero(s);
        for (int c = 0; c < nc; ++c) mu[cells[c].first] += gv[c];
        double acc = 0.0;
        for (int c = 0; c < nc; ++c) {
            if (gv[c] <= 0.0) continue;
            acc += gv[c] * std::log(gv[c] / (mu[cells[c].first] *
                                             rho(cells[c].first, cells[c].second)));
        }
        return acc;
    };
    auto merit_of = [&](const Vec& gv) {
        return objective_of(gv) + 1e3 * (Acon * gv - bcon).lpNorm<1>();
    };

    int newton_its = 0;
    double lag_residual = std::numeric_limits<double>::infinity();
    double merit = merit_of(gamma_v);
    for (; newton_its < 160; ++newton_its) {
        Vec mu = Vec::Zero(s);
        for (int c = 0; c < nc; ++c) mu[cells[c].first] += gamma_v[c];
        Vec grad(nc);
        for (int c = 0; c < nc; ++c)
            grad[c] = std::log(gamma_v[c] / (mu[cells[c].first] *
                                             rho(cells[c].first, cells[c].second)));
        // Hessian: diag(1/gamma) minus the per-row rank-one 1/mu_a block
        Mat H = Mat::Zero(nc, nc);
        for (int c = 0; c < nc; ++c) H(c, c) = 1.0 / gamma_v[c];
        for (int c = 0; c < nc; ++c)
            for (int c2 = 0; c2 < nc; ++c2)
                if (cells[c].first == cells[c2].first)
                    H(c, c2) -= 1.0 / mu[cells[c].first];
        Mat KKT = Mat::Zero(nc + m_rows, nc + m_rows);
        KKT.topLeftCorner(nc, nc) = H + 1e-12 * Mat::Identity(nc, nc);
        KKT.topRightCorner(nc, m_rows) = Acon.transpose();
        KKT.bottomLeftCorner(m_rows, nc) = Acon;
        Vec rhs(nc + m_rows);
        rhs.head(nc) = -grad;
        rhs.tail(m_rows) = bcon - Acon * gamma_v;
        Vec sol = KKT.partialPivLu().solve(rhs);
        Vec step = sol.head(nc);
        Vec mult = sol.tail(m_rows);
        // stationarity weighted by gamma: vanishing cells carry huge log
        // gradients that are irrelevant to the objective
        Vec lag = grad + Acon.transpose() * mult;
        lag_residual = 0.0;
        for (int c = 0; c < nc; ++c)
            lag_residual = std::max(lag_residual, gamma_v[c] * std::abs(lag[c]));
        const double feas = (Acon * gamma_v - bcon).lpNorm<1>();
        if (lag_residual <= 1e-13 && feas <= 1e-12) break;
        // fraction to boundary, then backtrack on the merit function
        double tmax = 1.0;
        for (int c = 0; c < nc; ++c)
            if (step[c] < 0.0) tmax = std::min(tmax, -0.995 * gamma_v[c] / step[c]);
        double t = tmax;
        bool moved = false;
        for (int ls = 0; ls < 50; ++ls) {
            Vec trial = gamma_v + t * step;
            const double mt = merit_of(trial);
            if (mt < merit - 1e-15) {
                gamma_v = trial;
                merit = mt;
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if (!moved) break;
    }
    out.newton_iterations = newton_its;

    Mat g_polished = Mat::Zero(s, s);
    for (int c = 0; c < nc; ++c) g_polished(cells[c].first, cells[c].second) = gamma_v[c];
    Mat g_al = exp_gamma(lgam);
    g_al /= g_al.sum();

    auto violation = [&](const Mat& g) {
        Vec r, mres;
        constraints(g, r, mres);
        return r.lpNorm<1>() + mres.lpNorm<1>();
    };
    // both candidates are (near-)feasible points of a convex minimization:
    // take the lower objective, falling back to the mirror iterate if the
    // polish lost feasibility
    const bool polish_ok =
        violation(g_polished) <= std::sqrt(tol) &&
        detail::pair_entropy(g_polished, rho) <= detail::pair_entropy(g_al, rho) + 1e-12;
    const Mat& g_final = polish_ok ? g_polished : g_al;

    Vec r, mres;
    constraints(g_final, r, mres);
    out.gamma = g_final;
    out.marginal_residual = r.lpNorm<1>();
    out.mean_residual = mres.lpNorm<1>();
    out.value = detail::pair_entropy(g_final, rho);
    out.converged = out.marginal_residual + out.mean_residual <= tol;
    return out;
}

}  // namespace sald
