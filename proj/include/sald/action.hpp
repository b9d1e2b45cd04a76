#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "sald/extreal.hpp"
#include "sald/model.hpp"
#include "sald/path.hpp"
#include "sald/rate.hpp"
#include "sald/schedule.hpp"
#include "sald/sim.hpp"
#include "sald/types.hpp"

namespace sald {

namespace detail {

struct QuadRule {
    std::vector<double> nodes;    // on (-1, 1)
    std::vector<double> weights;
};

// Gauss-Legendre rule by Newton iteration on the Legendre roots.
inline const QuadRule& gauss_legendre(int n) {
    static std::map<int, QuadRule> cache;
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    QuadRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            const double dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        const double dp = n * (x * p1 - p0) / (x * x - 1.0);
        rule.nodes[i] = x;
        rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return cache.emplace(n, std::move(rule)).first->second;
}

}  // namespace detail

/// Action functional I(phi) = int_0^T L(phi(t), phidot(t)) / h(t) dt on a
/// piecewise-linear path, by per-segment Gauss-Legendre quadrature. Paths
/// that do not start at the model's declared x0 get +infinity (flagged, not
/// an error); so does any path with an infeasible segment slope.
inline ExtReal action(const SAModel& m, const StepSchedule& sch, double T, const Path& path,
                      int quad_nodes = 8) {
    if (std::abs(path.horizon() - T) > 1e-9 * std::max(1.0, T))
        throw std::invalid_argument("action: path horizon differs from T");
    if ((path.at(0.0) - m.x0).norm() > 1e-9) return ExtReal::infinity();

    const auto& rule = detail::gauss_legendre(quad_nodes);
    double acc = 0.0;
    Vec warm;  // carry the maximizer across nearby quadrature nodes
    for (std::size_t j = 0; j + 1 < path.breakpoints(); ++j) {
        const double a = path.time(j), b = path.time(j + 1);
        const Vec slope = (path.value(j + 1) - path.value(j)) / (b - a);
        for (int q = 0; q < quad_nodes; ++q) {
            const double t = 0.5 * (a + b) + 0.5 * (b - a) * rule.nodes[q];
            const Vec xq = path.at(t);
            RateEval re(m, xq);
            auto lr = re.local_rate(slope, warm.size() ? std::optional<Vec>(warm) : std::nullopt);
            if (lr.value.is_infinite()) return ExtReal::infinity();
            warm = lr.alpha_star;
            const double h = sch.h_limit(T, t);
            acc += 0.5 * (b - a) * rule.weights[q] * lr.value.value() / h;
        }
    }
    return acc;
}

/// Minimum-action search discretized over piecewise-linear paths on a
/// uniform time grid with `segments` pieces.
struct ActionProblem {
    SAModel model;
    StepSchedule schedule = StepSchedule::harmonic();
    double T = 1.0;
    std::optional<Vec> start;  // defaults to model.x0
    std::optional<Vec> end;    // empty = free right endpoint
    int segments = 8;
    int quad_nodes = 8;
};

struct MinActionResult {
    Path path;
    ExtReal value;
    bool converged = false;
    bool feasible = true;
    double grad_norm = 0.0;
    int iterations = 0;
    int chosen_start = 0;  // 0 = endpoint interpolation, 1 = ODE warm start
};

namespace detail {

inline Path grid_path(double T, const std::vector<Vec>& vals) {
    std::vector<double> ts(vals.size());
    const int k = static_cast<int>(vals.size()) - 1;
    for (int j = 0; j <= k; ++j) ts[j] = T * j / k;
    ts.back() = T;
    return Path(ts, vals);
}

}  // namespace detail

/// Local minimizer of the discretized action over the interior breakpoint
/// values (and the endpoint when it is free), by gradient descent with
/// central finite differences and a backtracking line search. Two starts are
/// probed: the straight endpoint interpolation and the limit-ODE path; the
/// lower final value wins (ties to the first).
inline MinActionResult min_action_path(const ActionProblem& prob) {
    const SAModel& m = prob.model;
    const int K = prob.segments;
    if (K < 1) throw std::invalid_argument("min_action_path: need segments >= 1");
    const Vec start = prob.start ? *prob.start : m.x0;
    if ((start - m.x0).norm() > 1e-9)
        throw std::invalid_argument("min_action_path: start must equal the model x0");
    const bool free_end = !prob.end.has_value();
    const int d = m.d1;
    const int n_free = (K - 1 + (free_end ? 1 : 0));

    auto assemble = [&](const Vec& vars) {
        std::vector<Vec> vals(static_cast<std::size_t>(K) + 1);
        vals[0] = start;
        for (int j = 1; j <= K - 1; ++j) vals[j] = vars.segment((j - 1) * d, d);
        vals[K] = free_end ? Vec(vars.segment((K - 1) * d, d)) : *prob.end;
        return detail::grid_path(prob.T, vals);
    };
    auto objective = [&](const Vec& vars) {
        return action(m, prob.schedule, prob.T, assemble(vars), prob.quad_nodes);
    };

    // Shrunk attainable-velocity box from grad-H probes at the start point;
    // infeasible starts get their slopes projected into it (barrier-style
    // initialization; the line search keeps iterates feasible afterwards).
    auto project_into_box = [&](Vec vars) {
        RateEval re(m, start);
        Vec lo(d), hi(d);
        for (int k = 0; k < d; ++k) {
            Vec e = Vec::Zero(d);
            e[k] = 30.0;
            lo[k] = re.hamiltonian_grad(-e)[k];
            hi[k] = re.hamiltonian_grad(e)[k];
            const double c = 0.5 * (lo[k] + hi[k]), r = 0.45 * (hi[k] - lo[k]);
            lo[k] = c - r;
            hi[k] = c + r;
        }
        const double dt = prob.T / K;
        Vec prev = start;
        Vec fixed_gap = Vec::Zero(d);
        for (int j = 1; j <= K; ++j) {
            const bool is_var = (j <= K - 1) || free_end;
            Vec target = is_var ? Vec(vars.segment((j - 1) * d, d)) : *prob.end;
            Vec slope = (target - prev) / dt;
            slope = slope.cwiseMax(lo).cwiseMin(hi);
            Vec projected = prev + dt * slope;
            if (is_var) vars.segment((j - 1) * d, d) = projected;
            if (j == K && !free_end) fixed_gap = *prob.end - projected;
            prev = projected;
        }
        // fixed end: spread the residual endpoint gap linearly (best effort)
        if (!free_end && fixed_gap.norm() > 0.0)
            for (int j = 1; j <= K - 1; ++j)
                vars.segment((j - 1) * d, d) += (static_cast<double>(j) / K) * fixed_gap;
        return vars;
    };

    // starts: endpoint interpolation, then the ODE trajectory
    std::vector<Vec> starts;
    {
        Path ode = ode_limit(m, m.x0, prob.T, prob.T / std::max(200, 20 * K));
        Vec lin(std::max(n_free, 1) * d), odewarm(std::max(n_free, 1) * d);
        const Vec end_guess = prob.end ? *prob.end : ode.at(prob.T);
        const Vec ode_gap = prob.end ? Vec(*prob.end - ode.at(prob.T)) : Vec(Vec::Zero(d));
        for (int j = 1; j <= K - 1; ++j) {
            const double w = static_cast<double>(j) / K;
            lin.segment((j - 1) * d, d) = (1.0 - w) * start + w * end_guess;
            odewarm.segment((j - 1) * d, d) = ode.at(prob.T * j / K) + w * ode_gap;
        }
        if (free_end) {
            lin.segment((K - 1) * d, d) = end_guess;
            odewarm.segment((K - 1) * d, d) = ode.at(prob.T);
        }
        starts.push_back(lin);
        starts.push_back(odewarm);
        if (n_free > 0)
            for (int si = 0; si < 2; ++si)
                if (objective(starts[si]).is_infinite()) starts[si] = project_into_box(starts[si]);
    }

    MinActionResult best;
    best.value = ExtReal::infinity();
    bool any_finite = false;

    for (int si = 0; si < static_cast<int>(starts.size()); ++si) {
        Vec vars = starts[si];
        if (n_free == 0) {
            ExtReal v = objective(vars);
            if (v < best.value) {
                best.value = v;
                best.path = assemble(vars);
                best.converged = true;
                best.chosen_start = si;
            }
            if (v.is_finite()) any_finite = true;
            continue;
        }
        ExtReal f = objective(vars);
        if (f.is_infinite()) continue;
        any_finite = true;

        double gnorm = 0.0;
        int it = 0;
        const int max_iter = 400;
        bool converged = false;
        for (; it < max_iter; ++it) {
            // central differences, one-sided at infeasibility walls
            Vec grad(n_free * d);
            const double fh = f.value();
            for (int k = 0; k < n_free * d; ++k) {
                const double h = 1e-6 * (1.0 + std::abs(vars[k]));
                Vec vp = vars, vm = vars;
                vp[k] += h;
                vm[k] -= h;
                ExtReal fp = objective(vp), fm = objective(vm);
                if (fp.is_finite() && fm.is_finite())
                    grad[k] = (fp.value() - fm.value()) / (2.0 * h);
                else if (fp.is_finite())
                    grad[k] = (fp.value() - fh) / h;
                else if (fm.is_finite())
                    grad[k] = (fh - fm.value()) / h;
                else
                    grad[k] = 0.0;
            }
            gnorm = grad.lpNorm<Eigen::Infinity>();
            if (gnorm <= 1e-7 * (1.0 + std::abs(fh))) {
                converged = true;
                break;
            }
            double step = 1.0 / std::max(1.0, gnorm);
            bool moved = false;
            for (int ls = 0; ls < 45; ++ls) {
                Vec trial = vars - step * grad;
                ExtReal ft = objective(trial);
                if (ft.is_finite() && ft.value() < fh - 1e-4 * step * grad.squaredNorm()) {
                    vars = trial;
                    f = ft;
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if (!moved) {
                converged = gnorm <= 1e-5 * (1.0 + std::abs(fh));
                break;
            }
        }
        if (f < best.value) {
            best.value = f;
            best.path = assemble(vars);
            best.converged = converged;
            best.grad_norm = gnorm;
            best.iterations = it;
            best.chosen_start = si;
        }
    }

    if (!any_finite) {
        // infeasibility report: every probed start had non-finite action
        best.feasible = false;
        best.converged = false;
        best.value = ExtReal::infinity();
        std::vector<Vec> vals(static_cast<std::size_t>(K) + 1, start);
        if (prob.end) vals[K] = *prob.end;
        best.path = detail::grid_path(prob.T, vals);
    }
    return best;
}

}  // namespace sald
