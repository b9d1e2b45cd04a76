#pragma once

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sald/kernel.hpp"
#include "sald/model.hpp"
#include "sald/types.hpp"

namespace sald {

struct AssumptionCheck {
    std::string id;       // "A1" .. "A6"
    bool pass = true;
    double bound = 0.0;   // attained modulus / constant / sup
    std::string witness;  // where the bound (or the failure) was attained
    std::string note;
};

/// Grid audit of the model assumptions. Failures carry concrete witnesses;
/// passes of the continuity checks mean "audited on grid", never "verified".
struct AssumptionReport {
    std::vector<AssumptionCheck> checks;
    std::optional<int> l0;
    std::optional<int> n0;

    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["schema_version"] = 1;
        j["all_pass"] = all_pass();
        if (l0) j["l0"] = *l0;
        if (n0) j["n0"] = *n0;
        j["checks"] = nlohmann::json::array();
        for (const auto& c : checks) {
            nlohmann::json e;
            e["id"] = c.id;
            e["pass"] = c.pass;
            e["bound"] = c.bound;
            e["witness"] = c.witness;
            if (!c.note.empty()) e["note"] = c.note;
            j["checks"].push_back(e);
        }
        return j;
    }
};

/// Audit A.1-A.6 for a model over grids of parameter points and tilts.
/// All noise points are probed (the space is finite). Failures become
/// report entries, not exceptions.
inline AssumptionReport check_assumptions(const SAModel& m, const std::vector<Vec>& x_grid,
                                          const std::vector<Vec>& alpha_grid) {
    if (x_grid.empty()) throw std::invalid_argument("check_assumptions: empty x grid");
    AssumptionReport rep;
    const int s = m.space.size;

    std::vector<Mat> kernels;
    kernels.reserve(x_grid.size());
    for (const auto& x : x_grid) kernels.push_back(m.kernel.matrix(x));

    // A1: Lipschitz modulus of x -> g(x, z) over grid pairs
    {
        AssumptionCheck c;
        c.id = "A1";
        c.note = "audited on grid";
        double worst = 0.0;
        std::string wit = "single grid point";
        for (std::size_t i = 0; i < x_grid.size(); ++i)
            for (std::size_t j = i + 1; j < x_grid.size(); ++j) {
                const double dx = (x_grid[i] - x_grid[j]).norm();
                if (dx == 0.0) continue;
                for (int z = 0; z < s; ++z) {
                    const double dg = (m.g(x_grid[i], z) - m.g(x_grid[j], z)).norm();
                    if (dg / dx > worst) {
                        worst = dg / dx;
                        wit = "x-pair (" + std::to_string(i) + "," + std::to_string(j) +
                              "), z=" + std::to_string(z);
                    }
                    if (!std::isfinite(dg)) c.pass = false;
                }
            }
        c.bound = worst;
        c.witness = wit;
        rep.checks.push_back(c);
    }

    // A2: grid modulus of continuity of x -> eta_x(y, z)
    {
        AssumptionCheck c;
        c.id = "A2";
        c.note = "audited on grid";
        double worst = 0.0;
        std::string wit = "single grid point";
        for (std::size_t i = 0; i < x_grid.size(); ++i)
            for (std::size_t j = i + 1; j < x_grid.size(); ++j) {
                const double dx = (x_grid[i] - x_grid[j]).norm();
                if (dx == 0.0) continue;
                for (int y = 0; y < s; ++y)
                    for (int z = 0; z < s; ++z) {
                        const double d = std::abs(kernels[i](y, z) - kernels[j](y, z)) / dx;
                        if (d > worst) {
                            worst = d;
                            wit = "x-pair (" + std::to_string(i) + "," + std::to_string(j) +
                                  "), (y,z)=(" + std::to_string(y) + "," + std::to_string(z) + ")";
                        }
                    }
            }
        c.bound = worst;
        c.witness = wit;
        rep.checks.push_back(c);
    }

    // A3: grid modulus of (x, alpha) -> Lambda(x, alpha, y), uniform in y
    {
        AssumptionCheck c;
        c.id = "A3";
        c.note = "audited on grid";
        double worst = 0.0;
        std::string wit = "single grid point";
        std::vector<std::vector<double>> lam(x_grid.size());
        for (std::size_t i = 0; i < x_grid.size(); ++i)
            for (const auto& a : alpha_grid)
                for (int y = 0; y < s; ++y) lam[i].push_back(one_step_log_mgf(m, x_grid[i], a, y));
        for (std::size_t i = 0; i < x_grid.size(); ++i)
            for (std::size_t j = i + 1; j < x_grid.size(); ++j) {
                const double dx = (x_grid[i] - x_grid[j]).norm();
                if (dx == 0.0) continue;
                for (std::size_t k = 0; k < lam[i].size(); ++k) {
                    const double d = std::abs(lam[i][k] - lam[j][k]) / dx;
                    if (!std::isfinite(lam[i][k])) c.pass = false;
                    if (d > worst) {
                        worst = d;
                        wit = "x-pair (" + std::to_string(i) + "," + std::to_string(j) + ")";
                    }
                }
            }
        c.bound = worst;
        c.witness = wit;
        rep.checks.push_back(c);
    }

    // A4: density-ratio constant sup eta_x / eta_w over grid pairs
    {
        AssumptionCheck c;
        c.id = "A4";
        double worst = 1.0;
        std::string wit = "uniform kernels";
        for (std::size_t i = 0; i < x_grid.size() && c.pass; ++i)
            for (std::size_t j = 0; j < x_grid.size() && c.pass; ++j) {
                if (i == j) continue;
                for (int y = 0; y < s && c.pass; ++y)
                    for (int z = 0; z < s; ++z) {
                        const double num = kernels[i](y, z), den = kernels[j](y, z);
                        if (num <= 0.0 && den <= 0.0) continue;
                        if (den <= 0.0) {
                            c.pass = false;
                            wit = "support mismatch at x-pair (" + std::to_string(i) + "," +
                                  std::to_string(j) + "), (y,z)=(" + std::to_string(y) + "," +
                                  std::to_string(z) + ")";
                            break;
                        }
                        if (num / den > worst) {
                            worst = num / den;
                            wit = "x-pair (" + std::to_string(i) + "," + std::to_string(j) +
                                  "), (y,z)=(" + std::to_string(y) + "," + std::to_string(z) + ")";
                        }
                    }
            }
        c.bound = worst;
        c.witness = wit;
        rep.checks.push_back(c);
    }

    // A5: ergodicity via primitivity of the support pattern; l0 = n0 =
    // smallest k with rho_x^k strictly positive.
    {
        AssumptionCheck c;
        c.id = "A5";
        int worst_l0 = 0;
        for (std::size_t i = 0; i < x_grid.size(); ++i) {
            auto support = detail::BoolMat::support(kernels[i]);
            if (auto bad = detail::unreachable_pair(support)) {
                c.pass = false;
                c.witness = "x index " + std::to_string(i) + ": state " +
                            std::to_string(bad->second) + " unreachable from state " +
                            std::to_string(bad->first);
                break;
            }
            auto idx = detail::primitivity_index(support);
            if (!idx) {
                c.pass = false;
                c.witness = "x index " + std::to_string(i) + ": irreducible but periodic";
                break;
            }
            if (*idx > worst_l0) {
                worst_l0 = *idx;
                c.witness = "x index " + std::to_string(i);
            }
        }
        if (c.pass) {
            rep.l0 = worst_l0;
            rep.n0 = worst_l0;
            c.bound = worst_l0;
            if (c.witness.empty()) c.witness = "x index 0";
        }
        rep.checks.push_back(c);
    }

    // A6: exponential moments of both the update and the raw noise
    // coordinates; always finite on finite spaces with finite g, so the
    // attained sup is the interesting output.
    {
        AssumptionCheck c;
        c.id = "A6";
        c.note = "finite noise space: reports the attained sup";
        double sup1 = -std::numeric_limits<double>::infinity();
        double sup2 = -std::numeric_limits<double>::infinity();
        std::string wit;
        for (std::size_t i = 0; i < x_grid.size(); ++i) {
            for (const auto& a : alpha_grid)
                for (int y = 0; y < s; ++y) {
                    const double v = one_step_log_mgf(m, x_grid[i], a, y);
                    if (!std::isfinite(v)) c.pass = false;
                    if (v > sup1) {
                        sup1 = v;
                        wit = "update MGF at x index " + std::to_string(i) + ", y=" + std::to_string(y);
                    }
                }
            // raw-coordinate MGF: tilts along the noise embedding axes with
            // the magnitudes of the supplied alpha grid
            const int d2 = m.space.d2();
            for (const auto& a : alpha_grid) {
                const double mag = a.norm();
                for (int axis = 0; axis < d2; ++axis)
                    for (double sgn : {-1.0, 1.0}) {
                        for (int y = 0; y < s; ++y) {
                            double shift = -std::numeric_limits<double>::infinity();
                            for (int z = 0; z < s; ++z)
                                if (kernels[i](y, z) > 0.0)
                                    shift = std::max(shift, sgn * mag * m.space.coords(z, axis));
                            double acc = 0.0;
                            for (int z = 0; z < s; ++z)
                                if (kernels[i](y, z) > 0.0)
                                    acc += kernels[i](y, z) *
                                           std::exp(sgn * mag * m.space.coords(z, axis) - shift);
                            sup2 = std::max(sup2, shift + std::log(acc));
                        }
                    }
            }
        }
        c.bound = std::max(sup1, sup2);
        c.witness = wit;
        rep.checks.push_back(c);
    }

    return rep;
}

}  // namespace sald
