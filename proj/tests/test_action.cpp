#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "sald/action.hpp"
#include "sald/models/presets.hpp"
#include "sald/sim.hpp"

using namespace sald;

namespace {
double bernoulli_L(double beta) {  // KL form for p = 1/2, g = z
    if (beta <= 0.0 || beta >= 1.0) return std::numeric_limits<double>::quiet_NaN();
    return beta * std::log(2.0 * beta) + (1.0 - beta) * std::log(2.0 * (1.0 - beta));
}
}  // namespace

TEST_CASE("constant path at an equilibrium point has zero action") {
    auto m = ou_bernoulli_model(0.0);  // gbar(0) = 0
    auto sch = StepSchedule::harmonic();
    auto a = action(m, sch, 1.0, Path::constant(1.0, scalar_vec(0.0)));
    REQUIRE(a.is_finite());
    CHECK(std::abs(a.value()) <= 1e-12);
}

TEST_CASE("paths that start away from x0 are flagged infinite") {
    auto m = bernoulli_model();
    auto sch = StepSchedule::harmonic();
    Path wrong = Path::line(1.0, scalar_vec(0.2), scalar_vec(0.6));
    CHECK(action(m, sch, 1.0, wrong).is_infinite());
}

TEST_CASE("single harmonic segment reproduces L via the unit time-scale integral") {
    // int_0^1 dt/h(t) = 1 for the harmonic scale on [0,1]
    auto m = bernoulli_model();
    auto sch = StepSchedule::harmonic();
    for (double slope : {0.3, 0.5, 0.75}) {
        Path seg = Path::line(1.0, scalar_vec(0.0), scalar_vec(slope));
        auto a = action(m, sch, 1.0, seg);
        REQUIRE(a.is_finite());
        CHECK(a.value() == Catch::Approx(bernoulli_L(slope)).margin(1e-8));
    }
}

TEST_CASE("criterion-style identity at beta = 0.75 within 1e-5") {
    auto m = bernoulli_model();
    auto sch = StepSchedule::harmonic();
    Path seg = Path::line(1.0, scalar_vec(0.0), scalar_vec(0.75));
    CHECK(action(m, sch, 1.0, seg).value() == Catch::Approx(0.130812).margin(1e-5));
}

TEST_CASE("two segments under a flat time scale add up") {
    auto m = bernoulli_model();
    auto poly = StepSchedule::polynomial(0.5);  // h = 1 on [0,1]
    const double T1 = 0.4, T2 = 0.6, b1 = 0.35, b2 = 0.6;
    Path two({0.0, T1, 1.0},
             {scalar_vec(0.0), scalar_vec(b1 * T1), scalar_vec(b1 * T1 + b2 * T2)});
    auto a = action(m, poly, 1.0, two);
    REQUIRE(a.is_finite());
    CHECK(a.value() == Catch::Approx(T1 * bernoulli_L(b1) + T2 * bernoulli_L(b2)).margin(1e-9));
}

TEST_CASE("infeasible slopes poison the whole path") {
    auto m = bernoulli_model();
    auto sch = StepSchedule::harmonic();
    Path steep = Path::line(1.0, scalar_vec(0.0), scalar_vec(1.4));
    CHECK(action(m, sch, 1.0, steep).is_infinite());
}

TEST_CASE("quadrature is converged: doubling nodes moves the value below 1e-6") {
    auto m = ou_bernoulli_model(1.0);
    auto sch = StepSchedule::harmonic();
    Path p({0.0, 0.5, 1.0}, {scalar_vec(1.0), scalar_vec(0.7), scalar_vec(0.55)});
    const double a8 = action(m, sch, 1.0, p, 8).value();
    const double a16 = action(m, sch, 1.0, p, 16).value();
    CHECK(std::abs(a8 - a16) < 1e-6);
}

TEST_CASE("the limit ODE is the zero of the action") {
    auto sch = StepSchedule::harmonic();
    for (auto m : {bernoulli_model(), two_state_model(), ou_bernoulli_model(1.0)}) {
        Path ode = ode_limit(m, m.x0, 1.0, 1e-3);
        auto a = action(m, sch, 1.0, ode);
        REQUIRE(a.is_finite());
        CHECK(a.value() <= 1e-4);
        CHECK(a.value() >= 0.0);
    }
}

TEST_CASE("displaced paths carry strictly positive action") {
    auto sch = StepSchedule::harmonic();
    for (auto m : {bernoulli_model(), two_state_model()}) {
        Path ode = ode_limit(m, m.x0, 1.0, 1e-3);
        double margin = std::numeric_limits<double>::infinity();
        for (double shift : {0.12, 0.2, -0.15}) {
            Path displaced =
                Path::line(1.0, m.x0, scalar_vec(ode.at(1.0)[0] + 2.0 * shift));
            if (deviation_sup(displaced, ode) < 0.1) continue;
            auto a = action(m, sch, 1.0, displaced);
            REQUIRE(a.is_finite());
            margin = std::min(margin, a.value());
        }
        INFO("recorded positive-action margin for " << m.name << ": " << margin);
        CHECK(margin > 1e-3);
    }
}

TEST_CASE("minimum-action search finds the straight line for x-free dynamics") {
    // x-independent g and flat h: Jensen makes the constant-slope path optimal
    auto m = bernoulli_model();
    auto poly = StepSchedule::polynomial(0.5);
    ActionProblem prob;
    prob.model = m;
    prob.schedule = poly;
    prob.T = 1.0;
    prob.end = scalar_vec(0.7);
    prob.segments = 4;
    auto res = min_action_path(prob);
    REQUIRE(res.value.is_finite());
    CHECK(res.value.value() == Catch::Approx(bernoulli_L(0.7)).margin(1e-6));
    for (std::size_t j = 0; j < res.path.breakpoints(); ++j)
        CHECK(res.path.value(j)[0] == Catch::Approx(0.7 * res.path.time(j)).margin(2e-3));
}

TEST_CASE("free-end search returns the ODE path and near-zero action") {
    auto sch = StepSchedule::harmonic();
    for (auto m : {bernoulli_model(), two_state_model()}) {
        ActionProblem prob;
        prob.model = m;
        prob.schedule = sch;
        prob.T = 1.0;
        prob.segments = 8;
        auto res = min_action_path(prob);
        REQUIRE(res.value.is_finite());
        CHECK(res.value.value() <= 1e-4);
        Path ode = ode_limit(m, m.x0, 1.0, 1e-3);
        CHECK(deviation_sup(res.path, ode) <= 1e-2);
    }
}

TEST_CASE("K = 2 optimizer value matches a brute-force scan of the breakpoint") {
    auto m = bernoulli_model();
    auto sch = StepSchedule::harmonic();
    ActionProblem prob;
    prob.model = m;
    prob.schedule = sch;
    prob.T = 1.0;
    prob.end = scalar_vec(0.6);
    prob.segments = 2;
    auto res = min_action_path(prob);
    REQUIRE(res.value.is_finite());

    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 201; ++i) {
        const double v = 0.05 + (0.55 - 0.05) * i / 200.0;
        Path cand({0.0, 0.5, 1.0}, {scalar_vec(0.0), scalar_vec(v), scalar_vec(0.6)});
        auto a = action(m, sch, 1.0, cand);
        if (a.is_finite()) best = std::min(best, a.value());
    }
    CHECK(std::abs(res.value.value() - best) <= 1e-4);
}

TEST_CASE("refining the segment grid never raises the minimum") {
    auto m = ou_bernoulli_model(1.0);
    auto sch = StepSchedule::harmonic();
    ActionProblem prob;
    prob.model = m;
    prob.schedule = sch;
    prob.T = 1.0;
    prob.segments = 4;
    auto coarse = min_action_path(prob);
    prob.segments = 8;
    auto fine = min_action_path(prob);
    REQUIRE(coarse.value.is_finite());
    REQUIRE(fine.value.is_finite());
    CHECK(fine.value.value() <= coarse.value.value() + 1e-6);
}

TEST_CASE("unreachable fixed endpoints produce an infeasibility report") {
    auto m = bernoulli_model();
    auto sch = StepSchedule::harmonic();
    ActionProblem prob;
    prob.model = m;
    prob.schedule = sch;
    prob.T = 1.0;
    prob.end = scalar_vec(1.5);  // mean velocity 1.5 is outside [0, 1]
    prob.segments = 4;
    auto res = min_action_path(prob);
    CHECK_FALSE(res.feasible);
    CHECK(res.value.is_infinite());
}
