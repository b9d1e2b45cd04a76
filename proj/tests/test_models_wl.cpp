#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "sald/models/wang_landau.hpp"
#include "sald/sim.hpp"

using namespace sald;

TEST_CASE("a single stratum pins the weights at 1") {
    WangLandauSpec spec;
    spec.f = {{2.0, 1.0, 0.5}};
    auto m = wang_landau_model(spec);
    auto sch = StepSchedule::harmonic();
    Path p = simulate_steps(m, sch, 0, 500, 3);
    for (std::size_t j = 0; j < p.breakpoints(); ++j)
        CHECK(p.value(j)[0] == Catch::Approx(1.0).margin(1e-14));
}

TEST_CASE("weights stay positive and normalized along the run") {
    auto m = wang_landau_model(wl_multicanonical_ising4());
    auto sch = StepSchedule::harmonic();
    Path p = simulate_steps(m, sch, 0, 5000, 11);
    for (std::size_t j = 0; j < p.breakpoints(); ++j) {
        CHECK(p.value(j).sum() == Catch::Approx(1.0).margin(1e-12));
        CHECK(p.value(j).minCoeff() > 0.0);
    }
}

TEST_CASE("symmetric two-stratum weights converge to one half") {
    auto m = wang_landau_model(wl_two_stratum_symmetric());
    auto sch = StepSchedule::harmonic();
    Path p = simulate_steps(m, sch, 0, 10000, 5);
    const Vec final = p.value(p.breakpoints() - 1);
    CHECK(std::abs(final[0] - 0.5) <= 0.05);
    CHECK(std::abs(final[1] - 0.5) <= 0.05);
}

TEST_CASE("multicanonical weights track the enumerated Gibbs masses") {
    auto spec = wl_multicanonical_ising4();
    auto m = wang_landau_model(spec);
    auto sch = StepSchedule::harmonic();
    Path p = simulate_steps(m, sch, 0, 100000, 5);
    const Vec final = p.value(p.breakpoints() - 1);
    const Vec truth = spec.true_x();
    // enumeration oracle: Gibbs masses of the energy levels of the 4-site chain
    CHECK(truth[0] == Catch::Approx(2.0 * std::exp(3.0) /
                                    (2.0 * std::exp(3.0) + 6.0 * std::exp(1.0) +
                                     6.0 * std::exp(-1.0) + 2.0 * std::exp(-3.0)))
                          .epsilon(1e-12));
    CHECK((final - truth).lpNorm<Eigen::Infinity>() <= 0.05);
}

TEST_CASE("free-energy differences") {
    SECTION("identical energies across strata vanish") {
        WangLandauSpec spec;
        spec.f = {{1.0, 1.0}, {1.0, 1.0}, {1.0, 1.0}};
        auto m = wang_landau_model(spec);
        auto sch = StepSchedule::harmonic();
        Path p = simulate_steps(m, sch, 0, 20000, 9);
        Vec fd = wl_free_energy_differences(p.value(p.breakpoints() - 1));
        CHECK(fd[0] == 0.0);  // self-difference is exactly zero
        for (int i = 1; i < 3; ++i) CHECK(std::abs(fd[i]) <= 0.1);
    }
    SECTION("two-temperature three-site chain matches enumeration") {
        auto spec = wl_free_energy_3site();
        auto m = wang_landau_model(spec);
        auto sch = StepSchedule::harmonic();
        Path p = simulate_steps(m, sch, 0, 100000, 5);
        Vec fd = wl_free_energy_differences(p.value(p.breakpoints() - 1));
        Vec truth = wl_free_energy_differences(spec.true_x());
        CHECK(fd[0] == 0.0);
        CHECK(std::abs(fd[1] - truth[1]) <= 0.1);
    }
}

TEST_CASE("spec validation") {
    WangLandauSpec empty;
    CHECK_THROWS_AS(wang_landau_model(empty), ConfigError);
    WangLandauSpec zero;
    zero.f = {{1.0}, {0.0}};
    CHECK_THROWS_AS(wang_landau_model(zero), ConfigError);
}

TEST_CASE("the increment map matches the multiplicative update to first order") {
    // g(x,(z,j)) = x(j) e_j is the increment implied by the reweighting;
    // one multiplicative step equals x + eps g up to the normalization pullback
    auto spec = wl_two_stratum_symmetric();
    auto m = wang_landau_model(spec);
    Vec x = make_vec({0.3, 0.7});
    const double eps = 1e-6;
    const int z = 0;  // a point in stratum 0
    Vec stepped = m.update(x, eps, z);
    Vec linear = x + eps * m.g(x, z);
    linear /= linear.sum();
    CHECK((stepped - linear).lpNorm<Eigen::Infinity>() <= 1e-10);
}
