#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <thread>
#include <vector>

#include "sald/schedule.hpp"

using namespace sald;

// independent partial-sum scan, kept free of StepSchedule internals
namespace {
double harmonic_sum(Index n) {
    double s = 0.0;
    for (Index k = 1; k <= n; ++k) s += 1.0 / static_cast<double>(k);
    return s;
}
Index scan_m(double t) {
    double s = 0.0;
    Index n = 0;
    for (;;) {
        const double next = s + 1.0 / static_cast<double>(n + 1);
        if (next > t) return n;
        s = next;
        ++n;
    }
}
}  // namespace

TEST_CASE("partial sums t_n") {
    auto h = StepSchedule::harmonic();
    CHECK(h.t_of(0) == 0.0);
    CHECK(h.t_of(3) == Catch::Approx(11.0 / 6.0).epsilon(1e-14));

    auto c = StepSchedule::constant(0.5);
    CHECK(c.t_of(4) == Catch::Approx(2.0).epsilon(1e-15));

    auto p = StepSchedule::polynomial(0.5);
    CHECK(p.t_of(2) ==
          Catch::Approx(std::pow(2.0, -0.5) + std::pow(3.0, -0.5)).epsilon(1e-14));
    CHECK(p.t_of(2) == Catch::Approx(1.284457050376173).epsilon(1e-12));
}

TEST_CASE("custom schedules validate and exhaust") {
    CHECK_THROWS_AS(StepSchedule::custom({}), ConfigError);
    CHECK_THROWS_AS(StepSchedule::custom({0.1, 0.0}), ConfigError);
    auto s = StepSchedule::custom({0.5, 0.25, 0.25});
    CHECK(s.t_of(3) == Catch::Approx(1.0));
    CHECK_THROWS_AS(s.t_of(4), std::out_of_range);
    CHECK(s.m_of(10.0) == 3);  // saturates at the list end
}

TEST_CASE("m_of inverts t_of with left-closed ties") {
    auto c = StepSchedule::constant(0.5);
    CHECK(c.m_of(1.2) == 2);

    auto h = StepSchedule::harmonic();
    CHECK(h.m_of(h.t_of(3)) == 3);
    for (Index n : {1, 2, 5, 17, 100, 999, 12345})
        CHECK(h.m_of(h.t_of(n)) == n);

    const double target = harmonic_sum(1000) + 1.0;
    CHECK(h.m_of(target) == scan_m(target));
    CHECK(h.m_of(target) >= 2718);
    CHECK(h.m_of(target) <= 2720);
}

TEST_CASE("beta_n counts the steps in the window") {
    auto c = StepSchedule::constant(0.1);
    for (Index n : {1, 7, 50}) CHECK(c.beta_n(n, 1.0) == 10);

    auto h = StepSchedule::harmonic();
    const Index scanned = scan_m(harmonic_sum(1000) + 1.0) - 1000;
    CHECK(h.beta_n(1000, 1.0) == scanned);
    CHECK(scanned >= 1717);
    CHECK(scanned <= 1721);

    // n = 1 with T below eps_2: the window holds no step under the
    // left-closed m_of convention
    CHECK(h.beta_n(1, 0.25) == 0);
}

TEST_CASE("beta_n grows without bound for divergent kinds") {
    for (auto sch : {StepSchedule::harmonic(), StepSchedule::polynomial(0.5)}) {
        Index prev = 0;
        for (Index n : {100, 1000, 10000, 100000}) {
            const Index b = sch.beta_n(n, 1.0);
            CHECK(b > prev);
            prev = b;
        }
    }
}

TEST_CASE("h_n profile") {
    auto c = StepSchedule::constant(0.25);
    for (double t : {0.0, 0.3, 0.6, 0.99})
        CHECK(c.h_n(5, 1.0, t) == Catch::Approx(4 * 0.25));

    auto h = StepSchedule::harmonic();
    // first interval takes the value beta_n * eps_n exactly
    const Index n = 50;
    const double expect = static_cast<double>(h.beta_n(n, 1.0)) * h.eps(n);
    CHECK(h.h_n(n, 1.0, 0.0) == expect);

    CHECK(h.h_n(100000, 1.0, 0.0) == Catch::Approx(std::exp(1.0) - 1.0).margin(1e-3));
    CHECK_THROWS_AS(h.h_n(100, 1.0, 1.0), std::out_of_range);
    CHECK_THROWS_AS(h.h_n(100, 1.0, -0.1), std::out_of_range);
}

TEST_CASE("h_limit closed forms") {
    auto h = StepSchedule::harmonic();
    CHECK(h.h_limit(1.0, 0.0) == Catch::Approx(std::exp(1.0) - 1.0).epsilon(1e-14));
    CHECK(h.h_limit(1.0, 1.0) ==
          Catch::Approx(std::exp(-1.0) * (std::exp(1.0) - 1.0)).epsilon(1e-14));

    auto p = StepSchedule::polynomial(0.5);
    for (double t : {0.0, 0.4, 1.0}) CHECK(p.h_limit(1.0, t) == 1.0);

    auto c = StepSchedule::constant(0.25);
    CHECK(c.h_limit(1.0, 0.3) == Catch::Approx(1.0));
    CHECK(c.h_limit(1.0, 0.0) == c.h_limit(1.0, 0.9));
}

TEST_CASE("h_n converges to h_limit uniformly (harmonic, T = 1)") {
    auto h = StepSchedule::harmonic();
    double sup = 0.0;
    for (int i = 0; i < 101; ++i) {
        const double t = i / 101.0;
        sup = std::max(sup, std::abs(h.h_n(100000, 1.0, t) - h.h_limit(1.0, t)));
    }
    CHECK(sup < 1e-3);
}

TEST_CASE("h_limit is non-increasing in t for every kind") {
    std::vector<StepSchedule> kinds{StepSchedule::harmonic(), StepSchedule::polynomial(0.3),
                                    StepSchedule::polynomial(0.7), StepSchedule::constant(0.05)};
    for (const auto& sch : kinds) {
        double prev = std::numeric_limits<double>::infinity();
        for (int i = 0; i <= 50; ++i) {
            const double v = sch.h_limit(1.0, i / 50.0);
            CHECK(v <= prev + 1e-12);
            prev = v;
        }
    }
}

TEST_CASE("numeric h_limit extrapolation tracks the harmonic closed form") {
    // a custom schedule that happens to be a long harmonic prefix
    std::vector<double> steps;
    steps.reserve(300000);
    for (Index k = 1; k <= 300000; ++k) steps.push_back(1.0 / static_cast<double>(k));
    auto cust = StepSchedule::custom(std::move(steps));
    for (double t : {0.0, 0.5, 0.9}) {
        auto lim = cust.h_limit_numeric(1.0, t);
        CHECK(lim.converged);
        CHECK(lim.value == Catch::Approx(std::exp(-t) * (std::exp(1.0) - 1.0)).margin(2e-5));
        CHECK(cust.h_limit(1.0, t) == lim.value);
    }
}

TEST_CASE("cache grows safely under concurrent readers") {
    auto h = StepSchedule::harmonic();
    std::vector<std::thread> pool;
    std::atomic<bool> failed{false};
    for (int w = 0; w < 4; ++w)
        pool.emplace_back([&, w] {
            for (Index n = 1; n < 20000; n += 7 + w) {
                const double t = h.t_of(n);
                if (h.m_of(t) != n) failed = true;
            }
        });
    for (auto& th : pool) th.join();
    CHECK_FALSE(failed.load());
}
