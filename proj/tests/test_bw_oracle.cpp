#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "grsnet/bw_oracle.hpp"

using namespace grsnet;

TEST_CASE("normal cdf against 20-digit references") {
    // Reference values computed with 30-digit arithmetic.
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(normal_cdf(1.0) == doctest::Approx(0.84134474606854294859).epsilon(1e-15));
    CHECK(normal_cdf(-1.0) == doctest::Approx(0.15865525393145705141).epsilon(1e-15));
    CHECK(normal_cdf(0.5) == doctest::Approx(0.69146246127401310364).epsilon(1e-15));
    CHECK(normal_cdf(2.0) == doctest::Approx(0.9772498680518207928).epsilon(1e-15));
    CHECK(normal_cdf(-2.5) == doctest::Approx(0.006209665325776135167).epsilon(1e-14));
    CHECK(normal_cdf(5.0) == doctest::Approx(0.99999971334842812081).epsilon(1e-15));
    CHECK(normal_cdf(0.1) == doctest::Approx(0.53982783727702898147).epsilon(1e-15));
}

TEST_CASE("pair survival closed form") {
    CHECK(bw_meet_survival({1.0, 0.5, 1.0}) ==
          doctest::Approx(0.68268949213708589717).epsilon(1e-14));
    SUBCASE("limits") {
        CHECK(bw_meet_survival({1e-12, 1.0, 1.0}) < 1e-11);  // born together
        CHECK(bw_meet_survival({1.0, 1e-12, 1.0}) > 1.0 - 1e-12);  // no time to meet
    }
    SUBCASE("domain errors") {
        CHECK_THROWS_AS(bw_meet_survival({0.0, 1.0, 1.0}), std::domain_error);
        CHECK_THROWS_AS(bw_meet_survival({1.0, 0.0, 1.0}), std::domain_error);
        CHECK_THROWS_AS(bw_meet_survival({1.0, 1.0, 0.0}), std::domain_error);
    }
}

TEST_CASE("pair survival is monotone in separation and time") {
    double prev = 0.0;
    for (double eps = 0.1; eps < 3.0; eps += 0.1) {
        const double s = bw_meet_survival({eps, 1.0, 1.0});
        CHECK(s > prev);
        prev = s;
    }
    prev = 1.0;
    for (double t = 0.1; t < 5.0; t += 0.1) {
        const double s = bw_meet_survival({0.7, t, 1.0});
        CHECK(s < prev);
        prev = s;
    }
}

TEST_CASE("survival is O(epsilon) uniformly over a time window") {
    // survival / eps <= 2 phi(0) / sqrt(2 t0) at the left end of the window.
    const double t0 = 0.25;
    const double bound = 2.0 * 0.39894228040143268 / std::sqrt(2.0 * t0) + 1e-9;
    for (double eps : {0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625}) {
        double sup = 0.0;
        for (double t = t0; t <= 4.0; t += 0.05)
            sup = std::max(sup, bw_meet_survival({eps, t, 1.0}) / eps);
        CHECK(sup <= bound);
    }
}

TEST_CASE("coalescing simulation: single-path endpoint variance") {
    const double T = 1.0, dt = 1e-3, diffusion = 1.3;
    const int n = 4000;
    double sum = 0, sum2 = 0;
    for (int i = 0; i < n; ++i) {
        const auto res = simulate_coalescing_bm({{0.0, 0.0}}, dt, T,
                                                1000 + static_cast<std::uint64_t>(i), diffusion);
        const double x = res.paths[0].values.back();
        sum += x;
        sum2 += x * x;
    }
    const double var = sum2 / n - (sum / n) * (sum / n);
    const double expect = diffusion * diffusion * T;
    // variance of the sample variance of a Gaussian: 2 var^2 / n
    const double se = expect * std::sqrt(2.0 / n);
    CHECK(std::abs(var - expect) < 4.0 * se);
}

TEST_CASE("coalescing simulation: two-path survival matches the closed form") {
    const double eps = 0.5, T = 1.0, dt = 1e-4;
    const int n = 4000;
    int alive = 0;
    for (int i = 0; i < n; ++i) {
        const auto res = simulate_coalescing_bm({{0.0, 0.0}, {eps, 0.0}}, dt, T,
                                                77000 + static_cast<std::uint64_t>(i));
        if (res.survivors == 2) ++alive;
    }
    const double frac = static_cast<double>(alive) / n;
    const double expect = bw_meet_survival({eps, T, 1.0});
    const double se = std::sqrt(expect * (1 - expect) / n);
    CHECK(std::abs(frac - expect) < 3.0 * se + 0.01);  // bridge-step slack
}

TEST_CASE("coalescing simulation: order and merging") {
    SUBCASE("near-identical starts merge immediately") {
        const auto res = simulate_coalescing_bm({{0.0, 0.0}, {1e-9, 0.0}}, 1e-3, 0.5, 5);
        CHECK(res.survivors == 1);
        CHECK(res.paths[1].merged_into == 0);
        CHECK(res.paths[1].merge_time <= 2e-3);
    }
    SUBCASE("path order never inverts") {
        const auto res = simulate_coalescing_bm(
            {{0.0, 0.0}, {0.3, 0.0}, {1.0, 0.2}}, 1e-3, 1.0, 99);
        const auto& p0 = res.paths[0].values;
        const auto& p1 = res.paths[1].values;
        for (std::size_t k = 0; k < std::min(p0.size(), p1.size()); ++k)
            CHECK(p0[k] <= p1[k] + 1e-12);
    }
    SUBCASE("later start times activate late") {
        const auto res = simulate_coalescing_bm({{0.0, 0.0}, {5.0, 0.5}}, 1e-2, 1.0, 3);
        CHECK(res.paths[1].values.size() < res.paths[0].values.size());
        CHECK(res.paths[1].first_index == 50);
    }
    SUBCASE("invalid starts rejected") {
        CHECK_THROWS_AS(simulate_coalescing_bm({{1.0, 0.0}, {0.0, 0.0}}, 1e-3, 1.0, 1),
                        std::invalid_argument);
        CHECK_THROWS_AS(simulate_coalescing_bm({{0.0, 0.5}, {1.0, 0.0}}, 1e-3, 1.0, 1),
                        std::invalid_argument);
        CHECK_THROWS_AS(simulate_coalescing_bm({{0.0, 0.0}}, 0.0, 1.0, 1),
                        std::invalid_argument);
    }
}
