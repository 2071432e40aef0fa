#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "grsnet/analytics.hpp"
#include "grsnet/environment.hpp"
#include "grsnet/network.hpp"

using namespace grsnet;

TEST_CASE("increment pmf closed form") {
    CHECK(increment_pmf(0.5, 0) == doctest::Approx(0.5).epsilon(1e-15));
    // q^1 * p * (q + p/2) = 0.5 * 0.5 * 0.75
    CHECK(increment_pmf(0.5, 1) == doctest::Approx(0.1875).epsilon(1e-15));
    CHECK_THROWS_AS(increment_pmf(0.0, 1), std::domain_error);
    CHECK_THROWS_AS(increment_pmf(1.0, 1), std::domain_error);
}

TEST_CASE("increment pmf symmetry, normalization, mean zero") {
    for (double p : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        double total = 0.0, mean = 0.0;
        for (std::int64_t k = -400; k <= 400; ++k) {
            const double v = increment_pmf(p, k);
            CHECK(v == increment_pmf(p, -k));
            total += v;
            mean += static_cast<double>(k) * v;
        }
        CHECK(std::abs(total - 1.0) < 1e-12);
        CHECK(std::abs(mean) < 1e-12);
    }
}

TEST_CASE("window enumeration recovers the closed form") {
    for (double p : {0.3, 0.5, 0.7}) {
        const std::int64_t k_max = 6;
        const auto pmf = increment_pmf_by_window_enumeration(p, k_max);
        for (std::int64_t k = -k_max; k <= k_max; ++k)
            CHECK(std::abs(pmf[static_cast<std::size_t>(k + k_max)] - increment_pmf(p, k)) <
                  1e-12);
    }
}

TEST_CASE("sigma2 closed form and series agree") {
    CHECK(sigma2(0.5) == doctest::Approx(10.0 / 9.0).epsilon(1e-14));
    CHECK(sigma2(0.999) < 1e-2);
    for (double p : {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}) {
        double series = 0.0;
        for (std::int64_t k = 1; k <= 2000; ++k)
            series += 2.0 * static_cast<double>(k) * static_cast<double>(k) *
                      increment_pmf(p, k);
        CHECK(std::abs(series - sigma2(p)) < 1e-10);
    }
}

TEST_CASE("sigma2 exact rational equals the closed form") {
    const RationalP p(1, 2);
    CHECK(sigma2_exact(p) == BigRat(10, 9));
}

TEST_CASE("one-step sample variance matches sigma2") {
    const double p = 0.5;
    const std::int64_t n = 200000;
    double sum = 0, sum2 = 0;
    for (std::int64_t i = 0; i < n; ++i) {
        const Environment env(replicate_seed(2024, static_cast<std::uint64_t>(i)), p);
        const double x = static_cast<double>(hop(env, {0, 0}).x);
        sum += x;
        sum2 += x * x;
    }
    const double dn = static_cast<double>(n);
    const double var = sum2 / dn - (sum / dn) * (sum / dn);
    const double mu4 = increment_fourth_moment(p);
    const double se = std::sqrt((mu4 - sigma2(p) * sigma2(p)) / dn);
    CHECK(std::abs(var - sigma2(p)) < 4.0 * se);
}

TEST_CASE("persistence bound constant") {
    CHECK(c1_bound(0.5) == doctest::Approx(0.325).epsilon(1e-15));
    CHECK(c1_bound(0.999) > 0.99);
    for (double p : {0.05, 0.3, 0.5, 0.7, 0.95}) {
        CHECK(c1_bound(p) > 0.0);
        CHECK(c1_bound(p) < 1.0);
    }
    CHECK_THROWS_AS(c1_bound(1.0), std::domain_error);
}

TEST_CASE("model constants bundle") {
    const ModelConstants mc = model_constants(0.5);
    CHECK(mc.q == doctest::Approx(0.5));
    CHECK(mc.p_prime == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(mc.sigma2 == doctest::Approx(10.0 / 9.0));
}

TEST_CASE("tail exponent report on synthetic series") {
    const std::vector<double> ts = {100, 316, 1000, 3162, 10000};
    SUBCASE("c / sqrt(t) sits on the boundary exponent") {
        std::vector<TailPoint> s;
        for (double t : ts) s.push_back({t, 0.4 / std::sqrt(t), 1e-4});
        const TailExponentReport r = tail_exponent_check(s);
        CHECK(r.slope == doctest::Approx(-0.5).epsilon(1e-9));
        CHECK(!r.upward_trend);
        CHECK(r.slope_in_window);
        CHECK(r.pass);
        CHECK(r.max_sqrt_t_survival == doctest::Approx(0.4).epsilon(1e-9));
    }
    SUBCASE("c / t is steeper than the bound") {
        std::vector<TailPoint> s;
        for (double t : ts) s.push_back({t, 20.0 / t, 1e-4});
        const TailExponentReport r = tail_exponent_check(s);
        CHECK(r.slope == doctest::Approx(-1.0).epsilon(1e-9));
        CHECK(r.steeper_than_bound);
        CHECK(!r.slope_in_window);
        CHECK(!r.pass);
    }
    SUBCASE("degenerate all-one series is flagged") {
        std::vector<TailPoint> s;
        for (double t : ts) s.push_back({t, 1.0, 0.0});
        const TailExponentReport r = tail_exponent_check(s);
        CHECK(r.degenerate);
        CHECK(!r.pass);
    }
    SUBCASE("input validation") {
        std::vector<TailPoint> s = {{1, 0.5, 0.1}, {2, 0.4, 0.1}};
        CHECK_THROWS_AS(tail_exponent_check(s), std::invalid_argument);
    }
}
