#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "grsnet/network.hpp"

using namespace grsnet;

namespace {

// Scan a fixed environment for a site whose next-level neighborhood matches
// a predicate; the model definition is then checked on real field data.
template <typename Pred>
SiteCoord find_site(const Environment& env, Pred pred) {
    for (std::int64_t l = 0; l < 2000; ++l)
        for (std::int64_t x = -50; x <= 50; ++x)
            if (pred(SiteCoord{x, l})) return {x, l};
    FAIL("no matching site found");
    return {0, 0};
}

}  // namespace

TEST_CASE("hop lands straight down when the site above is open") {
    const Environment env(11, 0.5);
    const SiteCoord z = find_site(
        env, [&](SiteCoord s) { return env.site_state({s.x, s.level + 1}).omega == 1; });
    const SiteCoord w = hop(env, z);
    CHECK(w.x == z.x);
    CHECK(w.level == z.level + 1);
}

TEST_CASE("hop picks the unique nearest open site") {
    const Environment env(11, 0.5);
    const SiteCoord z = find_site(env, [&](SiteCoord s) {
        const std::int64_t l = s.level + 1;
        return !env.site_state({s.x, l}).omega && !env.site_state({s.x - 1, l}).omega &&
               !env.site_state({s.x + 1, l}).omega && env.site_state({s.x - 2, l}).omega &&
               !env.site_state({s.x + 2, l}).omega;
    });
    CHECK(hop(env, z).x == z.x - 2);
}

TEST_CASE("two-sided ties follow the tie bit of the current site") {
    const Environment env(11, 0.5);
    for (std::uint8_t want : {0, 1}) {
        const SiteCoord z = find_site(env, [&](SiteCoord s) {
            const std::int64_t l = s.level + 1;
            return !env.site_state({s.x, l}).omega && env.site_state({s.x - 1, l}).omega &&
                   env.site_state({s.x + 1, l}).omega && env.site_state(s).upsilon == want;
        });
        CHECK(hop(env, z).x == (want ? z.x + 1 : z.x - 1));
    }
}

TEST_CASE("p = 1 freezes every path") {
    const Environment env(3, 1.0);
    const LatticePath path = trace(env, {5, 2}, 100);
    for (std::int64_t v : path.positions) CHECK(v == 5);
}

TEST_CASE("trace basics") {
    const Environment env(17, 0.5);
    SUBCASE("zero steps is the identity") {
        const LatticePath p = trace(env, {3, 4}, 0);
        CHECK(p.positions.size() == 1);
        CHECK(p.positions[0] == 3);
    }
    SUBCASE("retracing is deterministic") {
        const LatticePath a = trace(env, {0, 0}, 200);
        const LatticePath b = trace(env, {0, 0}, 200);
        CHECK(a.positions == b.positions);
    }
    SUBCASE("negative steps rejected") {
        CHECK_THROWS_AS(trace(env, {0, 0}, -1), std::invalid_argument);
    }
}

TEST_CASE("paths in one environment never cross") {
    const Environment env(23, 0.4);
    for (std::int64_t gap = 1; gap <= 7; gap += 3) {
        const LatticePath a = trace(env, {0, 0}, 300);
        const LatticePath b = trace(env, {gap, 0}, 300);
        for (std::size_t t = 0; t < a.positions.size(); ++t)
            CHECK(a.positions[t] <= b.positions[t]);
    }
}

TEST_CASE("difference process") {
    const Environment env(29, 0.5);
    SUBCASE("identical starts stay at zero") {
        const DifferenceProcess d = difference_process(env, {4, 1}, {4, 1}, 50);
        for (std::int64_t v : d.values) CHECK(v == 0);
    }
    SUBCASE("initial value is the starting gap") {
        const DifferenceProcess d = difference_process(env, {0, 0}, {6, 0}, 10);
        CHECK(d.values[0] == 6);
    }
    SUBCASE("nonnegative and absorbed at zero") {
        const DifferenceProcess d = difference_process(env, {0, 0}, {2, 0}, 400);
        bool hit_zero = false;
        for (std::int64_t v : d.values) {
            CHECK(v >= 0);
            if (hit_zero) CHECK(v == 0);
            if (v == 0) hit_zero = true;
        }
        CHECK(hit_zero);  // p = 0.5 pairs at gap 2 coalesce well before 400
    }
    SUBCASE("mismatched levels rejected") {
        CHECK_THROWS_AS(difference_process(env, {0, 0}, {1, 1}, 5), std::invalid_argument);
        CHECK_THROWS_AS(difference_process(env, {2, 0}, {1, 0}, 5), std::invalid_argument);
    }
}

TEST_CASE("coalescence time") {
    const Environment env(31, 0.5);
    SUBCASE("equal starts meet immediately") {
        const CoalescenceTime ct = coalescence_time(env, {9, 3}, {9, 3}, 10);
        CHECK(ct.tau == 0);
        CHECK(!ct.censored);
    }
    SUBCASE("p = 1 never meets") {
        const Environment frozen(31, 1.0);
        const CoalescenceTime ct = coalescence_time(frozen, {0, 0}, {1, 0}, 1000);
        CHECK(ct.censored);
        CHECK(ct.tau == 1000);
    }
    SUBCASE("matches the first zero of the difference process") {
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            const Environment e(seed, 0.5);
            const std::int64_t horizon = 500;
            const CoalescenceTime ct = coalescence_time(e, {0, 0}, {3, 0}, horizon);
            const DifferenceProcess d = difference_process(e, {0, 0}, {3, 0}, horizon);
            if (ct.censored) {
                for (std::int64_t v : d.values) CHECK(v > 0);
            } else {
                CHECK(d.values[static_cast<std::size_t>(ct.tau)] == 0);
                for (std::int64_t t = 0; t < ct.tau; ++t)
                    CHECK(d.values[static_cast<std::size_t>(t)] > 0);
            }
        }
    }
}

TEST_CASE("eta counts distinct endpoints") {
    SUBCASE("single start") {
        const Environment env(37, 0.5);
        CHECK(eta_count(env, 2, 2, 0, 10) == 1);
    }
    SUBCASE("p = 1 keeps all walkers distinct") {
        const Environment env(37, 1.0);
        CHECK(eta_count(env, 0, 3, 0, 25) == 4);
    }
    SUBCASE("profile is non-increasing") {
        const Environment env(41, 0.5);
        const auto profile = eta_profile(env, 0, 12, 0, 200);
        for (std::size_t i = 1; i < profile.size(); ++i) CHECK(profile[i] <= profile[i - 1]);
        CHECK(profile.front() <= 13);
    }
    SUBCASE("eta >= 2 iff the boundary pair has not met") {
        for (std::uint64_t seed = 100; seed < 130; ++seed) {
            const Environment env(seed, 0.5);
            const std::int64_t t = 60;
            const std::int64_t count = eta_count(env, 0, 8, 0, t);
            const CoalescenceTime ct = coalescence_time(env, {0, 0}, {8, 0}, t);
            CHECK((count >= 2) == ct.censored);
        }
    }
    SUBCASE("bad arguments rejected") {
        const Environment env(1, 0.5);
        CHECK_THROWS_AS(eta_count(env, 3, 1, 0, 5), std::invalid_argument);
        CHECK_THROWS_AS(eta_count(env, 0, 1, 0, 0), std::invalid_argument);
    }
}

TEST_CASE("statistics are translation invariant") {
    // Same experiment from two base points; survival frequencies agree
    // within a joint 4-sigma band.
    const std::int64_t n = 4000, horizon = 100;
    auto survival = [&](SiteCoord u, SiteCoord v, std::uint64_t salt) {
        std::int64_t alive = 0;
        for (std::int64_t i = 0; i < n; ++i) {
            const Environment env(replicate_seed(salt, static_cast<std::uint64_t>(i)), 0.5);
            if (coalescence_time(env, u, v, horizon).censored) ++alive;
        }
        return static_cast<double>(alive) / static_cast<double>(n);
    };
    const double a = survival({0, 0}, {1, 0}, 7);
    const double b = survival({13, -5}, {14, -5}, 8);
    const double se = std::sqrt(2.0 * 0.25 / static_cast<double>(n));
    CHECK(std::abs(a - b) < 4.0 * se);
}
