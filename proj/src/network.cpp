#include "grsnet/network.hpp"

#include <algorithm>
#include <cassert>

namespace grsnet {

SiteCoord hop(const Environment& env, SiteCoord z) {
    const std::int64_t lvl = z.level + 1;
    if (env.site_state({z.x, lvl}).omega) return {z.x, lvl};
    const std::int64_t cap = env.search_cap();
    for (std::int64_t d = 1; d <= cap; ++d) {
        const bool left = env.site_state({z.x - d, lvl}).omega != 0;
        const bool right = env.site_state({z.x + d, lvl}).omega != 0;
        if (left && right)
            return {env.site_state(z).upsilon ? z.x + d : z.x - d, lvl};
        if (left) return {z.x - d, lvl};
        if (right) return {z.x + d, lvl};
    }
    throw SearchOverflow("hop: no open site within cap " + std::to_string(cap) +
                         " of x=" + std::to_string(z.x) +
                         ", level=" + std::to_string(lvl));
}

LatticePath trace(const Environment& env, SiteCoord z, std::int64_t steps) {
    if (steps < 0) throw std::invalid_argument("trace: steps must be >= 0");
    LatticePath path;
    path.start = z;
    path.positions.reserve(static_cast<std::size_t>(steps) + 1);
    path.positions.push_back(z.x);
    SiteCoord cur = z;
    for (std::int64_t k = 0; k < steps; ++k) {
        cur = hop(env, cur);
        path.positions.push_back(cur.x);
    }
    return path;
}

namespace {

void check_pair(SiteCoord u, SiteCoord v) {
    if (u.level != v.level)
        throw std::invalid_argument("difference process: starts must share a level");
    if (u.x > v.x)
        throw std::invalid_argument("difference process: require u.x <= v.x");
}

}  // namespace

DifferenceProcess difference_process(const Environment& env, SiteCoord u, SiteCoord v,
                                     std::int64_t horizon) {
    check_pair(u, v);
    DifferenceProcess dp;
    dp.u = u;
    dp.v = v;
    dp.values.reserve(static_cast<std::size_t>(horizon) + 1);
    SiteCoord cu = u, cv = v;
    dp.values.push_back(cv.x - cu.x);
    for (std::int64_t t = 1; t <= horizon; ++t) {
        if (cu.x == cv.x) {
            // Coalesced: absorbed at 0 from here on.
            dp.values.push_back(0);
            continue;
        }
        cu = hop(env, cu);
        cv = hop(env, cv);
        dp.values.push_back(cv.x - cu.x);
    }
    return dp;
}

CoalescenceTime coalescence_time(const Environment& env, SiteCoord u, SiteCoord v,
                                 std::int64_t horizon) {
    check_pair(u, v);
    SiteCoord cu = u, cv = v;
    for (std::int64_t t = 0; t <= horizon; ++t) {
        if (cu.x == cv.x) return {t, false};
        if (t == horizon) break;
        cu = hop(env, cu);
        cv = hop(env, cv);
    }
    return {horizon, true};
}

std::vector<std::int64_t> eta_profile(const Environment& env, std::int64_t a,
                                      std::int64_t b, std::int64_t t0, std::int64_t t) {
    if (a > b) throw std::invalid_argument("eta: require a <= b");
    if (t < 1) throw std::invalid_argument("eta: require t >= 1");
    std::vector<std::int64_t> cur;
    cur.reserve(static_cast<std::size_t>(b - a) + 1);
    for (std::int64_t x = a; x <= b; ++x) cur.push_back(x);
    std::vector<std::int64_t> profile;
    profile.reserve(static_cast<std::size_t>(t));
    for (std::int64_t step = 0; step < t; ++step) {
        if (cur.size() == 1) {
            // A single walker never splits; the count is 1 for good.
            profile.push_back(1);
            continue;
        }
        const std::int64_t lvl = t0 + step;
        std::vector<std::int64_t> next;
        next.reserve(cur.size());
        for (std::int64_t x : cur) {
            const std::int64_t nx = hop(env, {x, lvl}).x;
            assert(next.empty() || next.back() <= nx);  // non-crossing
            if (next.empty() || next.back() != nx) next.push_back(nx);
        }
        cur = std::move(next);
        profile.push_back(static_cast<std::int64_t>(cur.size()));
    }
    return profile;
}

std::int64_t eta_count(const Environment& env, std::int64_t a, std::int64_t b,
                       std::int64_t t0, std::int64_t t) {
    return eta_profile(env, a, b, t0, t).back();
}

}  // namespace grsnet
