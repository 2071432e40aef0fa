#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "grsnet/environment.hpp"

namespace grsnet {

// Raised when a hop search finds no open site within the environment's hard
// cap. With the cap sized for < 2^-128 miss probability this signals a
// misconfigured p rather than bad luck.
class SearchOverflow : public std::runtime_error {
  public:
    explicit SearchOverflow(const std::string& what) : std::runtime_error(what) {}
};

// A traced trajectory: positions[k] is the abscissa at level start.level + k.
struct LatticePath {
    SiteCoord start;
    std::vector<std::int64_t> positions;
};

// Gap process Z_t = X^v_t - X^u_t for two same-level starts with u.x <= v.x.
// values[t] >= 0 always, and once 0 it stays 0.
struct DifferenceProcess {
    SiteCoord u;
    SiteCoord v;
    std::vector<std::int64_t> values;
};

struct CoalescenceTime {
    std::int64_t tau = 0;
    bool censored = false;
};

// Successor of z: the closest open site in the next level, ties broken by
// upsilon(z) (0 = left, 1 = right).
SiteCoord hop(const Environment& env, SiteCoord z);

// Iterate hop `steps` times; the returned path has steps+1 positions.
LatticePath trace(const Environment& env, SiteCoord z, std::int64_t steps);

// Z_t for t = 0..horizon, both paths traced in the same environment.
DifferenceProcess difference_process(const Environment& env, SiteCoord u, SiteCoord v,
                                     std::int64_t horizon);

// First t with Z_t = 0, censored at the horizon. Short-circuits once the
// paths meet.
CoalescenceTime coalescence_time(const Environment& env, SiteCoord u, SiteCoord v,
                                 std::int64_t horizon);

// Number of distinct abscissas at level t0+t among the paths started from
// every integer in [a,b] x {t0}. Non-crossing keeps the walker set sorted, so
// coalesced walkers are merged eagerly.
std::int64_t eta_count(const Environment& env, std::int64_t a, std::int64_t b,
                       std::int64_t t0, std::int64_t t);

// Distinct-count trajectory for levels t0+1 .. t0+t (diagnostics/tests).
std::vector<std::int64_t> eta_profile(const Environment& env, std::int64_t a,
                                      std::int64_t b, std::int64_t t0, std::int64_t t);

}  // namespace grsnet
