#pragma once

#include <cstdint>
#include <vector>

namespace grsnet {

// Standard normal CDF, accurate to ~1 ulp.
double normal_cdf(double x);

struct BmPairSpec {
    double epsilon;        // initial separation, > 0
    double t;              // elapsed time, > 0
    double diffusion = 1;  // per-path diffusion coefficient
};

// Probability that two coalescing Brownian motions started epsilon apart
// have not met by time t: 2*Phi(epsilon / (sqrt(2 t) * diffusion)) - 1.
double bw_meet_survival(const BmPairSpec& spec);

struct BmStart {
    double y;  // position
    double s;  // start time
};

// One path of a coalescing set on the simulation grid.
struct BmPath {
    BmStart start;
    std::vector<double> values;   // positions from the first grid point >= start.s
    std::int64_t first_index;     // grid index of values[0]
    std::int64_t merged_into;     // index of the surviving path, or -1
    double merge_time;            // grid time of the merge, or +inf
};

struct CoalescingBmResult {
    double dt;
    std::vector<BmPath> paths;
    std::int64_t survivors;  // distinct paths at the horizon
};

// Euler simulation of coalescing Brownian motions. Starts must be ordered in
// (s, y) with equal-time starts strictly increasing in y. Adjacent pairs
// merge when their order would invert at a grid point or when the
// Brownian-bridge crossing probability for the step fires; the bridge term
// removes the upward survival bias of a plain grid check.
CoalescingBmResult simulate_coalescing_bm(const std::vector<BmStart>& starts,
                                          double step, double horizon,
                                          std::uint64_t seed, double diffusion = 1.0);

}  // namespace grsnet
