#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "grsnet/rational.hpp"

namespace grsnet {

// One-step displacement law of a single path: P(0) = p and
// P(+-k) = q^(2k-1) * p * (q + p/2) for k >= 1.
double increment_pmf(double p, std::int64_t k);
BigRat increment_pmf_exact(const RationalP& p, std::int64_t k);

// Variance of the one-step displacement, q(1+q^2) / (p^2 (1+q)^2).
double sigma2(double p);
BigRat sigma2_exact(const RationalP& p);

// Fourth moment of the one-step displacement (for variance-of-variance
// error bars in Monte Carlo checks). Derived from the pmf series.
double increment_fourth_moment(double p);

// Upper bound p^2 + (1-q^2) q^2 / (2 (1+q^2)) on the probability that the
// gap between two paths at separation m persists for one step.
double c1_bound(double p);
BigRat c1_bound_exact(const RationalP& p);

// Derived model constants bundle.
struct ModelConstants {
    double p;
    double q;
    double sigma2;
    double c1_bound;
    double p_prime;  // p / (2 - p)
};
ModelConstants model_constants(double p);

// Independent oracle: the one-step displacement law recovered by summing
// over every open/closed pattern of the window [-k_max, k_max] in the next
// level (tie bit marginalized analytically). Exact for |k| <= k_max up to
// floating-point rounding; Kahan-compensated accumulation. Returns pmf
// values indexed by k + k_max.
std::vector<double> increment_pmf_by_window_enumeration(double p, std::int64_t k_max);

// ---- tail exponent report ------------------------------------------------

struct TailPoint {
    double t;
    double survival;  // estimate of P(tau > t)
    double stderr_;   // its standard error
};

struct TailExponentReport {
    double max_sqrt_t_survival = 0.0;   // running max of sqrt(t) * survival
    double slope = 0.0;                 // OLS slope of log survival vs log t
    double slope_stderr = 0.0;
    bool upward_trend = false;          // sqrt(t)*survival rising beyond 3 sigma
    bool slope_in_window = false;       // slope in [-0.65, -0.35]
    bool degenerate = false;            // all-one or all-zero survivals
    bool steeper_than_bound = false;    // slope clearly below -0.65 (still obeys the bound)
    bool pass = false;
};

// Needs >= 5 horizons spanning at least two decades.
TailExponentReport tail_exponent_check(const std::vector<TailPoint>& series);

}  // namespace grsnet
