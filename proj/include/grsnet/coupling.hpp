#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "grsnet/errors.hpp"
#include "grsnet/rational.hpp"

namespace grsnet {

// ---- conditioning paths ----------------------------------------------------

// A conditioning trajectory pi: start abscissa at level 0 plus one increment
// per level. pi(k) = start + increments[0] + ... + increments[k-1].
struct CondPath {
    std::int64_t start = 0;
    std::vector<std::int64_t> increments;

    std::int64_t length() const { return static_cast<std::int64_t>(increments.size()); }
    std::int64_t at(std::int64_t k) const;

    // Path with opposite increments (the reflection partner in the symmetry
    // identity for right events).
    CondPath reflected() const;
};

struct IncrementOrderWitness {
    bool ordered = false;
    std::int64_t bad_k = -1;  // first violating window [k, l] when not ordered
    std::int64_t bad_l = -1;
};

// pi1 precedes pi2 iff every increment window of pi1 is dominated:
// pi1(l) - pi1(k) <= pi2(l) - pi2(k) for all 0 <= k <= l.
IncrementOrderWitness check_increment_order(const CondPath& pi1, const CondPath& pi2);

// ---- conditional environment law -------------------------------------------

enum class SiteClass : std::uint8_t { Free, ForcedOpen, ForcedClosed, FarEndpoint };

// Law of (Omega, Upsilon) given that the traced path from (pi.start, 0)
// equals pi. Per level k >= 1: the path site pi(k) is open; the interior of
// the interval between pi(k) and its reflection 2 pi(k-1) - pi(k) is closed;
// the far endpoint is open with probability p' = p/(2-p); when the far
// endpoint is open the tie bit upsilon(pi(k-1), k-1) is forced toward the
// move, otherwise it stays fair. Everything else is unchanged.
class ConditionalLaw {
  public:
    ConditionalLaw(const CondPath& path, const RationalP& p);

    const CondPath& path() const { return path_; }
    const RationalP& parameter() const { return p_; }

    SiteClass classify(std::int64_t x, std::int64_t level) const;
    std::int64_t far_endpoint(std::int64_t level) const;  // 2 pi(k-1) - pi(k)
    bool has_far(std::int64_t level) const;               // increment != 0

    // Marginal openness probability of a site.
    BigRat open_prob(std::int64_t x, std::int64_t level) const;

    // Forced tie-bit value at (pi(k-1), k-1) when the far endpoint of level k
    // is open: 1 for a rightward increment, 0 for a leftward one.
    std::uint8_t forced_upsilon(std::int64_t level) const;

  private:
    CondPath path_;
    RationalP p_;
};

// ---- exact event probability (trajectory DP) --------------------------------

// Exact bounds on P(the path from (start, 0) has not met pi by level H),
// which is also P(X_start(H) < X_j(H) | X_j = pi) for start < j. The DP
// truncates the roaming window on the left; everything else is exact, and
// the truncated mass is returned, so [lower, lower + escaped] brackets the
// true probability.
struct EventProbability {
    BigRat lower;
    BigRat escaped;
    BigRat coalesced;
    BigRat upper() const { return lower + escaped; }
};

struct DpOptions {
    std::int64_t pad = 0;           // left pad columns; 0 = auto from p
    std::int64_t max_states = 400000;  // budget guard on window * levels
};

EventProbability exact_conditional_probability(const CondPath& pi, const RationalP& p,
                                               std::int64_t start,
                                               const DpOptions& opt = {});

// ---- monotonicity sweep ------------------------------------------------------

struct GridSpec {
    std::int64_t horizon = 2;        // path length H
    std::int64_t max_increment = 2;  // base-path increments range over [-max, max]
    std::int64_t k_offset = 1;       // left event starts at j - k_offset
    int workers = 1;
    DpOptions dp;
};

struct PairVerdict {
    CondPath pi1, pi2;
    std::int64_t t0 = 0;
    BigRat left1_low, left1_esc;   // P(left event | pi1) bounds
    BigRat left2_low, left2_esc;   // P(left event | pi2) bounds
    BigRat right1_low, right1_esc; // P(right event | pi1) bounds (via reflection)
    BigRat right2_low, right2_esc;
    bool monotone1_violated = false;
    bool monotone2_violated = false;
    bool inconclusive = false;  // bands overlap within the escape residual
};

struct MonotonicityReport {
    std::vector<PairVerdict> pairs;
    std::int64_t n_pairs = 0;
    std::int64_t n_violations = 0;
    std::int64_t n_inconclusive = 0;
    double max_escape = 0.0;
};

// Enumerates canonical pairs (pi2 = pi1 except one +1 increment at t0) on the
// grid and checks both conditional-monotonicity inequalities exactly.
MonotonicityReport verify_monotonicity(const GridSpec& grid, const RationalP& p);

// ---- couplings ---------------------------------------------------------------

enum class CouplingCase { Case1, Auxiliary, KGe2 };

// Two readings of the k>=2 coupling's third rule: Literal places the biased
// tie bit at the rewritten site itself; PathPartner ties the path's own
// pending tie bit instead. The pushforward check arbitrates.
enum class Rule3Reading { Literal, PathPartner };

struct CouplingOptions {
    Rule3Reading rule3 = Rule3Reading::PathPartner;
    std::int64_t window_halfwidth = 6;  // columns each side of pi1(t0)
};

// Environment realization on a column window at one level plus the pending
// tie bit of the previous level.
struct LevelRealization {
    std::int64_t lo = 0;
    std::int64_t hi = -1;
    std::vector<std::uint8_t> omega;
    std::vector<std::uint8_t> upsilon;
    std::uint8_t dep_upsilon = 0;  // upsilon(pi(t0-1), t0-1)

    std::uint8_t om(std::int64_t x) const { return omega[static_cast<std::size_t>(x - lo)]; }
    std::uint8_t up(std::int64_t x) const { return upsilon[static_cast<std::size_t>(x - lo)]; }
};

// Auxiliary randomness a coupling application may consume.
struct CouplingNoise {
    std::uint8_t xi = 0;        // Bernoulli(1/(2-p)), rule 3
    std::uint8_t fresh_far = 0; // Bernoulli(p'), auxiliary case with flat step
    std::uint8_t fresh_tilde = 0;            // fair bit for rule 3's tie fallback
    std::uint8_t fresh_dep = 0;              // fair fallback for the pending tie bit
    std::vector<std::uint8_t> fresh_upsilon; // fair bits for freshened tie sites
};

// Maps a level-t0 realization conditioned on pi1 to one conditioned on pi2
// (pi2 = pi1 + 1 from t0 on). The input window must cover [lo-1, hi+1]; the
// output is reported on [lo+1, hi-1].
LevelRealization apply_coupling(CouplingCase c, const LevelRealization& r1,
                                const CondPath& pi1, const CondPath& pi2,
                                std::int64_t t0, const CouplingNoise& noise,
                                const CouplingOptions& opt = {});

struct PushforwardReport {
    CouplingCase coupling = CouplingCase::Case1;
    std::int64_t t0 = 0;
    bool exact_on_event_field = false;  // all omegas + ties strictly left of pi2
    bool exact_on_full_field = false;   // including on-path tie bits
    std::vector<std::string> deviations;  // human-readable mismatch notes
};

// Pushes the exact conditional law given pi1 through the coupling and
// compares against the law given pi2, variable by variable, on the coupling
// window at level t0 (other levels are pure column shifts, checked
// structurally inside).
PushforwardReport verify_pushforward(CouplingCase c, const CondPath& pi1,
                                     const CondPath& pi2, std::int64_t t0,
                                     const RationalP& p, const CouplingOptions& opt = {});

// ---- realization-wise containment --------------------------------------------

struct ContainmentReport {
    CouplingCase coupling = CouplingCase::Case1;
    // number of (realization, tie-branch) leaves where the source event held
    // but the image event failed; must be 0 for Case1 (full event) and for
    // the auxiliary/k>=2 variants of the statement.
    std::int64_t violations = 0;
    std::int64_t leaves = 0;
    double violating_mass = 0.0;
    double aborted_mass = 0.0;  // traces that left the window (excluded)
    // Auxiliary coupling only: leaves where the full-horizon event order
    // breaks (allowed; reported).
    std::int64_t full_event_counterexamples = 0;
};

struct ContainmentOptions {
    std::int64_t window_halfwidth = 4;  // columns each side of the start span
    std::int64_t max_atoms = 1 << 24;
    CouplingOptions coupling;
};

// Checks the coupling's containment statement realization by realization on
// an enumerable window: Case1 checks the full-horizon event, Auxiliary the
// time-t0 event, KGe2 the gap domination D1 >= k -> D2 >= k for k >= 2.
ContainmentReport verify_containment(CouplingCase c, const CondPath& pi1,
                                     const CondPath& pi2, std::int64_t t0,
                                     std::int64_t start, const RationalP& p,
                                     const ContainmentOptions& opt = {});

// ---- conditional independence -------------------------------------------------

struct CondIndepReport {
    bool exact = false;
    std::int64_t outcome_pairs = 0;
    double aborted_mass = 0.0;
    std::string note;
};

struct CondIndepOptions {
    std::int64_t halfwidth = 4;  // columns each side of the path
    std::int64_t max_atoms = 1 << 24;
};

// Exact factorization check: given X_j = pi, the trace of the path started
// just left of pi and the trace started just right are independent. Joint
// law of the two trace tuples (with window-escape sentinels) must equal the
// product of its marginals, exactly.
CondIndepReport verify_conditional_independence(const CondPath& pi, const RationalP& p,
                                                const CondIndepOptions& opt = {});

}  // namespace grsnet
