#include "grsnet/coupling.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <thread>

namespace grsnet {

// ---- conditioning paths -----------------------------------------------------

std::int64_t CondPath::at(std::int64_t k) const {
    std::int64_t pos = start;
    for (std::int64_t i = 0; i < k; ++i) pos += increments[static_cast<std::size_t>(i)];
    return pos;
}

CondPath CondPath::reflected() const {
    CondPath r;
    r.start = start;
    r.increments.reserve(increments.size());
    for (std::int64_t d : increments) r.increments.push_back(-d);
    return r;
}

IncrementOrderWitness check_increment_order(const CondPath& pi1, const CondPath& pi2) {
    if (pi1.length() != pi2.length())
        throw std::invalid_argument("check_increment_order: length mismatch");
    const std::int64_t n = pi1.length();
    IncrementOrderWitness w;
    for (std::int64_t k = 0; k <= n; ++k) {
        std::int64_t window = 0;
        for (std::int64_t l = k + 1; l <= n; ++l) {
            window += pi2.increments[static_cast<std::size_t>(l - 1)] -
                      pi1.increments[static_cast<std::size_t>(l - 1)];
            if (window < 0) {
                w.ordered = false;
                w.bad_k = k;
                w.bad_l = l;
                return w;
            }
        }
    }
    w.ordered = true;
    return w;
}

// ---- conditional law --------------------------------------------------------

ConditionalLaw::ConditionalLaw(const CondPath& path, const RationalP& p)
    : path_(path), p_(p) {
    if (path.length() < 1)
        throw std::invalid_argument("ConditionalLaw: path needs at least one step");
}

bool ConditionalLaw::has_far(std::int64_t level) const {
    return level >= 1 && level <= path_.length() &&
           path_.increments[static_cast<std::size_t>(level - 1)] != 0;
}

std::int64_t ConditionalLaw::far_endpoint(std::int64_t level) const {
    return 2 * path_.at(level - 1) - path_.at(level);
}

std::uint8_t ConditionalLaw::forced_upsilon(std::int64_t level) const {
    // A tie that resolved into the recorded move: rightward move means the
    // tie bit pointed right.
    return path_.increments[static_cast<std::size_t>(level - 1)] > 0 ? 1 : 0;
}

SiteClass ConditionalLaw::classify(std::int64_t x, std::int64_t level) const {
    if (level < 1 || level > path_.length()) return SiteClass::Free;
    const std::int64_t e = path_.at(level);
    if (x == e) return SiteClass::ForcedOpen;
    const std::int64_t delta = path_.increments[static_cast<std::size_t>(level - 1)];
    if (delta == 0) return SiteClass::Free;
    const std::int64_t far = 2 * path_.at(level - 1) - e;
    if (x == far) return SiteClass::FarEndpoint;
    if (x > std::min(e, far) && x < std::max(e, far)) return SiteClass::ForcedClosed;
    return SiteClass::Free;
}

BigRat ConditionalLaw::open_prob(std::int64_t x, std::int64_t level) const {
    switch (classify(x, level)) {
        case SiteClass::Free: return p_.p();
        case SiteClass::ForcedOpen: return BigRat(1);
        case SiteClass::ForcedClosed: return BigRat(0);
        case SiteClass::FarEndpoint: return p_.p_prime();
    }
    return BigRat(0);
}

// ---- trajectory DP ----------------------------------------------------------

namespace {

struct SiteFactors {
    BigRat open;  // probability the site is open (landing factor)
    BigRat closed;  // probability the site is closed (pass-over factor)
    BigRat tie;   // closed, or open with the tie resolved away: closed + open/2
};

SiteFactors site_factors(const ConditionalLaw& law, std::int64_t x, std::int64_t level) {
    const BigRat open = law.open_prob(x, level);
    SiteFactors f;
    f.open = open;
    f.closed = 1 - open;
    f.tie = f.closed + open / 2;
    return f;
}

std::int64_t auto_pad(const RationalP& p) {
    const double q = to_double(p.q());
    const double bits = std::log2(1.0 / q);
    return static_cast<std::int64_t>(std::ceil(96.0 / (2.0 * bits))) + 16;
}

}  // namespace

EventProbability exact_conditional_probability(const CondPath& pi, const RationalP& p,
                                               std::int64_t start, const DpOptions& opt) {
    const std::int64_t H = pi.length();
    if (H < 1) throw std::invalid_argument("exact_conditional_probability: empty path");
    if (start >= pi.start)
        throw std::invalid_argument("exact_conditional_probability: start must be left of the path");
    const ConditionalLaw law(pi, p);

    std::int64_t lo_path = pi.start;
    for (std::int64_t t = 1; t <= H; ++t) {
        lo_path = std::min(lo_path, pi.at(t));
        if (law.has_far(t)) lo_path = std::min(lo_path, law.far_endpoint(t));
    }
    const std::int64_t pad = opt.pad > 0 ? opt.pad : auto_pad(p);
    const std::int64_t x_lo = std::min(start, lo_path) - pad;
    std::int64_t hi_path = pi.start;
    for (std::int64_t t = 1; t <= H; ++t) hi_path = std::max(hi_path, pi.at(t));
    const std::int64_t width = hi_path - x_lo + 1;
    if (width * (H + 1) > opt.max_states)
        throw BudgetExceeded("exact_conditional_probability: DP window exceeds budget");

    const auto idx = [x_lo](std::int64_t y) { return static_cast<std::size_t>(y - x_lo); };
    std::vector<BigRat> dp(static_cast<std::size_t>(width));
    dp[idx(start)] = 1;

    EventProbability out;
    out.lower = 0;
    out.escaped = 0;
    out.coalesced = 0;

    for (std::int64_t lvl = 1; lvl <= H; ++lvl) {
        const std::int64_t e = pi.at(lvl);
        std::vector<BigRat> next(static_cast<std::size_t>(width));
        const std::int64_t prev_pos = pi.at(lvl - 1);
        for (std::int64_t x = x_lo; x < prev_pos; ++x) {
            const BigRat& mass = dp[idx(x)];
            if (mass.is_zero()) continue;
            // One conditioned hop from x into level lvl.
            BigRat run(1);
            BigRat accounted(0);
            for (std::int64_t d = 0;; ++d) {
                const std::int64_t yl = x - d;
                const std::int64_t yr = x + d;
                if (d == 0) {
                    const SiteFactors f = site_factors(law, x, lvl);
                    if (!f.open.is_zero()) {
                        const BigRat land = f.open;
                        accounted += land;
                        if (x == e) out.coalesced += mass * land;
                        else next[idx(x)] += mass * land;
                    }
                    run *= f.closed;
                } else {
                    const SiteFactors fl = site_factors(law, yl, lvl);
                    const SiteFactors fr = site_factors(law, yr, lvl);
                    if (!fl.open.is_zero()) {
                        const BigRat land = run * fl.open * fr.tie;
                        if (!land.is_zero()) {
                            accounted += land;
                            if (yl == e) out.coalesced += mass * land;
                            else if (yl < x_lo) out.escaped += mass * land;
                            else next[idx(yl)] += mass * land;
                        }
                    }
                    if (!fr.open.is_zero()) {
                        const BigRat land = run * fr.open * fl.tie;
                        if (!land.is_zero()) {
                            accounted += land;
                            if (yr == e) out.coalesced += mass * land;
                            else next[idx(yr)] += mass * land;
                        }
                    }
                    run *= fl.closed * fr.closed;
                }
                if (run.is_zero()) break;
            }
            if (accounted != 1)
                throw std::logic_error("exact_conditional_probability: hop mass leak");
        }
        dp = std::move(next);
    }
    for (const BigRat& mass : dp) out.lower += mass;
    if (out.lower + out.escaped + out.coalesced != 1)
        throw std::logic_error("exact_conditional_probability: DP mass leak");
    return out;
}

// ---- monotonicity sweep -------------------------------------------------------

MonotonicityReport verify_monotonicity(const GridSpec& grid, const RationalP& p) {
    const std::int64_t H = grid.horizon;
    const std::int64_t D = grid.max_increment;
    if (H < 1 || D < 0) throw std::invalid_argument("verify_monotonicity: bad grid");

    // Enumerate the canonical pairs up front, then evaluate them (in
    // parallel if asked; verdicts land in their slots, so the report is
    // independent of scheduling).
    std::vector<std::pair<std::vector<std::int64_t>, std::int64_t>> tasks;
    std::vector<std::int64_t> inc(static_cast<std::size_t>(H), -D);
    for (;;) {
        for (std::int64_t t0 = 1; t0 <= H; ++t0) tasks.push_back({inc, t0});
        std::size_t i = 0;
        for (; i < inc.size(); ++i) {
            if (inc[i] < D) {
                ++inc[i];
                break;
            }
            inc[i] = -D;
        }
        if (i == inc.size()) break;
    }

    const std::int64_t start = -grid.k_offset;
    std::vector<PairVerdict> verdicts(tasks.size());
    const auto run_task = [&](std::size_t idx) {
        const auto& [base, t0] = tasks[idx];
        CondPath pi1;
        pi1.start = 0;
        pi1.increments = base;
        CondPath pi2 = pi1;
        pi2.increments[static_cast<std::size_t>(t0 - 1)] += 1;

        PairVerdict v;
        v.pi1 = pi1;
        v.pi2 = pi2;
        v.t0 = t0;
        const EventProbability l1 = exact_conditional_probability(pi1, p, start, grid.dp);
        const EventProbability l2 = exact_conditional_probability(pi2, p, start, grid.dp);
        const EventProbability r1 =
            exact_conditional_probability(pi1.reflected(), p, start, grid.dp);
        const EventProbability r2 =
            exact_conditional_probability(pi2.reflected(), p, start, grid.dp);
        v.left1_low = l1.lower;
        v.left1_esc = l1.escaped;
        v.left2_low = l2.lower;
        v.left2_esc = l2.escaped;
        v.right1_low = r1.lower;
        v.right1_esc = r1.escaped;
        v.right2_low = r2.lower;
        v.right2_esc = r2.escaped;

        // monotone1: P(left | pi1) <= P(left | pi2).
        if (l1.lower > l2.lower + l2.escaped) v.monotone1_violated = true;
        else if (!(l1.lower + l1.escaped <= l2.lower)) v.inconclusive = true;
        // monotone2: P(right | pi1) >= P(right | pi2); right events are left
        // events of the reflected paths (symmetry identity).
        if (r2.lower > r1.lower + r1.escaped) v.monotone2_violated = true;
        else if (!(r2.lower + r2.escaped <= r1.lower)) v.inconclusive = true;
        verdicts[idx] = std::move(v);
    };

    if (grid.workers <= 1) {
        for (std::size_t i = 0; i < tasks.size(); ++i) run_task(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < grid.workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < tasks.size();
                     i = next.fetch_add(1))
                    run_task(i);
            });
        for (auto& t : pool) t.join();
    }

    MonotonicityReport report;
    for (PairVerdict& v : verdicts) {
        report.n_pairs += 1;
        if (v.monotone1_violated || v.monotone2_violated) report.n_violations += 1;
        if (v.inconclusive) report.n_inconclusive += 1;
        for (const BigRat* esc : {&v.left1_esc, &v.left2_esc, &v.right1_esc, &v.right2_esc})
            report.max_escape = std::max(report.max_escape, to_double(*esc));
        report.pairs.push_back(std::move(v));
    }
    return report;
}

// ---- coupling map -----------------------------------------------------------

namespace {

// Single source of truth for how the level-t0 row maps under each coupling.
struct OmegaRule {
    enum Kind { Const0, FromSource, XiTimesSource, FreshFar } kind = FromSource;
    std::int64_t src = 0;  // source column when applicable
};

OmegaRule omega2_rule(CouplingCase c, std::int64_t z, std::int64_t e1, std::int64_t delta1) {
    const std::int64_t e2 = e1 + 1;
    switch (c) {
        case CouplingCase::Case1:
            return {OmegaRule::FromSource, z <= e2 ? z - 1 : z + 1};
        case CouplingCase::Auxiliary:
            if (z >= e1 + 1) return {OmegaRule::FromSource, z - 1};
            if (z <= e1 - 2) return {OmegaRule::FromSource, z + 1};
            if (z == e1) return {OmegaRule::Const0, 0};
            // z == e1 - 1: flat step exposes the far endpoint, else interior.
            return delta1 == 0 ? OmegaRule{OmegaRule::FreshFar, 0}
                               : OmegaRule{OmegaRule::Const0, 0};
        case CouplingCase::KGe2: {
            const std::int64_t f2 = e1 - 2 * delta1 - 1;
            if (z > e1) return {OmegaRule::FromSource, z - 1};
            if (z >= e1 - 2 * delta1) return {OmegaRule::Const0, 0};
            if (z == f2) return {OmegaRule::XiTimesSource, z};
            return {OmegaRule::FromSource, z};
        }
    }
    return {};
}

struct UpsRule {
    enum Kind { FromSource, Fresh, Rule3Literal } kind = FromSource;
    std::int64_t src = 0;
};

UpsRule ups2_rule(CouplingCase c, std::int64_t z, std::int64_t e1, std::int64_t delta1,
                  Rule3Reading reading) {
    switch (c) {
        case CouplingCase::Case1:
            return {UpsRule::FromSource, z <= e1 + 1 ? z - 1 : z + 1};
        case CouplingCase::Auxiliary:
            if (z >= e1 + 1) return {UpsRule::FromSource, z - 1};
            if (z <= e1 - 2) return {UpsRule::FromSource, z + 1};
            return {UpsRule::Fresh, 0};
        case CouplingCase::KGe2: {
            const std::int64_t f2 = e1 - 2 * delta1 - 1;
            if (z > e1) return {UpsRule::FromSource, z - 1};
            if (z >= e1 - 2 * delta1) return {UpsRule::Fresh, 0};
            if (z == f2)
                return reading == Rule3Reading::Literal ? UpsRule{UpsRule::Rule3Literal, 0}
                                                        : UpsRule{UpsRule::Fresh, 0};
            return {UpsRule::FromSource, z};
        }
    }
    return {};
}

void check_coupling_preconditions(CouplingCase c, const CondPath& pi1, const CondPath& pi2,
                                  std::int64_t t0) {
    if (pi1.length() != pi2.length() || pi1.start != pi2.start)
        throw std::invalid_argument("coupling: paths must share start and length");
    if (t0 < 1 || t0 > pi1.length())
        throw std::invalid_argument("coupling: t0 out of range");
    for (std::int64_t t = 1; t <= pi1.length(); ++t) {
        const std::int64_t d1 = pi1.increments[static_cast<std::size_t>(t - 1)];
        const std::int64_t d2 = pi2.increments[static_cast<std::size_t>(t - 1)];
        if (t == t0 ? d2 != d1 + 1 : d2 != d1)
            throw std::invalid_argument("coupling: pi2 must be the +1 shift of pi1 at t0");
    }
    const std::int64_t delta1 = pi1.increments[static_cast<std::size_t>(t0 - 1)];
    if (c == CouplingCase::Case1 && delta1 >= 0)
        throw std::invalid_argument("coupling: Case1 requires a down step at t0");
    if (c != CouplingCase::Case1 && delta1 < 0)
        throw std::invalid_argument("coupling: Auxiliary/KGe2 require a flat or up step at t0");
}

}  // namespace

LevelRealization apply_coupling(CouplingCase c, const LevelRealization& r1,
                                const CondPath& pi1, const CondPath& pi2,
                                std::int64_t t0, const CouplingNoise& noise,
                                const CouplingOptions& opt) {
    check_coupling_preconditions(c, pi1, pi2, t0);
    const std::int64_t e1 = pi1.at(t0);
    const std::int64_t delta1 = pi1.increments[static_cast<std::size_t>(t0 - 1)];
    LevelRealization r2;
    r2.lo = r1.lo + 1;
    r2.hi = r1.hi - 1;
    if (r2.lo > r2.hi) throw std::invalid_argument("apply_coupling: window too narrow");
    r2.omega.resize(static_cast<std::size_t>(r2.hi - r2.lo + 1));
    r2.upsilon.resize(r2.omega.size());

    std::size_t fresh_used = 0;
    const auto fresh = [&]() -> std::uint8_t {
        if (fresh_used >= noise.fresh_upsilon.size())
            throw std::invalid_argument("apply_coupling: not enough fresh tie bits");
        return noise.fresh_upsilon[fresh_used++];
    };

    for (std::int64_t z = r2.lo; z <= r2.hi; ++z) {
        const OmegaRule orule = omega2_rule(c, z, e1, delta1);
        std::uint8_t om = 0;
        switch (orule.kind) {
            case OmegaRule::Const0: om = 0; break;
            case OmegaRule::FromSource: om = r1.om(orule.src); break;
            case OmegaRule::XiTimesSource: om = noise.xi & r1.om(orule.src); break;
            case OmegaRule::FreshFar: om = noise.fresh_far; break;
        }
        r2.omega[static_cast<std::size_t>(z - r2.lo)] = om;

        const UpsRule urule = ups2_rule(c, z, e1, delta1, opt.rule3);
        std::uint8_t up = 0;
        switch (urule.kind) {
            case UpsRule::FromSource: up = r1.up(urule.src); break;
            case UpsRule::Fresh: up = fresh(); break;
            case UpsRule::Rule3Literal: up = om ? 1 : noise.fresh_tilde; break;
        }
        r2.upsilon[static_cast<std::size_t>(z - r2.lo)] = up;
    }

    // Pending tie bit of level t0-1.
    switch (c) {
        case CouplingCase::Case1:
            r2.dep_upsilon = r1.dep_upsilon;
            break;
        case CouplingCase::Auxiliary: {
            const std::int64_t f2 = 2 * pi2.at(t0 - 1) - pi2.at(t0);
            const std::uint8_t far_open =
                f2 >= r2.lo && f2 <= r2.hi ? r2.om(f2) : 0;
            r2.dep_upsilon = far_open ? 1 : r1.dep_upsilon;
            break;
        }
        case CouplingCase::KGe2: {
            if (opt.rule3 == Rule3Reading::Literal) {
                r2.dep_upsilon = r1.dep_upsilon;
            } else {
                const std::int64_t f2 = e1 - 2 * delta1 - 1;
                const std::uint8_t far_open = noise.xi & r1.om(f2);
                r2.dep_upsilon = far_open ? 1 : noise.fresh_dep;
            }
            break;
        }
    }
    return r2;
}

// ---- pushforward check --------------------------------------------------------

namespace {

// Joint description of (omega(F_{t+1}), upsilon(pi(t), t)): the level-(t+1)
// far bit with its pending tie partner, or a free fair bit when the next
// increment is flat or beyond the horizon.
struct NextPair {
    bool tied = false;
    std::uint8_t dir = 0;
};

NextPair next_pair_info(const ConditionalLaw& law, std::int64_t t0) {
    NextPair np;
    if (t0 + 1 <= law.path().length() && law.has_far(t0 + 1)) {
        np.tied = true;
        np.dir = law.forced_upsilon(t0 + 1);
    }
    return np;
}

using Assignment = std::vector<std::uint8_t>;

struct Measure {
    std::map<Assignment, BigRat> atoms;
    void add(const Assignment& a, const BigRat& w) {
        if (!w.is_zero()) atoms[a] += w;
    }
};

}  // namespace

PushforwardReport verify_pushforward(CouplingCase c, const CondPath& pi1,
                                     const CondPath& pi2, std::int64_t t0,
                                     const RationalP& p, const CouplingOptions& opt) {
    check_coupling_preconditions(c, pi1, pi2, t0);
    const ConditionalLaw law1(pi1, p);
    const ConditionalLaw law2(pi2, p);
    const std::int64_t e1 = pi1.at(t0);
    const std::int64_t delta1 = pi1.increments[static_cast<std::size_t>(t0 - 1)];
    const std::int64_t delta2 = delta1 + 1;

    // Window: cover the level-t0 structure of both laws plus slack.
    std::int64_t lo = std::min({e1, 2 * pi1.at(t0 - 1) - e1, 2 * pi2.at(t0 - 1) - pi2.at(t0)}) -
                      opt.window_halfwidth;
    std::int64_t hi = std::max({e1 + 1, 2 * pi1.at(t0 - 1) - e1}) + opt.window_halfwidth;
    const std::int64_t in_lo = lo - 1, in_hi = hi + 1;
    const std::int64_t out_lo = lo, out_hi = hi;

    const NextPair np1 = next_pair_info(law1, t0);
    const NextPair np2 = next_pair_info(law2, t0);
    const BigRat pp = p.p_prime();
    const BigRat half(1, 2);
    const BigRat xi_p = BigRat(p.den, 2 * p.den - p.num);  // 1/(2-p)

    // Enumerated source variables: level-t0 omegas on [in_lo, in_hi], the
    // pending tie bit, the next-level pair, and the coupling noise.
    std::vector<std::int64_t> rand_cols;
    for (std::int64_t z = in_lo; z <= in_hi; ++z) {
        const SiteClass cls = law1.classify(z, t0);
        if (cls == SiteClass::Free || cls == SiteClass::FarEndpoint) rand_cols.push_back(z);
    }
    if (rand_cols.size() > 24)
        throw BudgetExceeded("verify_pushforward: window too wide");

    // Target variable order: omega2 row, dep2, ups2(pi2(t0)), omega2(F_{t0+1}
    // level t0+1 bit), plus ups2(F2_t0) when the law has a far endpoint.
    const bool track_far_ups = law2.has_far(t0);
    const std::int64_t f2_t0 = track_far_ups ? law2.far_endpoint(t0) : 0;

    // Where the tracked tie bit at (F2, t0) comes from under the map: either a
    // free source column, a fresh fair bit (its pool slot), or rule 3's
    // derived bit.
    const UpsRule far_ups_rule = track_far_ups
                                     ? ups2_rule(c, f2_t0, e1, delta1, opt.rule3)
                                     : UpsRule{};
    std::size_t far_fresh_slot = 0;
    if (track_far_ups && far_ups_rule.kind == UpsRule::Fresh) {
        // apply_coupling consumes the fresh pool in column order from out_lo.
        for (std::int64_t z = out_lo; z < f2_t0; ++z)
            if (ups2_rule(c, z, e1, delta1, opt.rule3).kind == UpsRule::Fresh)
                ++far_fresh_slot;
    }

    Measure image, target;

    // --- build the image measure: enumerate source atoms ---
    const std::int64_t n_rand = static_cast<std::int64_t>(rand_cols.size());
    for (std::int64_t mask = 0; mask < (std::int64_t{1} << n_rand); ++mask) {
        LevelRealization r1;
        r1.lo = in_lo;
        r1.hi = in_hi;
        r1.omega.assign(static_cast<std::size_t>(in_hi - in_lo + 1), 0);
        r1.upsilon.assign(r1.omega.size(), 0);
        BigRat w_omega(1);
        for (std::int64_t z = in_lo; z <= in_hi; ++z) {
            const SiteClass cls = law1.classify(z, t0);
            std::uint8_t bit = 0;
            if (cls == SiteClass::ForcedOpen) bit = 1;
            else if (cls == SiteClass::Free || cls == SiteClass::FarEndpoint) {
                const std::size_t ri = static_cast<std::size_t>(
                    std::find(rand_cols.begin(), rand_cols.end(), z) - rand_cols.begin());
                bit = (mask >> ri) & 1;
                const BigRat open = cls == SiteClass::Free ? p.p() : pp;
                w_omega *= bit ? open : 1 - open;
            }
            r1.omega[static_cast<std::size_t>(z - in_lo)] = bit;
        }
        if (w_omega.is_zero()) continue;

        // dep1 branches, conditioned on omega1(F1_t0).
        std::vector<std::pair<std::uint8_t, BigRat>> dep_branches;
        if (law1.has_far(t0) && r1.om(law1.far_endpoint(t0)))
            dep_branches.push_back({law1.forced_upsilon(t0), BigRat(1)});
        else
            dep_branches = {{0, half}, {1, half}};

        // next-level pair branches for law1: (omega_next, ups(pi1(t0), t0)).
        std::vector<std::pair<std::pair<std::uint8_t, std::uint8_t>, BigRat>> next_branches;
        if (np1.tied) {
            next_branches.push_back({{1, np1.dir}, pp});
            next_branches.push_back({{0, 0}, (1 - pp) * half});
            next_branches.push_back({{0, 1}, (1 - pp) * half});
        } else {
            next_branches.push_back({{0, 0}, half});
            next_branches.push_back({{0, 1}, half});
        }

        // branches for the fair bit feeding ups2(F2, t0), when it is tracked
        // and not derived by rule 3.
        std::vector<std::pair<std::uint8_t, BigRat>> far_ups_branches = {{0, BigRat(1)}};
        if (track_far_ups && far_ups_rule.kind != UpsRule::Rule3Literal)
            far_ups_branches = {{0, half}, {1, half}};

        // noise branches.
        std::vector<std::pair<CouplingNoise, BigRat>> noise_branches;
        {
            CouplingNoise base;
            base.fresh_upsilon.assign(16, 0);  // fresh fair bits: marginalized below
            if (c == CouplingCase::KGe2) {
                for (std::uint8_t xv : {0, 1})
                    for (std::uint8_t tv : {0, 1})
                        for (std::uint8_t dv : {0, 1}) {
                            CouplingNoise n = base;
                            n.xi = xv;
                            n.fresh_tilde = tv;
                            n.fresh_dep = dv;
                            noise_branches.push_back(
                                {n, (xv ? xi_p : 1 - xi_p) * half * half});
                        }
            } else if (c == CouplingCase::Auxiliary && delta1 == 0) {
                for (std::uint8_t fv : {0, 1}) {
                    CouplingNoise n = base;
                    n.fresh_far = fv;
                    noise_branches.push_back({n, fv ? pp : 1 - pp});
                }
            } else {
                noise_branches.push_back({base, BigRat(1)});
            }
        }

        for (const auto& [dep1, w_dep] : dep_branches) {
            for (const auto& [next1, w_next] : next_branches) {
                for (const auto& [far_bit, w_far] : far_ups_branches) {
                    for (const auto& [noise0, w_noise] : noise_branches) {
                        CouplingNoise noise = noise0;
                        LevelRealization rr1 = r1;
                        rr1.dep_upsilon = dep1;
                        // Place the enumerated tie bit at (pi1(t0), t0).
                        rr1.upsilon[static_cast<std::size_t>(e1 - in_lo)] = next1.second;
                        if (track_far_ups) {
                            if (far_ups_rule.kind == UpsRule::FromSource)
                                rr1.upsilon[static_cast<std::size_t>(far_ups_rule.src -
                                                                     in_lo)] = far_bit;
                            else if (far_ups_rule.kind == UpsRule::Fresh)
                                noise.fresh_upsilon[far_fresh_slot] = far_bit;
                        }
                        const LevelRealization r2 =
                            apply_coupling(c, rr1, pi1, pi2, t0, noise, opt);

                        // omega(F_{t0+1}) of law2 is the shifted level-(t0+1)
                        // source bit; the shift is structural, so the image
                        // bit equals the source bit.
                        const std::uint8_t next2_omega = next1.first;

                        Assignment a;
                        for (std::int64_t z = out_lo; z <= out_hi; ++z)
                            a.push_back(r2.om(z));
                        a.push_back(r2.dep_upsilon);
                        a.push_back(r2.up(pi2.at(t0)));
                        a.push_back(next2_omega);
                        if (track_far_ups) a.push_back(r2.up(f2_t0));
                        image.add(a, w_omega * w_dep * w_next * w_far * w_noise);
                    }
                }
            }
        }
    }

    // --- build the target measure directly from law2 ---
    std::vector<std::int64_t> rand_cols2;
    for (std::int64_t z = out_lo; z <= out_hi; ++z) {
        const SiteClass cls = law2.classify(z, t0);
        if (cls == SiteClass::Free || cls == SiteClass::FarEndpoint) rand_cols2.push_back(z);
    }
    const std::int64_t n_rand2 = static_cast<std::int64_t>(rand_cols2.size());
    for (std::int64_t mask = 0; mask < (std::int64_t{1} << n_rand2); ++mask) {
        std::vector<std::uint8_t> omega(static_cast<std::size_t>(out_hi - out_lo + 1), 0);
        BigRat w_omega(1);
        for (std::int64_t z = out_lo; z <= out_hi; ++z) {
            const SiteClass cls = law2.classify(z, t0);
            std::uint8_t bit = 0;
            if (cls == SiteClass::ForcedOpen) bit = 1;
            else if (cls == SiteClass::Free || cls == SiteClass::FarEndpoint) {
                const std::size_t ri = static_cast<std::size_t>(
                    std::find(rand_cols2.begin(), rand_cols2.end(), z) - rand_cols2.begin());
                bit = (mask >> ri) & 1;
                const BigRat open = cls == SiteClass::Free ? p.p() : pp;
                w_omega *= bit ? open : 1 - open;
            }
            omega[static_cast<std::size_t>(z - out_lo)] = bit;
        }
        if (w_omega.is_zero()) continue;

        std::vector<std::pair<std::uint8_t, BigRat>> dep_branches;
        if (law2.has_far(t0) && omega[static_cast<std::size_t>(law2.far_endpoint(t0) - out_lo)])
            dep_branches.push_back({law2.forced_upsilon(t0), BigRat(1)});
        else
            dep_branches = {{0, half}, {1, half}};

        std::vector<std::pair<std::pair<std::uint8_t, std::uint8_t>, BigRat>> next_branches;
        if (np2.tied) {
            next_branches.push_back({{1, np2.dir}, pp});
            next_branches.push_back({{0, 0}, (1 - pp) * half});
            next_branches.push_back({{0, 1}, (1 - pp) * half});
        } else {
            next_branches.push_back({{0, 0}, half});
            next_branches.push_back({{0, 1}, half});
        }

        for (const auto& [dep2, w_dep] : dep_branches) {
            for (const auto& [next2, w_next] : next_branches) {
                Assignment a;
                for (std::uint8_t b : omega) a.push_back(b);
                a.push_back(dep2);
                a.push_back(next2.second);
                a.push_back(next2.first);
                if (track_far_ups) {
                    for (std::uint8_t fu : {0, 1}) {
                        Assignment af = a;
                        af.push_back(fu);
                        target.add(af, w_omega * w_dep * w_next * half);
                    }
                } else {
                    target.add(a, w_omega * w_dep * w_next);
                }
            }
        }
    }

    // --- compare ---
    PushforwardReport rep;
    rep.coupling = c;
    rep.t0 = t0;
    const std::size_t n_vars =
        static_cast<std::size_t>(out_hi - out_lo + 1) + 3 + (track_far_ups ? 1 : 0);
    const std::size_t dep_index = static_cast<std::size_t>(out_hi - out_lo + 1);
    const std::size_t path_ups_index = dep_index + 1;

    // Project a measure onto a subset of variables.
    const auto project = [&](const Measure& m, const std::vector<bool>& keep) {
        std::map<Assignment, BigRat> out;
        for (const auto& [a, w] : m.atoms) {
            Assignment key;
            for (std::size_t i = 0; i < a.size(); ++i)
                if (keep[i]) key.push_back(a[i]);
            out[key] += w;
        }
        return out;
    };

    std::vector<bool> keep_all(n_vars, true);
    std::vector<bool> keep_event(n_vars, true);
    keep_event[dep_index] = false;       // tie bit on the path at t0-1
    keep_event[path_ups_index] = false;  // tie bit on the path at t0

    rep.exact_on_full_field = project(image, keep_all) == project(target, keep_all);
    rep.exact_on_event_field = project(image, keep_event) == project(target, keep_event);

    if (!rep.exact_on_full_field) {
        // Localize: compare single-variable marginals.
        for (std::size_t i = 0; i < n_vars; ++i) {
            std::vector<bool> keep(n_vars, false);
            keep[i] = true;
            if (project(image, keep) != project(target, keep)) {
                std::ostringstream os;
                os << "marginal mismatch at variable " << i
                   << (i == dep_index ? " (pending tie bit)"
                                      : i == path_ups_index ? " (on-path tie bit)" : "");
                rep.deviations.push_back(os.str());
            }
        }
        if (rep.deviations.empty())
            rep.deviations.push_back("joint mismatch with matching marginals");
    }
    return rep;
}

// ---- realization-wise containment ----------------------------------------------

namespace {

// Lazily resolved fair/biased bits shared between the two coupled traces.
struct BitRequest {
    std::int64_t key;
    double prob_one;
};

class LazyBits {
  public:
    std::optional<std::uint8_t> get(std::int64_t key) const {
        const auto it = values_.find(key);
        if (it == values_.end()) return std::nullopt;
        return it->second;
    }
    std::map<std::int64_t, std::uint8_t> values_;
};

constexpr std::int64_t kAbort = std::numeric_limits<std::int64_t>::min();

}  // namespace

ContainmentReport verify_containment(CouplingCase c, const CondPath& pi1,
                                     const CondPath& pi2, std::int64_t t0,
                                     std::int64_t start, const RationalP& p,
                                     const ContainmentOptions& opt) {
    check_coupling_preconditions(c, pi1, pi2, t0);
    if (start >= pi1.start)
        throw std::invalid_argument("verify_containment: start must be left of the path");
    const ConditionalLaw law1(pi1, p);
    const std::int64_t H = pi1.length();
    const std::int64_t e1 = pi1.at(t0);
    const std::int64_t delta1 = pi1.increments[static_cast<std::size_t>(t0 - 1)];

    // Columns: cover start and both paths' structure with halfwidth slack.
    std::int64_t lo = start, hi = pi1.start;
    for (std::int64_t t = 1; t <= H; ++t) {
        lo = std::min({lo, pi1.at(t), 2 * pi1.at(t - 1) - pi1.at(t)});
        hi = std::max({hi, pi2.at(t) + 1, 2 * pi1.at(t - 1) - pi1.at(t)});
    }
    lo -= opt.window_halfwidth;
    hi += opt.window_halfwidth;

    // Random omega sites of law1 on levels 1..H.
    struct RandSite {
        std::int64_t z, lvl;
        double open;
    };
    std::vector<RandSite> rand_sites;
    for (std::int64_t lvl = 1; lvl <= H; ++lvl)
        for (std::int64_t z = lo; z <= hi; ++z) {
            const SiteClass cls = law1.classify(z, lvl);
            if (cls == SiteClass::Free) rand_sites.push_back({z, lvl, to_double(p.p())});
            else if (cls == SiteClass::FarEndpoint)
                rand_sites.push_back({z, lvl, to_double(p.p_prime())});
        }
    if (rand_sites.size() > 26 ||
        (std::int64_t{1} << rand_sites.size()) > opt.max_atoms)
        throw BudgetExceeded("verify_containment: window exceeds atom budget");

    const std::int64_t width = hi - lo + 1;
    const auto cell = [&](std::int64_t z, std::int64_t lvl) {
        return static_cast<std::size_t>((lvl - 1) * width + (z - lo));
    };

    ContainmentReport rep;
    rep.coupling = c;

    const double pd = to_double(p.p());
    const double ppd = to_double(p.p_prime());
    const double xi_pd = 1.0 / (2.0 - pd);

    std::vector<std::uint8_t> om1(static_cast<std::size_t>(width * H), 0);

    // Fill forced bits once.
    for (std::int64_t lvl = 1; lvl <= H; ++lvl)
        for (std::int64_t z = lo; z <= hi; ++z)
            if (law1.classify(z, lvl) == SiteClass::ForcedOpen) om1[cell(z, lvl)] = 1;

    const std::int64_t n_atoms = std::int64_t{1} << rand_sites.size();
    for (std::int64_t mask = 0; mask < n_atoms; ++mask) {
        double w_atom = 1.0;
        for (std::size_t i = 0; i < rand_sites.size(); ++i) {
            const std::uint8_t bit = (mask >> i) & 1;
            om1[cell(rand_sites[i].z, rand_sites[i].lvl)] = bit;
            w_atom *= bit ? rand_sites[i].open : 1.0 - rand_sites[i].open;
        }

        // Noise combos with weights (xi: 1/(2-p); fresh_far: p').
        struct NoiseCombo {
            std::uint8_t xi, far;
            double w;
        };
        std::vector<NoiseCombo> noise;
        if (c == CouplingCase::KGe2)
            noise = {{0, 0, 1.0 - xi_pd}, {1, 0, xi_pd}};
        else if (c == CouplingCase::Auxiliary && delta1 == 0)
            noise = {{0, 0, 1.0 - ppd}, {0, 1, ppd}};
        else
            noise = {{0, 0, 1.0}};

        for (const NoiseCombo& nc : noise) {
            // env2 omega at (z, lvl): shift above t0, coupled row at t0.
            const auto om2 = [&](std::int64_t z, std::int64_t lvl) -> std::int64_t {
                if (lvl < t0) {
                    if (z < lo || z > hi) return kAbort;
                    return om1[cell(z, lvl)];
                }
                if (lvl > t0) {
                    if (z - 1 < lo || z - 1 > hi) return kAbort;
                    return om1[cell(z - 1, lvl)];
                }
                const OmegaRule rule = omega2_rule(c, z, e1, delta1);
                switch (rule.kind) {
                    case OmegaRule::Const0: return 0;
                    case OmegaRule::FreshFar: return nc.far;
                    case OmegaRule::XiTimesSource:
                        if (rule.src < lo || rule.src > hi) return kAbort;
                        return nc.xi & om1[cell(rule.src, t0)];
                    case OmegaRule::FromSource:
                        if (rule.src < lo || rule.src > hi) return kAbort;
                        return om1[cell(rule.src, t0)];
                }
                return kAbort;
            };
            const auto om1_at = [&](std::int64_t z, std::int64_t lvl) -> std::int64_t {
                if (z < lo || z > hi) return kAbort;
                return om1[cell(z, lvl)];
            };

            // Explore tie-bit branches. Keys: level * 2^20 + column offset for
            // source bits; negative keys for fresh bits.
            std::function<void(LazyBits&, double)> explore = [&](LazyBits& bits, double w) {
                std::optional<BitRequest> need;

                // upsilon resolution for env1 and env2 traces.
                const auto ups1 = [&](std::int64_t z, std::int64_t lvl)
                    -> std::optional<std::uint8_t> {
                    const std::int64_t key = lvl * (std::int64_t{1} << 24) + (z - lo);
                    const auto v = bits.get(key);
                    if (!v && !need) need = BitRequest{key, 0.5};
                    return v;
                };
                const auto ups2 = [&](std::int64_t z, std::int64_t lvl)
                    -> std::optional<std::uint8_t> {
                    std::int64_t key = 0;
                    if (lvl < t0) key = lvl * (std::int64_t{1} << 24) + (z - lo);
                    else if (lvl > t0) key = lvl * (std::int64_t{1} << 24) + (z - 1 - lo);
                    else {
                        const UpsRule rule = ups2_rule(c, z, e1, delta1, opt.coupling.rule3);
                        switch (rule.kind) {
                            case UpsRule::FromSource:
                                key = t0 * (std::int64_t{1} << 24) + (rule.src - lo);
                                break;
                            case UpsRule::Fresh:
                                key = -(z - lo + 2);
                                break;
                            case UpsRule::Rule3Literal: {
                                const std::int64_t o = om2(z, t0);
                                if (o == 1) return 1;
                                key = -(z - lo + 2);
                                break;
                            }
                        }
                    }
                    const auto v = bits.get(key);
                    if (!v && !need) need = BitRequest{key, 0.5};
                    return v;
                };

                // Trace a path against pi under a site oracle; returns
                // positions per level, kAbort marking a window exit.
                const auto run_trace = [&](const CondPath& pi, auto&& omega_at, auto&& ups_at,
                                           std::int64_t levels) {
                    std::vector<std::int64_t> pos(static_cast<std::size_t>(levels) + 1, kAbort);
                    std::int64_t x = start;
                    pos[0] = x;
                    bool merged = false;
                    for (std::int64_t lvl = 1; lvl <= levels; ++lvl) {
                        if (merged || x == kAbort) {
                            pos[static_cast<std::size_t>(lvl)] = merged ? pi.at(lvl) : kAbort;
                            if (merged) continue;
                            break;
                        }
                        std::int64_t landed = kAbort;
                        const std::int64_t oc = omega_at(x, lvl);
                        if (oc == 1) landed = x;
                        else if (oc != kAbort) {
                            for (std::int64_t d = 1;; ++d) {
                                const std::int64_t ol = omega_at(x - d, lvl);
                                const std::int64_t orr = omega_at(x + d, lvl);
                                if (ol == kAbort || orr == kAbort) break;
                                if (ol == 1 && orr == 1) {
                                    const auto u = ups_at(x, lvl - 1);
                                    if (!u) return pos;  // branch demanded
                                    landed = *u ? x + d : x - d;
                                    break;
                                }
                                if (ol == 1) {
                                    landed = x - d;
                                    break;
                                }
                                if (orr == 1) {
                                    landed = x + d;
                                    break;
                                }
                            }
                        }
                        x = landed;
                        pos[static_cast<std::size_t>(lvl)] = x;
                        if (x != kAbort && x == pi.at(lvl)) merged = true;
                    }
                    return pos;
                };

                const auto pos1 = run_trace(pi1, om1_at, ups1, H);
                if (need) {
                    LazyBits b0 = bits;
                    b0.values_[need->key] = 0;
                    explore(b0, w * (1.0 - need->prob_one));
                    bits.values_[need->key] = 1;
                    explore(bits, w * need->prob_one);
                    return;
                }
                const auto pos2 = run_trace(pi2, om2, ups2, H);
                if (need) {
                    LazyBits b0 = bits;
                    b0.values_[need->key] = 0;
                    explore(b0, w * (1.0 - need->prob_one));
                    bits.values_[need->key] = 1;
                    explore(bits, w * need->prob_one);
                    return;
                }

                rep.leaves += 1;
                const bool abort1 =
                    std::any_of(pos1.begin(), pos1.end(), [](auto v) { return v == kAbort; });
                const bool abort2 =
                    std::any_of(pos2.begin(), pos2.end(), [](auto v) { return v == kAbort; });
                if (abort1 || abort2) {
                    rep.aborted_mass += w;
                    return;
                }

                bool violated = false;
                if (c == CouplingCase::Case1) {
                    const bool ev1 = pos1[static_cast<std::size_t>(H)] < pi1.at(H);
                    const bool ev2 = pos2[static_cast<std::size_t>(H)] < pi2.at(H);
                    violated = ev1 && !ev2;
                } else if (c == CouplingCase::Auxiliary) {
                    const bool ev1 = pos1[static_cast<std::size_t>(t0)] < pi1.at(t0);
                    const bool ev2 = pos2[static_cast<std::size_t>(t0)] < pi2.at(t0);
                    violated = ev1 && !ev2;
                    const bool full1 = pos1[static_cast<std::size_t>(H)] < pi1.at(H);
                    const bool full2 = pos2[static_cast<std::size_t>(H)] < pi2.at(H);
                    if (full1 && !full2) rep.full_event_counterexamples += 1;
                } else {
                    const std::int64_t x1 = pos1[static_cast<std::size_t>(t0)];
                    const std::int64_t x2 = pos2[static_cast<std::size_t>(t0)];
                    const std::int64_t d1v = e1 - 2 * delta1 - x1;
                    const std::int64_t d2v = e1 - 2 * delta1 - x2;
                    violated = d1v >= 2 && d2v < d1v;
                }
                if (violated) {
                    rep.violations += 1;
                    rep.violating_mass += w;
                }
                return;
            };

            LazyBits bits;
            explore(bits, w_atom * nc.w);
        }
    }
    return rep;
}

// ---- conditional independence -----------------------------------------------

CondIndepReport verify_conditional_independence(const CondPath& pi, const RationalP& p,
                                                const CondIndepOptions& opt) {
    const ConditionalLaw law(pi, p);
    const std::int64_t H = pi.length();
    std::int64_t lo = pi.start - 1, hi = pi.start + 1;
    for (std::int64_t t = 1; t <= H; ++t) {
        lo = std::min({lo, pi.at(t), 2 * pi.at(t - 1) - pi.at(t)});
        hi = std::max({hi, pi.at(t), 2 * pi.at(t - 1) - pi.at(t)});
    }
    lo -= opt.halfwidth;
    hi += opt.halfwidth;

    struct RandSite {
        std::int64_t z, lvl;
        BigRat open;
    };
    std::vector<RandSite> rand_sites;
    for (std::int64_t lvl = 1; lvl <= H; ++lvl)
        for (std::int64_t z = lo; z <= hi; ++z) {
            const SiteClass cls = law.classify(z, lvl);
            if (cls == SiteClass::Free) rand_sites.push_back({z, lvl, p.p()});
            else if (cls == SiteClass::FarEndpoint) rand_sites.push_back({z, lvl, p.p_prime()});
        }
    if (rand_sites.size() > 24 ||
        (std::int64_t{1} << rand_sites.size()) > opt.max_atoms)
        throw BudgetExceeded("verify_conditional_independence: window exceeds budget");

    const std::int64_t width = hi - lo + 1;
    const auto cell = [&](std::int64_t z, std::int64_t lvl) {
        return static_cast<std::size_t>((lvl - 1) * width + (z - lo));
    };
    std::vector<std::uint8_t> om(static_cast<std::size_t>(width * H), 0);
    for (std::int64_t lvl = 1; lvl <= H; ++lvl)
        for (std::int64_t z = lo; z <= hi; ++z)
            if (law.classify(z, lvl) == SiteClass::ForcedOpen) om[cell(z, lvl)] = 1;

    using Tuple = std::vector<std::int64_t>;
    std::map<std::pair<Tuple, Tuple>, BigRat> joint;
    std::map<Tuple, BigRat> margL, margR;
    BigRat aborted(0);
    const BigRat half(1, 2);

    const std::int64_t n_atoms = std::int64_t{1} << rand_sites.size();
    for (std::int64_t mask = 0; mask < n_atoms; ++mask) {
        BigRat w_atom(1);
        for (std::size_t i = 0; i < rand_sites.size(); ++i) {
            const std::uint8_t bit = (mask >> i) & 1;
            om[cell(rand_sites[i].z, rand_sites[i].lvl)] = bit;
            w_atom *= bit ? rand_sites[i].open : 1 - rand_sites[i].open;
        }
        if (w_atom.is_zero()) continue;

        // Explore fair tie-bit branches shared by the two traces (they never
        // actually share one; the exact factorization is the point).
        std::function<void(std::map<std::int64_t, std::uint8_t>&, BigRat)> explore =
            [&](std::map<std::int64_t, std::uint8_t>& bits, BigRat w) {
                std::optional<std::int64_t> need;
                const auto ups = [&](std::int64_t z, std::int64_t lvl)
                    -> std::optional<std::uint8_t> {
                    const std::int64_t key = lvl * (std::int64_t{1} << 24) + (z - lo);
                    const auto it = bits.find(key);
                    if (it == bits.end()) {
                        if (!need) need = key;
                        return std::nullopt;
                    }
                    return it->second;
                };
                const auto trace_from = [&](std::int64_t x0) {
                    Tuple pos(static_cast<std::size_t>(H) + 1, kAbort);
                    std::int64_t x = x0;
                    pos[0] = x;
                    bool merged = false;
                    for (std::int64_t lvl = 1; lvl <= H; ++lvl) {
                        if (merged) {
                            pos[static_cast<std::size_t>(lvl)] = pi.at(lvl);
                            continue;
                        }
                        if (x == kAbort) break;
                        std::int64_t landed = kAbort;
                        for (std::int64_t d = 0;; ++d) {
                            if (x - d < lo || x + d > hi) break;  // abort
                            if (d == 0) {
                                if (om[cell(x, lvl)]) {
                                    landed = x;
                                    break;
                                }
                                continue;
                            }
                            const bool ol = om[cell(x - d, lvl)];
                            const bool orr = om[cell(x + d, lvl)];
                            if (ol && orr) {
                                const auto u = ups(x, lvl - 1);
                                if (!u) return pos;
                                landed = *u ? x + d : x - d;
                                break;
                            }
                            if (ol) {
                                landed = x - d;
                                break;
                            }
                            if (orr) {
                                landed = x + d;
                                break;
                            }
                        }
                        x = landed;
                        pos[static_cast<std::size_t>(lvl)] = x;
                        if (x != kAbort && x == pi.at(lvl)) merged = true;
                    }
                    return pos;
                };

                const Tuple tl = trace_from(pi.start - 1);
                if (need) {
                    auto b0 = bits;
                    b0[*need] = 0;
                    explore(b0, w * half);
                    bits[*need] = 1;
                    explore(bits, w * half);
                    return;
                }
                const Tuple tr = trace_from(pi.start + 1);
                if (need) {
                    auto b0 = bits;
                    b0[*need] = 0;
                    explore(b0, w * half);
                    bits[*need] = 1;
                    explore(bits, w * half);
                    return;
                }
                const bool ab =
                    std::any_of(tl.begin(), tl.end(), [](auto v) { return v == kAbort; }) ||
                    std::any_of(tr.begin(), tr.end(), [](auto v) { return v == kAbort; });
                if (ab) aborted += w;
                joint[{tl, tr}] += w;
                margL[tl] += w;
                margR[tr] += w;
            };
        std::map<std::int64_t, std::uint8_t> bits;
        explore(bits, w_atom);
    }

    // Exact factorization: joint == product of marginals (total mass is 1).
    CondIndepReport rep;
    rep.outcome_pairs = static_cast<std::int64_t>(joint.size());
    rep.aborted_mass = to_double(aborted);
    rep.exact = true;
    for (const auto& [l, wl] : margL) {
        for (const auto& [r, wr] : margR) {
            const auto it = joint.find({l, r});
            const BigRat jw = it == joint.end() ? BigRat(0) : it->second;
            if (jw != wl * wr) {
                rep.exact = false;
                rep.note = "joint mass differs from product of marginals";
                return rep;
            }
        }
    }
    return rep;
}

}  // namespace grsnet
