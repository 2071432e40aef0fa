#include "grsnet/joint_law.hpp"

#include <cstdlib>
#include <map>
#include <utility>

namespace grsnet {

namespace {

enum class Cons : std::uint8_t { None, Closed, Open, Mirror };

// Single-walker constraint set on the target level: interior of the search
// window closed, landing site open, equal-distance partner a Mirror (closed,
// or open with the tie resolved toward the landing).
void add_constraints(std::map<std::int64_t, std::pair<Cons, Cons>>& sites,
                     std::int64_t origin, std::int64_t landing, bool left_walker) {
    const auto put = [&](std::int64_t s, Cons c) {
        auto& slot = sites[s];
        (left_walker ? slot.first : slot.second) = c;
    };
    const std::int64_t d = std::llabs(landing - origin);
    for (std::int64_t s = origin - d + 1; s <= origin + d - 1; ++s) put(s, Cons::Closed);
    put(landing, Cons::Open);
    if (d > 0) put(2 * origin - landing, Cons::Mirror);
}

}  // namespace

JointOneStepLaw::JointOneStepLaw(const RationalP& p, std::int64_t m)
    : p_(p), m_(m) {
    if (m < 1) throw std::invalid_argument("JointOneStepLaw: separation m must be >= 1");
    if (m > 64) throw BudgetExceeded("JointOneStepLaw: separation m > 64");
    ray_start_ = 2 * m + 6;
    const BigRat q = p_.q();
    q2_ = q * q;
    total_ = band_sum([](std::int64_t, std::int64_t) { return BigRat(1); });
    if (total_ != 1)
        throw std::logic_error("JointOneStepLaw: band mass does not close to 1");
    mean_ = band_sum([](std::int64_t a, std::int64_t b) { return BigRat(b - a); });
    persist_ = band_sum(
        [](std::int64_t a, std::int64_t b) { return BigRat(a == b ? 1 : 0); });
}

BigRat JointOneStepLaw::pair_probability(std::int64_t a, std::int64_t b) const {
    std::map<std::int64_t, std::pair<Cons, Cons>> sites;
    add_constraints(sites, 0, a, true);
    add_constraints(sites, m_, m_ + b, false);

    const BigRat p = p_.p();
    const BigRat q = p_.q();
    const BigRat half(1, 2);
    BigRat prob(1);
    for (const auto& [site, cons] : sites) {
        const Cons cl = cons.first;
        const Cons cr = cons.second;
        const Cons lo = cl < cr ? cl : cr;
        const Cons hi = cl < cr ? cr : cl;
        if (lo == Cons::None) {
            switch (hi) {
                case Cons::Closed: prob *= q; break;
                case Cons::Open: prob *= p; break;
                case Cons::Mirror: prob *= q + p * half; break;
                default: break;
            }
        } else if (lo == Cons::Closed) {
            if (hi == Cons::Open) return BigRat(0);
            prob *= q;  // Closed+Closed and Closed+Mirror: the site is closed
        } else if (lo == Cons::Open) {
            prob *= hi == Cons::Open ? p : p * half;  // Open+Mirror: forced tie
        } else {  // Mirror+Mirror: a tie on both sides if open
            prob *= q + p * half * half;
        }
        if (prob.is_zero()) return prob;
    }
    return prob;
}

template <typename Weight>
BigRat JointOneStepLaw::band_sum(const Weight& w) const {
    const std::int64_t T = ray_start_;
    BigRat sum(0);

    // Core: every band pair with min(|a|,|b|) < T, enumerated directly.
    for (std::int64_t t = 0; t < T; ++t) {
        for (std::int64_t j = -m_; j <= m_; ++j) {
            const std::int64_t d1 = t + (j > 0 ? j : 0);
            const std::int64_t d2 = t + (j < 0 ? -j : 0);
            for (int s1 : {-1, +1}) {
                if (d1 == 0 && s1 < 0) continue;
                for (int s2 : {-1, +1}) {
                    if (d2 == 0 && s2 < 0) continue;
                    const std::int64_t a = s1 * d1;
                    const std::int64_t b = s2 * d2;
                    const BigRat c = pair_probability(a, b);
                    if (!c.is_zero()) sum += w(a, b) * c;
                }
            }
        }
    }

    // Rays: for t >= T every (j, signs) family is geometric with ratio q^2
    // and affine weight; verify both and sum in closed form.
    const BigRat one_minus_x = 1 - q2_;
    for (std::int64_t j = -m_; j <= m_; ++j) {
        for (int s1 : {-1, +1}) {
            for (int s2 : {-1, +1}) {
                BigRat c[4], wt[3];
                std::int64_t aa[4], bb[4];
                bool all_zero = true;
                for (int u = 0; u < 4; ++u) {
                    const std::int64_t t = T + u;
                    aa[u] = s1 * (t + (j > 0 ? j : 0));
                    bb[u] = s2 * (t + (j < 0 ? -j : 0));
                    c[u] = pair_probability(aa[u], bb[u]);
                    if (!c[u].is_zero()) all_zero = false;
                }
                if (all_zero) continue;
                for (int u = 0; u < 3; ++u) {
                    if (c[u + 1] != c[u] * q2_)
                        throw std::logic_error("JointOneStepLaw: ray is not geometric");
                    wt[u] = w(aa[u], bb[u]);
                }
                if (wt[2] - wt[1] != wt[1] - wt[0])
                    throw std::logic_error("JointOneStepLaw: ray weight is not affine");
                const BigRat beta = wt[1] - wt[0];
                sum += c[0] * (wt[0] / one_minus_x + beta * q2_ / (one_minus_x * one_minus_x));
            }
        }
    }
    return sum;
}

BigRat JointOneStepLaw::marginal_left(std::int64_t a) const {
    const std::int64_t d1 = std::llabs(a);
    BigRat sum(0);
    for (std::int64_t b = -(d1 + m_); b <= d1 + m_; ++b) sum += pair_probability(a, b);
    return sum;
}

BigRat JointOneStepLaw::marginal_right(std::int64_t b) const {
    const std::int64_t d2 = std::llabs(b);
    BigRat sum(0);
    for (std::int64_t a = -(d2 + m_); a <= d2 + m_; ++a) sum += pair_probability(a, b);
    return sum;
}

BigRat JointOneStepLaw::gap_probability(std::int64_t z) const {
    const std::int64_t g = z - m_;  // required displacement difference b - a
    BigRat sum(0);
    const std::int64_t T = ray_start_;
    // Mixed-sign pairs satisfy b - a = g only at distances below
    // (|g| + m)/2 < T, so beyond the core only the two constant-gap rays
    // (all-positive with j = -g, all-negative with j = g) contribute.
    if (std::llabs(g) > m_) {
        // Rays cannot reach this gap; a direct diagonal scan suffices.
        for (std::int64_t a = -(T + 2 * m_ + std::llabs(g)); a <= T + 2 * m_ + std::llabs(g); ++a)
            sum += pair_probability(a, a + g);
        return sum;
    }
    return band_sum([g](std::int64_t a, std::int64_t b) { return BigRat(b - a == g ? 1 : 0); });
}

std::vector<PairProb> JointOneStepLaw::window_pmf(std::int64_t k_max) const {
    std::vector<PairProb> out;
    for (std::int64_t a = -k_max; a <= k_max; ++a)
        for (std::int64_t b = -k_max; b <= k_max; ++b)
            out.push_back({a, b, to_double(pair_probability(a, b))});
    return out;
}

}  // namespace grsnet
