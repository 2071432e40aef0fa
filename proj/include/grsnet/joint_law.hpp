#pragma once

#include <cstdint>
#include <vector>

#include "grsnet/errors.hpp"
#include "grsnet/rational.hpp"

namespace grsnet {

struct PairProb {
    std::int64_t a;
    std::int64_t b;
    double prob;
};

// Exact joint law of the one-step displacements of two paths traced in a
// shared environment from (0,0) and (m,0): the left walker lands at a, the
// right at m+b. A displacement pair has probability zero unless
// ||a| - |b|| <= m, so the support is a band; pairs with min(|a|,|b|) below
// a threshold are enumerated directly and the rest of the band decays
// geometrically ray by ray (ratio q^2 per unit distance, asserted at
// runtime) and is summed in closed form. All quantities are exact rationals
// over the full infinite lattice.
class JointOneStepLaw {
  public:
    JointOneStepLaw(const RationalP& p, std::int64_t m);

    std::int64_t separation() const { return m_; }

    // Exact probability that the left walker displaces by a while the right
    // walker displaces by b.
    BigRat pair_probability(std::int64_t a, std::int64_t b) const;

    const BigRat& total_mass() const { return total_; }          // == 1
    const BigRat& mean_gap_change() const { return mean_; }      // E[b-a] == 0
    const BigRat& persist_probability() const { return persist_; }  // P(b == a)

    // Exact marginals (finite band sums); equal to the increment pmf.
    BigRat marginal_left(std::int64_t a) const;
    BigRat marginal_right(std::int64_t b) const;

    // Exact P(Z_1 = z | Z_0 = m) for the gap process, z >= 0.
    BigRat gap_probability(std::int64_t z) const;

    // Double view of the core window for Monte Carlo cross-checks.
    std::vector<PairProb> window_pmf(std::int64_t k_max) const;

  private:
    template <typename Weight>
    BigRat band_sum(const Weight& w) const;  // sum w(a,b) * P(a,b), exact

    RationalP p_;
    std::int64_t m_;
    std::int64_t ray_start_;  // min(|a|,|b|) threshold where rays take over
    BigRat q2_;               // geometric ratio q^2
    BigRat total_;
    BigRat mean_;
    BigRat persist_;
};

}  // namespace grsnet
