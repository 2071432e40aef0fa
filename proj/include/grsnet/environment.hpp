#pragma once

#include <atomic>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace grsnet {

// Lattice site z = (x, level). x is the abscissa, level the discrete time
// coordinate; paths flow toward increasing level.
struct SiteCoord {
    std::int64_t x = 0;
    std::int64_t level = 0;

    friend bool operator==(const SiteCoord& a, const SiteCoord& b) {
        return a.x == b.x && a.level == b.level;
    }
};

// Per-site pair (omega, upsilon): omega = 1 means the site is open (a valid
// hop target), upsilon breaks two-sided ties (0 = go left, 1 = go right).
struct SiteState {
    std::uint8_t omega = 0;
    std::uint8_t upsilon = 0;
};

// Report from the marginal/independence frequency check.
struct BernoulliCheckReport {
    std::uint64_t n_sites = 0;
    double freq_omega = 0.0;
    double freq_upsilon = 0.0;
    double freq_product = 0.0;  // frequency of omega*upsilon == 1
    double z_omega = 0.0;
    double z_upsilon = 0.0;
    double z_product = 0.0;
    double z_threshold = 0.0;
    bool pass = false;
};

// Deterministic lazy realization of two independent Bernoulli fields over
// Z^2: omega(z) ~ Bernoulli(p) and upsilon(z) ~ Bernoulli(1/2). Site states
// are produced by a keyed counter-based generator (Philox 2x64-10) on
// (seed, x, level), so out-of-order and concurrent queries are consistent
// without materializing the field.
class Environment {
  public:
    Environment(std::uint64_t seed, double p);

    // Pure in (seed, p, z). The query counters are diagnostics only.
    SiteState site_state(SiteCoord z) const;

    std::uint64_t seed() const { return seed_; }
    double p() const { return p_; }

    // Hard cap on the half-width of a hop search; beyond it the no-open-site
    // probability is below 2^-128.
    std::int64_t search_cap() const { return search_cap_; }

    std::uint64_t sites_queried() const {
        return sites_queried_.load(std::memory_order_relaxed);
    }
    std::uint64_t sites_open() const {
        return sites_open_.load(std::memory_order_relaxed);
    }

  private:
    std::uint64_t seed_;
    double p_;
    std::int64_t search_cap_;
    mutable std::atomic<std::uint64_t> sites_queried_{0};
    mutable std::atomic<std::uint64_t> sites_open_{0};
};

// Frequency statistics for omega, upsilon and their product over n_sites
// distinct sites; pass iff every z-score is below z_threshold.
BernoulliCheckReport empirical_bernoulli_check(const Environment& env,
                                               std::uint64_t n_sites,
                                               double z_threshold = 4.0);

// SplitMix64 finalizer; also used to derive per-replicate seeds.
std::uint64_t mix64(std::uint64_t x);

// Replicate i of a run seeded with master gets its own full-entropy seed.
std::uint64_t replicate_seed(std::uint64_t master, std::uint64_t i);

}  // namespace grsnet
