#include "grsnet/environment.hpp"

#include <cmath>

namespace grsnet {

namespace {

// Philox 2x64 round constants (Salmon et al., "Parallel random numbers:
// as easy as 1, 2, 3").
constexpr std::uint64_t kPhiloxM = 0xD2B74407B1CE6E93ULL;
constexpr std::uint64_t kWeyl = 0x9E3779B97F4A7C15ULL;

struct U128 {
    std::uint64_t lo;
    std::uint64_t hi;
};

inline U128 mulhilo(std::uint64_t a, std::uint64_t b) {
    unsigned __int128 w = static_cast<unsigned __int128>(a) * b;
    return {static_cast<std::uint64_t>(w), static_cast<std::uint64_t>(w >> 64)};
}

// Counter = (x, level), key = seed. Returns the two output words.
inline U128 philox2x64(std::uint64_t c0, std::uint64_t c1, std::uint64_t key) {
    for (int round = 0; round < 10; ++round) {
        U128 prod = mulhilo(kPhiloxM, c0);
        c0 = prod.hi ^ key ^ c1;
        c1 = prod.lo;
        key += kWeyl;
    }
    return {c0, c1};
}

std::int64_t compute_search_cap(double p) {
    const double q = 1.0 - p;
    if (q <= 0.0) return 64;
    const double bits_per_site = std::log2(1.0 / q);
    return static_cast<std::int64_t>(std::ceil(64.0 / bits_per_site)) + 64;
}

}  // namespace

Environment::Environment(std::uint64_t seed, double p) : seed_(seed), p_(p) {
    if (!(p > 0.0) || p > 1.0)
        throw std::invalid_argument("Environment: p must lie in (0, 1]");
    search_cap_ = compute_search_cap(p);
}

SiteState Environment::site_state(SiteCoord z) const {
    const U128 words = philox2x64(static_cast<std::uint64_t>(z.x),
                                  static_cast<std::uint64_t>(z.level), seed_);
    // omega from the top 53 bits of word 0, upsilon from a bit of word 1, so
    // the two fields are uncorrelated at a site.
    const double u = static_cast<double>(words.lo >> 11) * 0x1.0p-53;
    SiteState s;
    s.omega = u < p_ ? 1 : 0;
    s.upsilon = static_cast<std::uint8_t>(words.hi & 1u);
    sites_queried_.fetch_add(1, std::memory_order_relaxed);
    sites_open_.fetch_add(s.omega, std::memory_order_relaxed);
    return s;
}

BernoulliCheckReport empirical_bernoulli_check(const Environment& env,
                                               std::uint64_t n_sites,
                                               double z_threshold) {
    if (n_sites < 10000)
        throw std::invalid_argument("empirical_bernoulli_check: n_sites >= 1e4 required");
    std::uint64_t n_omega = 0, n_upsilon = 0, n_product = 0;
    // Walk a deterministic strip of distinct sites.
    for (std::uint64_t i = 0; i < n_sites; ++i) {
        const SiteState s = env.site_state(
            {static_cast<std::int64_t>(i % 100003), static_cast<std::int64_t>(i / 100003)});
        n_omega += s.omega;
        n_upsilon += s.upsilon;
        n_product += s.omega & s.upsilon;
    }
    const double n = static_cast<double>(n_sites);
    const double p = env.p();
    BernoulliCheckReport r;
    r.n_sites = n_sites;
    r.freq_omega = static_cast<double>(n_omega) / n;
    r.freq_upsilon = static_cast<double>(n_upsilon) / n;
    r.freq_product = static_cast<double>(n_product) / n;
    const auto zscore = [n](double freq, double expect) {
        const double sd = std::sqrt(expect * (1.0 - expect) / n);
        return sd > 0.0 ? (freq - expect) / sd : 0.0;
    };
    r.z_omega = zscore(r.freq_omega, p);
    r.z_upsilon = zscore(r.freq_upsilon, 0.5);
    r.z_product = zscore(r.freq_product, p * 0.5);
    r.z_threshold = z_threshold;
    r.pass = std::abs(r.z_omega) < z_threshold && std::abs(r.z_upsilon) < z_threshold &&
             std::abs(r.z_product) < z_threshold;
    return r;
}

std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBULL;
    x ^= x >> 31;
    return x;
}

std::uint64_t replicate_seed(std::uint64_t master, std::uint64_t i) {
    return mix64(master + (i + 1) * kWeyl);
}

}  // namespace grsnet
