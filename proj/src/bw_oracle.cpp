#include "grsnet/bw_oracle.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace grsnet {

double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

double bw_meet_survival(const BmPairSpec& spec) {
    if (!(spec.epsilon > 0.0) || !(spec.t > 0.0) || !(spec.diffusion > 0.0))
        throw std::domain_error("bw_meet_survival: epsilon, t, diffusion must be > 0");
    const double sigma_pair = std::sqrt(2.0 * spec.t) * spec.diffusion;
    return 2.0 * normal_cdf(spec.epsilon / sigma_pair) - 1.0;
}

namespace {

// Box-Muller; kept explicit so runs are reproducible across standard
// libraries for a given libm.
class GaussianDraws {
  public:
    explicit GaussianDraws(std::uint64_t seed) : rng_(seed) {}

    double operator()() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * M_PI * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    double uniform() {
        return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    }

  private:
    std::mt19937_64 rng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace

CoalescingBmResult simulate_coalescing_bm(const std::vector<BmStart>& starts,
                                          double step, double horizon,
                                          std::uint64_t seed, double diffusion) {
    if (starts.empty()) throw std::invalid_argument("simulate_coalescing_bm: no starts");
    if (!(step > 0.0)) throw std::invalid_argument("simulate_coalescing_bm: step must be > 0");
    for (std::size_t i = 1; i < starts.size(); ++i) {
        if (starts[i].s < starts[i - 1].s)
            throw std::invalid_argument("simulate_coalescing_bm: starts must be time-ordered");
        if (starts[i].s == starts[i - 1].s && !(starts[i - 1].y < starts[i].y))
            throw std::invalid_argument(
                "simulate_coalescing_bm: equal-time starts must be strictly increasing");
    }

    const double t0 = starts.front().s;
    const std::int64_t n_steps = static_cast<std::int64_t>(std::ceil((horizon - t0) / step));
    const std::size_t n = starts.size();

    CoalescingBmResult res;
    res.dt = step;
    res.paths.resize(n);
    std::vector<double> pos(n, 0.0);
    std::vector<bool> active(n, false);
    // representative[i] follows merges; a merged path copies its survivor.
    std::vector<std::size_t> rep(n);
    for (std::size_t i = 0; i < n; ++i) {
        rep[i] = i;
        res.paths[i].start = starts[i];
        res.paths[i].merged_into = -1;
        res.paths[i].merge_time = std::numeric_limits<double>::infinity();
        res.paths[i].first_index = static_cast<std::int64_t>(
            std::ceil((starts[i].s - t0) / step - 1e-12));
    }

    GaussianDraws gauss(seed);
    const double sqdt = std::sqrt(step) * diffusion;

    for (std::int64_t k = 0; k <= n_steps; ++k) {
        const double t = t0 + static_cast<double>(k) * step;
        // Activate paths whose start time has been reached.
        for (std::size_t i = 0; i < n; ++i) {
            if (!active[i] && res.paths[i].first_index == k) {
                active[i] = true;
                pos[i] = starts[i].y;
            }
        }
        std::vector<double> prev = pos;
        if (k > 0) {
            for (std::size_t i = 0; i < n; ++i) {
                if (!active[i]) continue;
                if (rep[i] != i) continue;  // survivors advance, copies follow
                pos[i] += sqdt * gauss();
            }
            for (std::size_t i = 0; i < n; ++i)
                if (active[i] && rep[i] != i) pos[i] = pos[rep[i]];

            // Merge adjacent pairs: order inversion or bridge crossing.
            for (std::size_t i = 0; i + 1 < n; ++i) {
                if (!active[i] || !active[i + 1]) continue;
                std::size_t ri = rep[i], rj = rep[i + 1];
                if (ri == rj) continue;
                const double d_pre = prev[i + 1] - prev[i];
                const double d_post = pos[i + 1] - pos[i];
                bool merge = d_post <= 0.0;
                if (!merge && d_pre > 0.0) {
                    const double p_cross =
                        std::exp(-2.0 * d_pre * d_post / (2.0 * diffusion * diffusion * step));
                    if (gauss.uniform() < p_cross) merge = true;
                }
                if (merge) {
                    // The left path survives; everything repped by rj follows ri.
                    for (std::size_t l = 0; l < n; ++l)
                        if (rep[l] == rj) rep[l] = ri;
                    pos[i + 1] = pos[i];
                    res.paths[rj].merged_into = static_cast<std::int64_t>(ri);
                    res.paths[rj].merge_time = t;
                    for (std::size_t l = 0; l < n; ++l)
                        if (active[l] && rep[l] == ri) pos[l] = pos[ri];
                }
            }
        }
        for (std::size_t i = 0; i < n; ++i)
            if (active[i]) res.paths[i].values.push_back(pos[i]);
    }

    std::int64_t survivors = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (rep[i] == i && active[i]) ++survivors;
    res.survivors = survivors;
    return res;
}

}  // namespace grsnet
