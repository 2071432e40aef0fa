#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "grsnet/errors.hpp"

namespace grsnet {

// One experiment = (model, seed, replicate budget, probe geometry). The
// worker count never enters results: replicate i is always seeded from
// (master_seed, i) and aggregation is order-independent, so outputs are
// bit-identical for any scheduling.
struct ExperimentConfig {
    double p = 0.5;
    std::uint64_t master_seed = 1;
    std::int64_t replicates = 10000;
    std::vector<std::int64_t> horizons;  // strictly increasing lattice times
    std::vector<double> epsilons = {0.5};  // rescaled interval widths
    std::int64_t n_scale = 10000;           // diffusive scale N
    std::vector<double> t_values = {1.0};   // rescaled times
    std::int64_t separation = 1;            // starting gap for tau experiments
    std::int64_t mc_replicates = 1000000;   // replicates for one-step checks
    std::int64_t k_range = 10;              // displacement range for pmf tables
    int workers = 2;

    void validate() const;  // throws ConfigError
    // Canonical fingerprint of everything that determines the numbers
    // (workers excluded on purpose).
    std::string canonical_string() const;
    std::uint64_t config_hash() const;
};

// Monte Carlo point estimate with reproducibility metadata.
struct Estimate {
    double value = 0.0;
    double stderr_ = 0.0;
    std::int64_t n = 0;
    std::int64_t censored = 0;
    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;
};

Estimate make_proportion_estimate(std::int64_t count, std::int64_t n,
                                  const ExperimentConfig& cfg);

// Runs fn(i) for i in [0, n) across `workers` threads; fn must only write
// to replicate-indexed slots.
void parallel_replicates(std::int64_t n, int workers,
                         const std::function<void(std::int64_t)>& fn);

// ---- tau tail -------------------------------------------------------------

struct TauTailPoint {
    std::int64_t t;
    Estimate survival;          // P(tau > t)
    double sqrt_t_survival;
};

struct TauTailResult {
    std::vector<TauTailPoint> points;
    std::int64_t overflow_replicates = 0;  // SearchOverflow count (expect 0)
};

// Paths from (0,0) and (m,0), one environment per replicate, traced to the
// largest horizon or coalescence.
TauTailResult estimate_tau_tail(const ExperimentConfig& cfg, std::int64_t m);

// ---- eta statistics -------------------------------------------------------

struct EtaPoint {
    double epsilon;
    std::int64_t width;      // lattice interval width floor(eps * sigma * sqrt(N))
    std::int64_t levels;     // floor(t * N)
    Estimate p_ge2;
    Estimate p_ge3;
    double b1_reference;     // 2 Phi(eps / sqrt(2 t)) - 1
};

// Distinct-endpoint statistics for paths started from every integer in
// [0, width] at level 0. The interval width is sigma-normalized so that the
// rescaled width is epsilon for a unit-diffusion limit.
std::vector<EtaPoint> estimate_eta(const ExperimentConfig& cfg);

// Single-threshold view per the operation contract.
Estimate estimate_eta_ge(const ExperimentConfig& cfg, int threshold);

// ---- rescaled marginal ----------------------------------------------------

struct MarginalResult {
    std::vector<double> samples;  // X^{0,0}(floor(n t)) / (sigma sqrt(n)), sorted
    double ks_distance = 0.0;     // against Normal(0, t)
    double ks_threshold = 0.0;    // 1.63 / sqrt(n) * slack
    double sample_mean = 0.0;
    double sample_variance = 0.0;
    bool pass = false;
    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;
};

MarginalResult estimate_marginal(const ExperimentConfig& cfg);

// ---- scaled pair meeting --------------------------------------------------

struct PairMeetingPoint {
    double epsilon;
    double t;
    std::int64_t width;
    std::int64_t levels;
    Estimate survival;       // P(no coalescence by floor(t N))
    double bw_reference;     // bw_meet_survival(eps, t)
    double adjacent_survival;  // P(tau > floor(t N)) for a gap-1 pair
    double b2_product;         // sqrt(N) * adjacent * pair survival
};

std::vector<PairMeetingPoint> estimate_pair_meeting_scaled(const ExperimentConfig& cfg);

}  // namespace grsnet
