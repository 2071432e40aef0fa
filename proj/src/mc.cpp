#include "grsnet/mc.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

#include "grsnet/analytics.hpp"
#include "grsnet/bw_oracle.hpp"
#include "grsnet/environment.hpp"
#include "grsnet/io.hpp"
#include "grsnet/network.hpp"

namespace grsnet {

void ExperimentConfig::validate() const {
    if (!(p > 0.0) || p > 1.0) throw ConfigError("config: p must lie in (0, 1]");
    if (replicates < 1) throw ConfigError("config: replicates must be >= 1");
    for (std::size_t i = 1; i < horizons.size(); ++i)
        if (horizons[i] <= horizons[i - 1])
            throw ConfigError("config: horizons must be strictly increasing");
    for (double e : epsilons)
        if (!(e > 0.0)) throw ConfigError("config: epsilon must be > 0");
    if (epsilons.empty()) throw ConfigError("config: need at least one epsilon");
    if (n_scale < 1) throw ConfigError("config: n_scale must be >= 1");
    for (double t : t_values)
        if (!(t >= 0.0)) throw ConfigError("config: t values must be >= 0");
    if (t_values.empty()) throw ConfigError("config: need at least one t value");
    if (separation < 0) throw ConfigError("config: separation must be >= 0");
    if (mc_replicates < 1) throw ConfigError("config: mc_replicates must be >= 1");
    if (k_range < 1) throw ConfigError("config: k_range must be >= 1");
    if (workers < 1) throw ConfigError("config: workers must be >= 1");
}

std::string ExperimentConfig::canonical_string() const {
    std::ostringstream os;
    os << "p=" << fmt17(p) << ";seed=" << master_seed << ";replicates=" << replicates
       << ";horizons=";
    for (auto h : horizons) os << h << ",";
    os << ";epsilons=";
    for (auto e : epsilons) os << fmt17(e) << ",";
    os << ";n_scale=" << n_scale << ";t_values=";
    for (auto t : t_values) os << fmt17(t) << ",";
    os << ";separation=" << separation << ";mc_replicates=" << mc_replicates
       << ";k_range=" << k_range;
    return os.str();
}

std::uint64_t ExperimentConfig::config_hash() const {
    return fnv1a64(canonical_string());
}

Estimate make_proportion_estimate(std::int64_t count, std::int64_t n,
                                  const ExperimentConfig& cfg) {
    Estimate e;
    e.n = n;
    e.value = static_cast<double>(count) / static_cast<double>(n);
    e.stderr_ = std::sqrt(e.value * (1.0 - e.value) / static_cast<double>(n));
    e.seed = cfg.master_seed;
    e.config_hash = cfg.config_hash();
    return e;
}

void parallel_replicates(std::int64_t n, int workers,
                         const std::function<void(std::int64_t)>& fn) {
    if (workers <= 1 || n < 2 * workers) {
        for (std::int64_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    const std::int64_t chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const std::int64_t lo = static_cast<std::int64_t>(w) * chunk;
        const std::int64_t hi = std::min<std::int64_t>(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::int64_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

// ---- tau tail --------------------------------------------------------------

TauTailResult estimate_tau_tail(const ExperimentConfig& cfg, std::int64_t m) {
    cfg.validate();
    if (m < 1) throw ConfigError("estimate_tau_tail: separation must be >= 1");
    if (cfg.horizons.empty()) throw ConfigError("estimate_tau_tail: horizons required");

    const std::int64_t max_t = cfg.horizons.back();
    const std::int64_t n = cfg.replicates;
    constexpr std::int64_t kCensored = -1;
    std::vector<std::int64_t> tau(static_cast<std::size_t>(n), kCensored);
    std::vector<std::uint8_t> overflow(static_cast<std::size_t>(n), 0);

    parallel_replicates(n, cfg.workers, [&](std::int64_t i) {
        const Environment env(replicate_seed(cfg.master_seed, static_cast<std::uint64_t>(i)),
                              cfg.p);
        try {
            const CoalescenceTime ct = coalescence_time(env, {0, 0}, {m, 0}, max_t);
            tau[static_cast<std::size_t>(i)] = ct.censored ? kCensored : ct.tau;
        } catch (const SearchOverflow&) {
            overflow[static_cast<std::size_t>(i)] = 1;
        }
    });

    TauTailResult res;
    for (auto v : overflow) res.overflow_replicates += v;
    for (std::int64_t t : cfg.horizons) {
        std::int64_t alive = 0;
        for (std::int64_t v : tau)
            if (v == kCensored || v > t) ++alive;
        TauTailPoint pt;
        pt.t = t;
        pt.survival = make_proportion_estimate(alive, n, cfg);
        pt.survival.censored = alive;
        pt.sqrt_t_survival = std::sqrt(static_cast<double>(t)) * pt.survival.value;
        res.points.push_back(pt);
    }
    return res;
}

// ---- eta -------------------------------------------------------------------

namespace {

struct EtaCounts {
    std::int64_t ge2 = 0;
    std::int64_t ge3 = 0;
};

EtaCounts run_eta_experiment(const ExperimentConfig& cfg, std::int64_t width,
                             std::int64_t levels) {
    const std::int64_t n = cfg.replicates;
    std::vector<std::uint8_t> ge2(static_cast<std::size_t>(n), 0);
    std::vector<std::uint8_t> ge3(static_cast<std::size_t>(n), 0);
    parallel_replicates(n, cfg.workers, [&](std::int64_t i) {
        const Environment env(replicate_seed(cfg.master_seed, static_cast<std::uint64_t>(i)),
                              cfg.p);
        const std::int64_t eta = width >= 1 ? eta_count(env, 0, width, 0, levels) : 1;
        ge2[static_cast<std::size_t>(i)] = eta >= 2;
        ge3[static_cast<std::size_t>(i)] = eta >= 3;
    });
    EtaCounts c;
    for (std::int64_t i = 0; i < n; ++i) {
        c.ge2 += ge2[static_cast<std::size_t>(i)];
        c.ge3 += ge3[static_cast<std::size_t>(i)];
    }
    return c;
}

}  // namespace

std::vector<EtaPoint> estimate_eta(const ExperimentConfig& cfg) {
    cfg.validate();
    if (!(cfg.p < 1.0)) throw ConfigError("estimate_eta: requires p < 1");
    const double t = cfg.t_values.front();
    if (!(t > 0.0)) throw ConfigError("estimate_eta: t must be > 0");
    const double sigma = std::sqrt(sigma2(cfg.p));
    const double sqrt_n = std::sqrt(static_cast<double>(cfg.n_scale));
    const std::int64_t levels = static_cast<std::int64_t>(t * static_cast<double>(cfg.n_scale));

    std::vector<EtaPoint> out;
    for (double eps : cfg.epsilons) {
        EtaPoint pt;
        pt.epsilon = eps;
        pt.width = static_cast<std::int64_t>(eps * sigma * sqrt_n);
        pt.levels = levels;
        const EtaCounts c = run_eta_experiment(cfg, pt.width, levels);
        pt.p_ge2 = make_proportion_estimate(c.ge2, cfg.replicates, cfg);
        pt.p_ge3 = make_proportion_estimate(c.ge3, cfg.replicates, cfg);
        pt.b1_reference = bw_meet_survival({eps, t, 1.0});
        out.push_back(pt);
    }
    return out;
}

Estimate estimate_eta_ge(const ExperimentConfig& cfg, int threshold) {
    if (threshold != 2 && threshold != 3)
        throw ConfigError("estimate_eta_ge: threshold must be 2 or 3");
    const std::vector<EtaPoint> pts = estimate_eta(cfg);
    return threshold == 2 ? pts.front().p_ge2 : pts.front().p_ge3;
}

// ---- marginal ----------------------------------------------------------------

MarginalResult estimate_marginal(const ExperimentConfig& cfg) {
    cfg.validate();
    if (!(cfg.p < 1.0)) throw ConfigError("estimate_marginal: requires p < 1");
    if (cfg.n_scale < 1000) throw ConfigError("estimate_marginal: n_scale must be >= 1e3");
    const double t = cfg.t_values.front();
    const std::int64_t steps = static_cast<std::int64_t>(t * static_cast<double>(cfg.n_scale));
    const double sigma = std::sqrt(sigma2(cfg.p));
    const double scale = sigma * std::sqrt(static_cast<double>(cfg.n_scale));

    const std::int64_t n = cfg.replicates;
    MarginalResult res;
    res.samples.resize(static_cast<std::size_t>(n));
    parallel_replicates(n, cfg.workers, [&](std::int64_t i) {
        const Environment env(replicate_seed(cfg.master_seed, static_cast<std::uint64_t>(i)),
                              cfg.p);
        SiteCoord cur{0, 0};
        for (std::int64_t s = 0; s < steps; ++s) cur = hop(env, cur);
        res.samples[static_cast<std::size_t>(i)] = static_cast<double>(cur.x) / scale;
    });

    std::sort(res.samples.begin(), res.samples.end());
    const double dn = static_cast<double>(n);
    KahanSum mean_acc, var_acc;
    for (double x : res.samples) mean_acc.add(x);
    res.sample_mean = mean_acc.value() / dn;
    for (double x : res.samples) var_acc.add((x - res.sample_mean) * (x - res.sample_mean));
    res.sample_variance = var_acc.value() / (dn - 1.0);

    // One-sample KS distance against Normal(0, t); t = 0 degenerates to a
    // point mass at 0, where the distance is 0 iff every sample is 0.
    double d = 0.0;
    if (t > 0.0) {
        for (std::size_t i = 0; i < res.samples.size(); ++i) {
            const double f = normal_cdf(res.samples[i] / std::sqrt(t));
            const double lo = static_cast<double>(i) / dn;
            const double hi = static_cast<double>(i + 1) / dn;
            d = std::max(d, std::max(f - lo, hi - f));
        }
    } else {
        for (double x : res.samples)
            if (x != 0.0) d = 1.0;
    }
    res.ks_distance = d;
    res.ks_threshold = 1.63 / std::sqrt(dn) * 1.5;  // 1% level with slack factor
    res.pass = res.ks_distance < res.ks_threshold;
    res.seed = cfg.master_seed;
    res.config_hash = cfg.config_hash();
    return res;
}

// ---- scaled pair meeting -------------------------------------------------------

std::vector<PairMeetingPoint> estimate_pair_meeting_scaled(const ExperimentConfig& cfg) {
    cfg.validate();
    if (!(cfg.p < 1.0)) throw ConfigError("estimate_pair_meeting_scaled: requires p < 1");
    const double sigma = std::sqrt(sigma2(cfg.p));
    const double sqrt_n = std::sqrt(static_cast<double>(cfg.n_scale));
    const std::int64_t n = cfg.replicates;

    std::vector<double> ts = cfg.t_values;
    std::sort(ts.begin(), ts.end());
    const std::int64_t max_levels =
        static_cast<std::int64_t>(ts.back() * static_cast<double>(cfg.n_scale));

    std::vector<PairMeetingPoint> out;
    for (double eps : cfg.epsilons) {
        const std::int64_t width = static_cast<std::int64_t>(eps * sigma * sqrt_n);
        std::vector<std::int64_t> tau_pair(static_cast<std::size_t>(n));
        std::vector<std::int64_t> tau_adj(static_cast<std::size_t>(n));
        parallel_replicates(n, cfg.workers, [&](std::int64_t i) {
            const Environment env(
                replicate_seed(cfg.master_seed, static_cast<std::uint64_t>(i)), cfg.p);
            const CoalescenceTime cp =
                coalescence_time(env, {0, 0}, {width, 0}, max_levels);
            tau_pair[static_cast<std::size_t>(i)] = cp.censored ? -1 : cp.tau;
            const CoalescenceTime ca = coalescence_time(env, {0, 0}, {1, 0}, max_levels);
            tau_adj[static_cast<std::size_t>(i)] = ca.censored ? -1 : ca.tau;
        });
        for (double t : ts) {
            const std::int64_t levels =
                static_cast<std::int64_t>(t * static_cast<double>(cfg.n_scale));
            std::int64_t alive = 0, alive_adj = 0;
            for (std::int64_t i = 0; i < n; ++i) {
                const std::int64_t tp = tau_pair[static_cast<std::size_t>(i)];
                const std::int64_t ta = tau_adj[static_cast<std::size_t>(i)];
                if (tp < 0 || tp > levels) ++alive;
                if (ta < 0 || ta > levels) ++alive_adj;
            }
            PairMeetingPoint pt;
            pt.epsilon = eps;
            pt.t = t;
            pt.width = width;
            pt.levels = levels;
            pt.survival = make_proportion_estimate(alive, n, cfg);
            pt.survival.censored = alive;
            pt.bw_reference = width >= 1 ? bw_meet_survival({eps, t, 1.0}) : 0.0;
            pt.adjacent_survival = static_cast<double>(alive_adj) / static_cast<double>(n);
            pt.b2_product = sqrt_n * pt.adjacent_survival * pt.survival.value;
            out.push_back(pt);
        }
    }
    return out;
}

}  // namespace grsnet
