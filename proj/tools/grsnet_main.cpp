// Command-line front end: batch experiments with bit-reproducible outputs.
//
// Exit codes: 0 success, 2 configuration error, 3 statistical/verification
// failure, 4 enumeration budget exceeded.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "grsnet/analytics.hpp"
#include "grsnet/bw_oracle.hpp"
#include "grsnet/coupling.hpp"
#include "grsnet/environment.hpp"
#include "grsnet/errors.hpp"
#include "grsnet/io.hpp"
#include "grsnet/joint_law.hpp"
#include "grsnet/mc.hpp"
#include "grsnet/network.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace grsnet;

namespace {

constexpr const char* kVersion = "0.1.0";

struct GlobalOpts {
    std::string config_path;
    std::optional<std::uint64_t> seed_override;
    std::optional<int> workers_override;
    std::string out_dir = ".";
};

struct CouplingConfig {
    std::int64_t horizon = 2;
    std::int64_t max_increment = 2;
    std::int64_t k_offset = 1;
    std::int64_t pad = 0;
    std::int64_t halfwidth = 4;
    std::string rule3 = "path_partner";  // or "literal"
    std::int64_t p_num = 1, p_den = 2;
};

struct RunConfig {
    ExperimentConfig mc;
    CouplingConfig coupling;
};

void require_keys(const json& j, const std::vector<std::string>& allowed,
                  const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ConfigError("unknown key '" + key + "' in " + where);
    }
}

RunConfig load_config(const GlobalOpts& g) {
    RunConfig rc;
    if (!g.config_path.empty()) {
        std::ifstream in(g.config_path);
        if (!in) throw ConfigError("cannot open config file: " + g.config_path);
        json j;
        try {
            in >> j;
        } catch (const json::exception& e) {
            throw ConfigError(std::string("config parse error: ") + e.what());
        }
        require_keys(j,
                     {"p", "master_seed", "replicates", "horizons", "epsilon", "epsilons",
                      "n_scale", "t", "t_values", "separation", "mc_replicates", "k_range",
                      "workers", "p_rational", "coupling"},
                     "config");
        if (j.contains("p")) rc.mc.p = j["p"].get<double>();
        if (j.contains("master_seed")) rc.mc.master_seed = j["master_seed"].get<std::uint64_t>();
        if (j.contains("replicates")) rc.mc.replicates = j["replicates"].get<std::int64_t>();
        if (j.contains("horizons"))
            rc.mc.horizons = j["horizons"].get<std::vector<std::int64_t>>();
        if (j.contains("epsilon") && j.contains("epsilons"))
            throw ConfigError("config: give either 'epsilon' or 'epsilons', not both");
        if (j.contains("epsilon")) rc.mc.epsilons = {j["epsilon"].get<double>()};
        if (j.contains("epsilons")) rc.mc.epsilons = j["epsilons"].get<std::vector<double>>();
        if (j.contains("t") && j.contains("t_values"))
            throw ConfigError("config: give either 't' or 't_values', not both");
        if (j.contains("t")) rc.mc.t_values = {j["t"].get<double>()};
        if (j.contains("t_values")) rc.mc.t_values = j["t_values"].get<std::vector<double>>();
        if (j.contains("n_scale")) rc.mc.n_scale = j["n_scale"].get<std::int64_t>();
        if (j.contains("separation")) rc.mc.separation = j["separation"].get<std::int64_t>();
        if (j.contains("mc_replicates"))
            rc.mc.mc_replicates = j["mc_replicates"].get<std::int64_t>();
        if (j.contains("k_range")) rc.mc.k_range = j["k_range"].get<std::int64_t>();
        if (j.contains("workers")) rc.mc.workers = j["workers"].get<int>();
        if (j.contains("p_rational")) {
            const auto v = j["p_rational"].get<std::vector<std::int64_t>>();
            if (v.size() != 2) throw ConfigError("config: p_rational must be [num, den]");
            rc.coupling.p_num = v[0];
            rc.coupling.p_den = v[1];
        }
        if (j.contains("coupling")) {
            const json& c = j["coupling"];
            require_keys(c, {"horizon", "max_increment", "k_offset", "pad", "halfwidth", "rule3"},
                         "config.coupling");
            if (c.contains("horizon")) rc.coupling.horizon = c["horizon"].get<std::int64_t>();
            if (c.contains("max_increment"))
                rc.coupling.max_increment = c["max_increment"].get<std::int64_t>();
            if (c.contains("k_offset")) rc.coupling.k_offset = c["k_offset"].get<std::int64_t>();
            if (c.contains("pad")) rc.coupling.pad = c["pad"].get<std::int64_t>();
            if (c.contains("halfwidth")) rc.coupling.halfwidth = c["halfwidth"].get<std::int64_t>();
            if (c.contains("rule3")) {
                rc.coupling.rule3 = c["rule3"].get<std::string>();
                if (rc.coupling.rule3 != "literal" && rc.coupling.rule3 != "path_partner")
                    throw ConfigError("config: coupling.rule3 must be 'literal' or 'path_partner'");
            }
        }
    }
    if (g.seed_override) rc.mc.master_seed = *g.seed_override;
    if (g.workers_override) rc.mc.workers = *g.workers_override;
    return rc;
}

std::string iso_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&tt));
    return buf;
}

class Manifest {
  public:
    Manifest(const GlobalOpts& g, const RunConfig& rc, const std::string& command)
        : out_dir_(g.out_dir) {
        j_["tool"] = "grsnet";
        j_["version"] = kVersion;
        j_["command"] = command;
        j_["master_seed"] = rc.mc.master_seed;
        j_["config_hash"] = hex64(rc.mc.config_hash());
        j_["config"] = json::parse(std::string("{}"));
        j_["config"]["canonical"] = rc.mc.canonical_string();
        j_["started"] = iso_now();
        fs::create_directories(out_dir_);
    }
    void add_output(const std::string& path) { outputs_.push_back(path); }
    void finish() {
        j_["outputs"] = outputs_;
        j_["finished"] = iso_now();
        std::ofstream out(fs::path(out_dir_) / "manifest.json");
        out << j_.dump(2) << "\n";
    }

  private:
    std::string out_dir_;
    json j_;
    std::vector<std::string> outputs_;
};

std::ofstream open_output(const GlobalOpts& g, Manifest& m, const std::string& name) {
    fs::create_directories(g.out_dir);
    const fs::path path = fs::path(g.out_dir) / name;
    m.add_output(path.string());
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open output file: " + path.string());
    return out;
}

// ---- subcommands ------------------------------------------------------------

int cmd_increment_check(const GlobalOpts& g, const RunConfig& rc) {
    rc.mc.validate();
    if (!(rc.mc.p < 1.0)) throw ConfigError("increment-check: requires p < 1");
    Manifest manifest(g, rc, "increment-check");
    const std::int64_t k_max = rc.mc.k_range;
    const std::vector<double> enumerated =
        increment_pmf_by_window_enumeration(rc.mc.p, k_max);

    // Monte Carlo one-hop frequencies.
    const std::int64_t n = rc.mc.mc_replicates;
    std::vector<std::int64_t> counts(static_cast<std::size_t>(2 * k_max + 1), 0);
    std::vector<std::int32_t> displacement(static_cast<std::size_t>(n));
    parallel_replicates(n, rc.mc.workers, [&](std::int64_t i) {
        const Environment env(replicate_seed(rc.mc.master_seed, static_cast<std::uint64_t>(i)),
                              rc.mc.p);
        displacement[static_cast<std::size_t>(i)] =
            static_cast<std::int32_t>(hop(env, {0, 0}).x);
    });
    for (std::int64_t i = 0; i < n; ++i) {
        const std::int64_t k = displacement[static_cast<std::size_t>(i)];
        if (k >= -k_max && k <= k_max) counts[static_cast<std::size_t>(k + k_max)] += 1;
    }

    auto out = open_output(g, manifest, "increment_check.csv");
    out << "k,closed_form,enumerated,mc,stderr\n";
    bool enum_ok = true, mc_ok = true;
    for (std::int64_t k = -k_max; k <= k_max; ++k) {
        const double closed = increment_pmf(rc.mc.p, k);
        const double enumd = enumerated[static_cast<std::size_t>(k + k_max)];
        const double mc = static_cast<double>(counts[static_cast<std::size_t>(k + k_max)]) /
                          static_cast<double>(n);
        const double se = std::sqrt(closed * (1.0 - closed) / static_cast<double>(n));
        out << k << "," << fmt17(closed) << "," << fmt17(enumd) << "," << fmt17(mc) << ","
            << fmt17(se) << "\n";
        if (std::abs(closed - enumd) > 1e-10) enum_ok = false;
        if (std::abs(mc - closed) > 4.0 * se) mc_ok = false;
    }
    manifest.finish();
    if (!enum_ok || !mc_ok) {
        std::cerr << "increment-check: " << (enum_ok ? "" : "enumeration mismatch ")
                  << (mc_ok ? "" : "MC beyond 4 sigma") << "\n";
        return 3;
    }
    return 0;
}

int cmd_tau_tail(const GlobalOpts& g, const RunConfig& rc, const std::string& synthetic) {
    Manifest manifest(g, rc, "tau-tail");
    std::vector<TailPoint> series;
    TauTailResult result;
    if (!synthetic.empty()) {
        // Plumbing check with an injected series.
        for (double t : {100.0, 316.0, 1000.0, 3162.0, 10000.0}) {
            const double s = synthetic == "c_over_t" ? 10.0 / t : 0.3 / std::sqrt(t);
            series.push_back({t, s, 0.001});
            TauTailPoint pt;
            pt.t = static_cast<std::int64_t>(t);
            pt.survival.value = s;
            pt.survival.stderr_ = 0.001;
            pt.survival.n = 0;
            pt.sqrt_t_survival = std::sqrt(t) * s;
            result.points.push_back(pt);
        }
    } else {
        rc.mc.validate();
        if (rc.mc.horizons.empty()) throw ConfigError("tau-tail: horizons required");
        result = estimate_tau_tail(rc.mc, rc.mc.separation);
        for (const auto& pt : result.points)
            series.push_back(
                {static_cast<double>(pt.t), pt.survival.value, pt.survival.stderr_});
    }

    auto out = open_output(g, manifest, "tau_tail.csv");
    out << "t,survival,stderr,sqrt_t_survival\n";
    for (const auto& pt : result.points)
        out << pt.t << "," << fmt17(pt.survival.value) << "," << fmt17(pt.survival.stderr_)
            << "," << fmt17(pt.sqrt_t_survival) << "\n";

    const TailExponentReport rep = tail_exponent_check(series);
    auto jout = open_output(g, manifest, "tau_tail_report.json");
    json jr;
    jr["max_sqrt_t_survival"] = rep.max_sqrt_t_survival;
    jr["slope"] = rep.slope;
    jr["slope_stderr"] = rep.slope_stderr;
    jr["upward_trend"] = rep.upward_trend;
    jr["slope_in_window"] = rep.slope_in_window;
    jr["degenerate"] = rep.degenerate;
    jr["steeper_than_bound"] = rep.steeper_than_bound;
    jr["overflow_replicates"] = result.overflow_replicates;
    jr["seed"] = rc.mc.master_seed;
    jr["config_hash"] = hex64(rc.mc.config_hash());
    jout << jr.dump(2) << "\n";
    manifest.finish();

    if (rep.degenerate) {
        std::cerr << "tau-tail: degenerate survival series\n";
        return 3;
    }
    return rep.slope_in_window ? 0 : 3;
}

int cmd_eta(const GlobalOpts& g, const RunConfig& rc) {
    rc.mc.validate();
    Manifest manifest(g, rc, "eta");
    const auto points = estimate_eta(rc.mc);
    auto out = open_output(g, manifest, "eta.csv");
    out << "epsilon,width,levels,p_ge2,stderr2,p_ge3,stderr3,b1_reference,seed,config_hash\n";
    for (const auto& pt : points)
        out << fmt17(pt.epsilon) << "," << pt.width << "," << pt.levels << ","
            << fmt17(pt.p_ge2.value) << "," << fmt17(pt.p_ge2.stderr_) << ","
            << fmt17(pt.p_ge3.value) << "," << fmt17(pt.p_ge3.stderr_) << ","
            << fmt17(pt.b1_reference) << "," << pt.p_ge2.seed << ","
            << hex64(pt.p_ge2.config_hash) << "\n";
    manifest.finish();
    return 0;
}

int cmd_marginal(const GlobalOpts& g, const RunConfig& rc) {
    rc.mc.validate();
    Manifest manifest(g, rc, "marginal");
    const MarginalResult res = estimate_marginal(rc.mc);
    auto out = open_output(g, manifest, "marginal.csv");
    out << "t,n_scale,replicates,ks_distance,ks_threshold,sample_mean,sample_variance,pass,"
           "seed,config_hash\n";
    out << fmt17(rc.mc.t_values.front()) << "," << rc.mc.n_scale << "," << rc.mc.replicates
        << "," << fmt17(res.ks_distance) << "," << fmt17(res.ks_threshold) << ","
        << fmt17(res.sample_mean) << "," << fmt17(res.sample_variance) << ","
        << (res.pass ? 1 : 0) << "," << res.seed << "," << hex64(res.config_hash) << "\n";
    manifest.finish();
    return res.pass ? 0 : 3;
}

int cmd_bw_compare(const GlobalOpts& g, const RunConfig& rc) {
    rc.mc.validate();
    Manifest manifest(g, rc, "bw-compare");
    const auto points = estimate_pair_meeting_scaled(rc.mc);
    auto out = open_output(g, manifest, "bw_compare.csv");
    out << "epsilon,t,width,levels,survival,stderr,bw_reference,adjacent_survival,"
           "b2_product,seed,config_hash\n";
    bool ok = true;
    for (const auto& pt : points) {
        out << fmt17(pt.epsilon) << "," << fmt17(pt.t) << "," << pt.width << "," << pt.levels
            << "," << fmt17(pt.survival.value) << "," << fmt17(pt.survival.stderr_) << ","
            << fmt17(pt.bw_reference) << "," << fmt17(pt.adjacent_survival) << ","
            << fmt17(pt.b2_product) << "," << pt.survival.seed << ","
            << hex64(pt.survival.config_hash) << "\n";
        if (std::abs(pt.survival.value - pt.bw_reference) >
            3.0 * pt.survival.stderr_ + 0.02)
            ok = false;
    }
    manifest.finish();
    return ok ? 0 : 3;
}

int cmd_coupling_verify(const GlobalOpts& g, const RunConfig& rc) {
    Manifest manifest(g, rc, "coupling-verify");
    const RationalP p(rc.coupling.p_num, rc.coupling.p_den);
    const Rule3Reading reading = rc.coupling.rule3 == "literal" ? Rule3Reading::Literal
                                                                : Rule3Reading::PathPartner;
    GridSpec grid;
    grid.horizon = rc.coupling.horizon;
    grid.max_increment = rc.coupling.max_increment;
    grid.k_offset = rc.coupling.k_offset;
    grid.workers = rc.mc.workers;
    grid.dp.pad = rc.coupling.pad;

    const MonotonicityReport mono = verify_monotonicity(grid, p);

    json jr;
    jr["p_rational"] = {rc.coupling.p_num, rc.coupling.p_den};
    jr["horizon"] = grid.horizon;
    jr["max_increment"] = grid.max_increment;
    jr["k_offset"] = grid.k_offset;
    jr["rule3"] = rc.coupling.rule3;
    jr["seed"] = rc.mc.master_seed;
    jr["config_hash"] = hex64(rc.mc.config_hash());
    jr["pairs_checked"] = mono.n_pairs;
    jr["violations"] = json::array();
    for (const auto& v : mono.pairs) {
        if (v.monotone1_violated || v.monotone2_violated) {
            json jv;
            jv["t0"] = v.t0;
            jv["increments"] = v.pi1.increments;
            jv["monotone1"] = v.monotone1_violated;
            jv["monotone2"] = v.monotone2_violated;
            jr["violations"].push_back(jv);
        }
    }
    jr["inconclusive"] = mono.n_inconclusive;
    jr["max_escape"] = mono.max_escape;

    // Coupling pushforward + containment on canonical pairs covering each case.
    CouplingOptions copt;
    copt.rule3 = reading;
    bool push_ok = true;
    json jpush = json::array();
    struct CaseSpec {
        CouplingCase c;
        std::vector<std::int64_t> inc1;
        std::int64_t t0;
    };
    const std::vector<CaseSpec> cases = {
        {CouplingCase::Case1, {-1, 0}, 1},  {CouplingCase::Case1, {-2, 1}, 1},
        {CouplingCase::Case1, {0, -1}, 2},  {CouplingCase::Auxiliary, {0, 0}, 1},
        {CouplingCase::Auxiliary, {1, 0}, 1}, {CouplingCase::KGe2, {0, 0}, 1},
        {CouplingCase::KGe2, {1, 0}, 1},    {CouplingCase::KGe2, {2, -1}, 1},
        {CouplingCase::KGe2, {0, 1}, 2},
    };
    for (const auto& cs : cases) {
        CondPath pi1;
        pi1.start = 0;
        pi1.increments = cs.inc1;
        CondPath pi2 = pi1;
        pi2.increments[static_cast<std::size_t>(cs.t0 - 1)] += 1;
        const PushforwardReport pr = verify_pushforward(cs.c, pi1, pi2, cs.t0, p, copt);
        json jp;
        jp["case"] = cs.c == CouplingCase::Case1
                         ? "case1"
                         : cs.c == CouplingCase::Auxiliary ? "auxiliary" : "k_ge_2";
        jp["increments"] = cs.inc1;
        jp["t0"] = cs.t0;
        jp["exact_on_event_field"] = pr.exact_on_event_field;
        jp["exact_on_full_field"] = pr.exact_on_full_field;
        jp["deviations"] = pr.deviations;
        // Containment atoms grow as 2^(width * levels); single-level paths
        // get the full halfwidth, longer ones a narrower window.
        ContainmentOptions ropt;
        ropt.window_halfwidth = pi1.length() > 1 ? 2 : 4;
        ropt.coupling = copt;
        const ContainmentReport cr =
            verify_containment(cs.c, pi1, pi2, cs.t0, -1, p, ropt);
        jp["containment_violations"] = cr.violations;
        jp["containment_aborted_mass"] = cr.aborted_mass;
        jp["full_event_counterexamples"] = cr.full_event_counterexamples;
        jpush.push_back(jp);
        if (!pr.exact_on_event_field || cr.violations != 0) push_ok = false;
    }
    jr["pushforward"] = jpush;

    // Conditional independence on a representative conditioning path.
    CondPath pi;
    pi.start = 0;
    pi.increments = {1, -1};
    const CondIndepReport ci = verify_conditional_independence(pi, p, {3, 1 << 22});
    jr["condindep_exact"] = ci.exact;
    jr["condindep_outcomes"] = ci.outcome_pairs;

    auto out = open_output(g, manifest, "coupling_verify.json");
    out << jr.dump(2) << "\n";
    manifest.finish();

    if (mono.n_violations != 0 || !push_ok || !ci.exact) return 3;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Drainage-network lattice simulator and verifier"};
    app.set_version_flag("--version", kVersion);

    GlobalOpts g;
    std::uint64_t seed_val = 0;
    int workers_val = 0;
    app.add_option("--config", g.config_path, "JSON experiment configuration");
    auto* seed_opt = app.add_option("--seed", seed_val, "override master seed");
    auto* workers_opt = app.add_option("--workers", workers_val, "override worker count");
    app.add_option("--out", g.out_dir, "output directory");
    app.require_subcommand(1);

    auto* inc = app.add_subcommand("increment-check", "one-step displacement law checks");
    auto* tau = app.add_subcommand("tau-tail", "coalescence-time tail experiment");
    std::string synthetic;
    tau->add_option("--synthetic", synthetic, "inject a synthetic series (plumbing check)")
        ->check(CLI::IsMember({"c_over_sqrt_t", "c_over_t"}));
    auto* eta = app.add_subcommand("eta", "distinct-endpoint statistics");
    auto* marginal = app.add_subcommand("marginal", "rescaled endpoint distribution");
    auto* bw = app.add_subcommand("bw-compare", "pair-survival vs Brownian closed form");
    auto* coup = app.add_subcommand("coupling-verify", "exact coupling verification");

    try {
        app.parse(argc, argv);
        if (seed_opt->count()) g.seed_override = seed_val;
        if (workers_opt->count()) g.workers_override = workers_val;
        const RunConfig rc = load_config(g);
        if (inc->parsed()) return cmd_increment_check(g, rc);
        if (tau->parsed()) return cmd_tau_tail(g, rc, synthetic);
        if (eta->parsed()) return cmd_eta(g, rc);
        if (marginal->parsed()) return cmd_marginal(g, rc);
        if (bw->parsed()) return cmd_bw_compare(g, rc);
        if (coup->parsed()) return cmd_coupling_verify(g, rc);
        return 2;
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const BudgetExceeded& e) {
        std::cerr << "budget error: " << e.what() << "\n";
        return 4;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
