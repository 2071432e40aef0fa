// Exercises the installed command-line surface end to end: exit codes,
// column contracts, config validation and byte-stable reruns. The binary
// path arrives as argv[1].
#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

std::string g_cli;

int run(const std::string& args, const std::string& log = "/dev/null") {
    const std::string cmd = g_cli + " " + args + " > " + log + " 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("grsnet_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_config(const fs::path& path, const std::string& body) {
    std::ofstream out(path);
    out << body;
}

}  // namespace

TEST_CASE("synthetic tail series: plumbing and exit codes") {
    const fs::path dir = fresh_dir("synth");
    CHECK(run("--out " + dir.string() + " tau-tail --synthetic c_over_sqrt_t") == 0);
    const std::string csv = slurp(dir / "tau_tail.csv");
    CHECK(csv.rfind("t,survival,stderr,sqrt_t_survival\n", 0) == 0);
    const std::string rep = slurp(dir / "tau_tail_report.json");
    CHECK(rep.find("\"slope\": -0.5") != std::string::npos);

    const fs::path dir2 = fresh_dir("synth2");
    // 1/t decays steeper than the slope window allows
    CHECK(run("--out " + dir2.string() + " tau-tail --synthetic c_over_t") == 3);
    const std::string rep2 = slurp(dir2 / "tau_tail_report.json");
    CHECK(rep2.find("\"steeper_than_bound\": true") != std::string::npos);
}

TEST_CASE("config validation failures exit with code 2") {
    const fs::path dir = fresh_dir("badcfg");
    const fs::path cfg = dir / "cfg.json";

    SUBCASE("unknown key is named") {
        write_config(cfg, "{\"replicatez\": 10}");
        const fs::path log = dir / "log.txt";
        CHECK(run("--config " + cfg.string() + " --out " + dir.string() + " eta",
                  log.string()) == 2);
        CHECK(slurp(log).find("replicatez") != std::string::npos);
    }
    SUBCASE("malformed JSON") {
        write_config(cfg, "{\"p\": 0.5");
        CHECK(run("--config " + cfg.string() + " --out " + dir.string() + " eta") == 2);
    }
    SUBCASE("invalid values") {
        write_config(cfg, "{\"p\": 1.5}");
        CHECK(run("--config " + cfg.string() + " --out " + dir.string() + " eta") == 2);
    }
    SUBCASE("epsilon given twice") {
        write_config(cfg, "{\"epsilon\": 0.5, \"epsilons\": [0.5]}");
        CHECK(run("--config " + cfg.string() + " --out " + dir.string() + " eta") == 2);
    }
    SUBCASE("missing config file") {
        CHECK(run("--config /nonexistent.json --out " + dir.string() + " eta") == 2);
    }
}

TEST_CASE("degenerate tau-tail run reports and exits 3") {
    const fs::path dir = fresh_dir("frozen");
    const fs::path cfg = dir / "cfg.json";
    write_config(cfg,
                 "{\"p\": 1.0, \"replicates\": 50, \"master_seed\": 5,"
                 " \"horizons\": [100, 316, 1000, 3162, 10000]}");
    CHECK(run("--config " + cfg.string() + " --out " + dir.string() + " tau-tail") == 3);
    const std::string rep = slurp(dir / "tau_tail_report.json");
    CHECK(rep.find("\"degenerate\": true") != std::string::npos);
}

TEST_CASE("outputs are byte-identical across worker counts and reruns") {
    const fs::path cfg_dir = fresh_dir("repro");
    const fs::path cfg = cfg_dir / "cfg.json";
    write_config(cfg,
                 "{\"p\": 0.5, \"replicates\": 3000, \"master_seed\": 31337,"
                 " \"horizons\": [10, 31, 100, 316, 1000], \"separation\": 1}");
    std::string csv[3];
    int i = 0;
    for (const char* workers : {"1", "4", "16"}) {
        const fs::path dir = fresh_dir(std::string("repro_w") + workers);
        run("--config " + cfg.string() + " --workers " + workers + " --out " + dir.string() +
            " tau-tail");
        csv[i++] = slurp(dir / "tau_tail.csv");
    }
    CHECK(csv[0] == csv[1]);
    CHECK(csv[0] == csv[2]);
    CHECK(csv[0].find("\n10,") != std::string::npos);
}

TEST_CASE("seed override changes results deterministically") {
    const fs::path cfg_dir = fresh_dir("seed");
    const fs::path cfg = cfg_dir / "cfg.json";
    write_config(cfg,
                 "{\"p\": 0.5, \"replicates\": 500, \"master_seed\": 1,"
                 " \"horizons\": [10, 31, 100, 316, 1000]}");
    const fs::path d1 = fresh_dir("seed_a");
    const fs::path d2 = fresh_dir("seed_b");
    const fs::path d3 = fresh_dir("seed_c");
    run("--config " + cfg.string() + " --out " + d1.string() + " tau-tail");
    run("--config " + cfg.string() + " --seed 99 --out " + d2.string() + " tau-tail");
    run("--config " + cfg.string() + " --seed 99 --out " + d3.string() + " tau-tail");
    CHECK(slurp(d1 / "tau_tail.csv") != slurp(d2 / "tau_tail.csv"));
    CHECK(slurp(d2 / "tau_tail.csv") == slurp(d3 / "tau_tail.csv"));
}

TEST_CASE("eta emits a zero row when the interval holds a single start") {
    const fs::path dir = fresh_dir("eta0");
    const fs::path cfg = dir / "cfg.json";
    write_config(cfg,
                 "{\"p\": 0.5, \"replicates\": 60, \"master_seed\": 2,"
                 " \"epsilon\": 0.001, \"n_scale\": 100, \"t\": 1.0}");
    CHECK(run("--config " + cfg.string() + " --out " + dir.string() + " eta") == 0);
    const std::string csv = slurp(dir / "eta.csv");
    CHECK(csv.find("epsilon,width,levels,p_ge2,stderr2,p_ge3,stderr3,b1_reference,seed,"
                   "config_hash\n") == 0);
    // width 0, p_ge2 = 0
    CHECK(csv.find("0.001,0,100,0,0,0,0,") != std::string::npos);
}

TEST_CASE("bw-compare carries the closed-form reference column") {
    const fs::path dir = fresh_dir("bw");
    const fs::path cfg = dir / "cfg.json";
    write_config(cfg,
                 "{\"p\": 0.5, \"replicates\": 1200, \"master_seed\": 11,"
                 " \"epsilon\": 1.0, \"n_scale\": 2500, \"t\": 0.5}");
    const int rc = run("--config " + cfg.string() + " --out " + dir.string() + " bw-compare");
    CHECK(rc == 0);  // within 3 sigma + discretization slack
    const std::string csv = slurp(dir / "bw_compare.csv");
    std::istringstream lines(csv);
    std::string header, row;
    std::getline(lines, header);
    std::getline(lines, row);
    // reference column is the 7th field
    std::istringstream fields(row);
    std::string f;
    for (int i = 0; i < 7; ++i) std::getline(fields, f, ',');
    CHECK(std::abs(std::stod(f) - 0.682689) < 1e-6);
}

TEST_CASE("marginal writes its summary row") {
    const fs::path dir = fresh_dir("marginal");
    const fs::path cfg = dir / "cfg.json";
    write_config(cfg,
                 "{\"p\": 0.5, \"replicates\": 800, \"master_seed\": 4,"
                 " \"n_scale\": 1000, \"t\": 1.0}");
    CHECK(run("--config " + cfg.string() + " --out " + dir.string() + " marginal") == 0);
    const std::string csv = slurp(dir / "marginal.csv");
    CHECK(csv.find("ks_distance") != std::string::npos);
    CHECK(csv.find("\n1,1000,800,") != std::string::npos);
}

TEST_CASE("coupling-verify reports no violations and exits 0") {
    const fs::path dir = fresh_dir("coupling");
    const fs::path cfg = dir / "cfg.json";
    write_config(cfg,
                 "{\"p_rational\": [1, 2],"
                 " \"coupling\": {\"horizon\": 1, \"max_increment\": 1}}");
    CHECK(run("--config " + cfg.string() + " --out " + dir.string() + " coupling-verify") ==
          0);
    const std::string rep = slurp(dir / "coupling_verify.json");
    CHECK(rep.find("\"violations\": []") != std::string::npos);
    CHECK(rep.find("\"condindep_exact\": true") != std::string::npos);
    CHECK(rep.find("\"inconclusive\": 0") != std::string::npos);
}

TEST_CASE("increment-check emits the comparison table and gates on it") {
    const fs::path dir = fresh_dir("inc");
    const fs::path cfg = dir / "cfg.json";
    write_config(cfg,
                 "{\"p\": 0.5, \"mc_replicates\": 40000, \"k_range\": 4,"
                 " \"master_seed\": 21}");
    CHECK(run("--config " + cfg.string() + " --out " + dir.string() + " increment-check") ==
          0);
    const std::string csv = slurp(dir / "increment_check.csv");
    CHECK(csv.rfind("k,closed_form,enumerated,mc,stderr\n", 0) == 0);
    // k = 0 row carries the closed form p = 0.5; k = 1 row 0.1875
    CHECK(csv.find("\n0,0.5,") != std::string::npos);
    CHECK(csv.find("\n1,0.1875,") != std::string::npos);
}

TEST_CASE("manifest records the run") {
    const fs::path dir = fresh_dir("manifest");
    CHECK(run("--out " + dir.string() + " tau-tail --synthetic c_over_sqrt_t") == 0);
    const std::string manifest = slurp(dir / "manifest.json");
    CHECK(manifest.find("\"tool\": \"grsnet\"") != std::string::npos);
    CHECK(manifest.find("config_hash") != std::string::npos);
    CHECK(manifest.find("tau_tail.csv") != std::string::npos);
}

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: test_cli <grsnet binary>\n");
        return 1;
    }
    g_cli = argv[1];
    doctest::Context ctx;
    ctx.applyCommandLine(1, argv);
    return ctx.run();
}
