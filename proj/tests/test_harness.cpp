#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bcva/cli.hpp"
#include "bcva/config.hpp"
#include "bcva/curve_table.hpp"
#include "bcva/errors.hpp"
#include "bcva/harness.hpp"

using namespace bcva;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p)
{
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

int run_cli(std::vector<std::string> args, const std::map<std::string, std::string>& env = {})
{
    args.insert(args.begin(), "bcva_cli");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    return parse_and_run(static_cast<int>(argv.size()), argv.data(), env);
}

/// Small sample sizes so the whole battery runs in seconds.
KeyValueConfig quick_validation()
{
    KeyValueConfig c = KeyValueConfig::defaults();
    c.set("experiment.bve_samples", "20000");
    c.set("experiment.kernel_paths", "2000");
    c.set("experiment.limit_paths", "2000");
    c.set("experiment.cva_paths", "2000");
    c.set("experiment.oracle_dt", "0.005");
    c.set("experiment.kernel_intervals", "128");
    return c;
}

} // namespace

TEST_CASE("config parsing")
{
    KeyValueConfig c = KeyValueConfig::defaults();
    c.load_text("# comment\nlimit.sigma_star = 0.7  # trailing\n\n experiment.k_list = 10, 50,300\n", "t");
    CHECK(c.get_double("limit.sigma_star") == 0.7);
    CHECK(c.get_sizes("experiment.k_list") == std::vector<std::size_t>{10, 50, 300});
    CHECK_THROWS_AS(c.load_text("limit.nope = 1\n", "t"), ConfigError);
    CHECK_THROWS_AS(c.load_text("just words\n", "t"), ConfigError);
    CHECK_THROWS_AS(c.apply_override("limit.sigma_star"), ConfigError);
    c.set("limit.x_star", "abc");
    CHECK_THROWS_AS(c.get_double("limit.x_star"), ConfigError);
    c.set("experiment.paths", "2.5");
    CHECK_THROWS_AS(c.get_size("experiment.paths"), ConfigError);
    CHECK_THROWS_AS(c.load_file("/nonexistent/file.cfg"), ConfigError);
}

TEST_CASE("environment overrides and hashing")
{
    CHECK(env_name_to_key("BCVA_SET_LIMIT__SIGMA_STAR") == "limit.sigma_star");
    CHECK(env_name_to_key("HOME").empty());
    KeyValueConfig c = KeyValueConfig::defaults();
    const std::string h0 = c.hash();
    CHECK(h0.size() == 16);
    c.apply_env({{"BCVA_SET_JUMPS__LAMBDA_C", "1.5"}, {"PATH", "/bin"}});
    CHECK(c.get_double("jumps.lambda_c") == 1.5);
    CHECK(c.hash() != h0);
    CHECK_THROWS_AS(c.apply_env({{"BCVA_SET_JUMPS__NOPE", "1"}}), ConfigError);
    CHECK(KeyValueConfig::defaults().hash() == h0);
}

TEST_CASE("shipped configs load")
{
    for (const char* name : {"fig1-a", "fig1-b", "fig1-c", "fig1-d", "fig2", "fig3", "fig4", "fig5"}) {
        KeyValueConfig c = KeyValueConfig::defaults();
        CHECK_NOTHROW(c.load_file(std::string(BCVA_SOURCE_DIR "/configs/") + name + ".cfg"));
        CHECK_NOTHROW(model_from_config(c));
    }
}

TEST_CASE("experiment spec validation")
{
    ExperimentSpec s;
    s.kind = ExperimentKind::convergence;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s.seed = 1;
    CHECK_NOTHROW(s.validate());
    CHECK(s.dt() == doctest::Approx(3e-3));
    s.config.set("experiment.paths", "0");
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s.config.set("experiment.paths", "10");
    s.config.set("counterparty.loss_a", "1.5");
    CHECK_THROWS_AS(s.validate(), ConfigError);
    CHECK_THROWS_AS(parse_experiment_kind("bogus"), ConfigError);
    CHECK(to_string(parse_experiment_kind("measure-convergence")) == "measure-convergence");
    CHECK_FALSE(needs_seed(ExperimentKind::validate));
    CHECK(repetition_seed(5, 0) != repetition_seed(5, 1));
}

TEST_CASE("portfolio MC is independent of the worker count")
{
    const ModelSetup m = model_from_config(KeyValueConfig::defaults());
    const PortfolioRun a = run_portfolio_mc(m, 8, 30, 1.0, 0.01, 5, 3, -1.0, 1);
    const PortfolioRun b = run_portfolio_mc(m, 8, 30, 1.0, 0.01, 5, 3, -1.0, 4);
    REQUIRE(a.times.size() == 5);
    CHECK(a.times.back() == doctest::Approx(1.0));
    for (std::size_t j = 0; j < 5; ++j) {
        CHECK(a.exposure[j].mean == b.exposure[j].mean);
        CHECK(a.exposure[j].std_error == b.exposure[j].std_error);
        CHECK(a.mass[j].mean == b.mass[j].mean);
        CHECK(a.exp_test[j].mean == b.exp_test[j].mean);
    }
    CHECK(a.mass[0].mean == 1.0);
    CHECK(a.exposure[4].mean == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("curve table csv")
{
    CurveTable t{"x", "t", "v", {0.0, 1.0}, {1.5, -2.0}, {0.1, 0.2}, {}};
    CHECK(t.to_csv() == "t,v,stderr\n0.0000000000e+00,1.5000000000e+00,1.0000000000e-01\n"
                        "1.0000000000e+00,-2.0000000000e+00,2.0000000000e-01\n");
    t.std_error = {0.1};
    CHECK_THROWS(t.validate());
    t.std_error = {0.1, -1.0};
    CHECK_THROWS(t.validate());
}

TEST_CASE("validation report is deterministic and fault injection flags one check")
{
    ExperimentSpec s;
    s.kind = ExperimentKind::validate;
    s.config = quick_validation();
    const ValidationReport r1 = run_validation(s);
    const ValidationReport r2 = run_validation(s);
    CHECK(r1.to_text() == r2.to_text());
    CHECK(r1.checks.size() > 30);
    for (const char* name : {"riccati_B_rk4", "mgf_bve_partials_fd", "h1_mc_u1"}) {
        ExperimentSpec f = s;
        f.config.set("experiment.inject_fault", name);
        const ValidationReport rf = run_validation(f);
        REQUIRE(rf.checks.size() == r1.checks.size());
        std::vector<std::string> changed;
        for (std::size_t i = 0; i < rf.checks.size(); ++i)
            if (rf.checks[i].passed != r1.checks[i].passed) changed.push_back(rf.checks[i].name);
        CHECK(changed == std::vector<std::string>{name});
    }
    ExperimentSpec f = s;
    f.config.set("experiment.inject_fault", "no_such_check");
    CHECK_THROWS_AS(run_validation(f), ConfigError);
}

TEST_CASE("cli exit codes and outputs")
{
    const fs::path root = fs::temp_directory_path() / "bcva_cli_test";
    fs::remove_all(root);
    CHECK(run_cli({"run", "--experiment", "nope"}) == exit_code::config);
    CHECK(run_cli({"run", "--experiment", "convergence", "--out", (root / "x").string()}) == exit_code::config);
    CHECK(run_cli({"run", "--experiment", "bcva-sweep", "--set", "limit.bogus=1"}) == exit_code::config);
    CHECK(run_cli({"run", "--experiment", "bcva-sweep", "--config", "/nonexistent.cfg"}) == exit_code::config);
    CHECK(run_cli({"run"}) == exit_code::config);

    const std::string cfg = BCVA_SOURCE_DIR "/configs/fig2.cfg";
    REQUIRE(run_cli({"run", "--experiment", "bcva-sweep", "--config", cfg, "--out", (root / "a").string()}) == 0);
    REQUIRE(run_cli({"run", "--experiment", "bcva-sweep", "--config", cfg, "--workers", "4", "--out",
                     (root / "b").string()}) == 0);
    for (const char* f : {"cva_vs_sigma_star.csv", "dva_vs_sigma_star.csv", "manifest.json"})
        CHECK(slurp(root / "a" / f) == slurp(root / "b" / f));
    const auto manifest = nlohmann::json::parse(slurp(root / "a" / "manifest.json"));
    CHECK(manifest["experiment"] == "bcva-sweep");
    CHECK(manifest["config"]["experiment.sweep_parameter"] == "sigma_star");
    CHECK(manifest["tables"].size() == 2);
    CHECK(manifest["tables"][0]["config_hash"].get<std::string>().size() == 16);

    // env override and --set both reach the config; --set wins
    REQUIRE(run_cli({"run", "--experiment", "bcva-sweep", "--config", cfg, "--set", "jumps.lambda_c=0.3", "--out",
                     (root / "c").string()},
                    {{"BCVA_SET_JUMPS__LAMBDA_C", "0.9"}, {"BCVA_SET_LIMIT__R", "0.04"}}) == 0);
    const auto mc = nlohmann::json::parse(slurp(root / "c" / "manifest.json"));
    CHECK(mc["config"]["jumps.lambda_c"] == "0.3");
    CHECK(mc["config"]["limit.r"] == "0.04");

    const std::vector<std::string> conv{"run", "--experiment", "convergence", "--config",
                                        BCVA_SOURCE_DIR "/configs/fig1-b.cfg", "--seed", "42", "--set",
                                        "experiment.paths=20", "--set", "experiment.k_list=5,10", "--set",
                                        "experiment.curve_points=7", "--out"};
    auto with_out = [&](std::vector<std::string> a, const fs::path& p, const char* workers) {
        a.push_back(p.string());
        a.insert(a.end(), {"--workers", workers});
        return a;
    };
    REQUIRE(run_cli(with_out(conv, root / "d1", "1")) == 0);
    REQUIRE(run_cli(with_out(conv, root / "d8", "8")) == 0);
    for (const auto& e : fs::directory_iterator(root / "d1"))
        CHECK(slurp(e.path()) == slurp(root / "d8" / e.path().filename()));
    CHECK(fs::exists(root / "d1" / "exposure_mc_k10_rep0.csv"));
    CHECK(fs::exists(root / "d1" / "exposure_limit.csv"));

    std::map<std::string, std::string> quick;
    const KeyValueConfig small = quick_validation();
    for (const auto& [k, v] : small.entries())
        if (k.rfind("experiment.", 0) == 0 && v != KeyValueConfig::defaults().get_string(k)) {
            std::string name = "BCVA_SET_EXPERIMENT__";
            for (char ch : k.substr(11)) name += static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
            quick[name] = v;
        }
    quick["BCVA_SET_EXPERIMENT__INJECT_FAULT"] = "riccati_B_rk4";
    CHECK(run_cli({"run", "--experiment", "validate", "--out", (root / "v").string()}, quick) ==
          exit_code::validation);
    CHECK(slurp(root / "v" / "validation_report.txt").find("FAIL riccati_B_rk4") != std::string::npos);
    fs::remove_all(root);
}
