#include "bcva/cli.hpp"

#include <cstdio>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "bcva/errors.hpp"
#include "bcva/harness.hpp"

extern char** environ;

namespace bcva {

namespace {

int fail(int code, const std::string& kind, const std::string& message)
{
    nlohmann::json j{{"error", kind}, {"exit_code", code}, {"message", message}};
    std::cerr << j.dump() << "\n";
    return code;
}

} // namespace

std::map<std::string, std::string> environment_map()
{
    std::map<std::string, std::string> env;
    for (char** e = environ; e && *e; ++e) {
        const std::string s(*e);
        const auto eq = s.find('=');
        if (eq != std::string::npos) env[s.substr(0, eq)] = s.substr(eq + 1);
    }
    return env;
}

int parse_and_run(int argc, const char* const* argv, const std::map<std::string, std::string>& env)
{
    CLI::App app{"Bilateral CVA under a large-portfolio exposure limit"};
    app.require_subcommand(1);
    CLI::App* run = app.add_subcommand("run", "run one experiment");
    std::string experiment, config_path, out_dir;
    std::optional<std::uint64_t> seed;
    unsigned workers = 1;
    std::vector<std::string> overrides;
    run->add_option("--experiment", experiment, "convergence | bcva-sweep | validate | measure-convergence")
        ->required();
    run->add_option("--config", config_path, "flat section.key = value file");
    run->add_option("--seed", seed, "unsigned 64-bit seed; required for MC experiments");
    run->add_option("--workers", workers, "worker threads (>= 1)")->check(CLI::PositiveNumber);
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--set", overrides, "section.key=value override (repeatable)")->take_all();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail(exit_code::config, "usage", e.what());
    }

    try {
        ExperimentSpec spec;
        spec.kind = parse_experiment_kind(experiment);
        if (!config_path.empty()) spec.config.load_file(config_path);
        spec.config.apply_env(env);
        for (const auto& o : overrides) spec.config.apply_override(o);
        spec.seed = seed;
        spec.workers = workers;
        spec.output_dir = out_dir.empty() ? "results" : out_dir;
        spec.validate();

        const ExperimentOutput out = run_experiment(spec);
        write_outputs(spec, out);
        if (!out.report.empty())
            std::cout << "validation: " << out.summary["checks"].size() << " checks, " << out.summary["failed"].size()
                      << " failed; report in " << spec.output_dir << "/validation_report.txt\n";
        if (!out.passed) throw ValidationFailure("validation failed: " + out.summary["failed"].dump());
        return exit_code::ok;
    } catch (const ValidationFailure& e) {
        return fail(exit_code::validation, "validation", e.what());
    } catch (const AccuracyError& e) {
        return fail(exit_code::accuracy, "accuracy", e.what());
    } catch (const PoleError& e) {
        return fail(exit_code::accuracy, "accuracy", e.what());
    } catch (const std::invalid_argument& e) {
        return fail(exit_code::config, "config", e.what());
    } catch (const std::exception& e) {
        return fail(exit_code::other, "internal", e.what());
    }
}

} // namespace bcva
