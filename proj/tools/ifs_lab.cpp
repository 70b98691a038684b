// ifs-lab: batch front end for random iterated function system experiments.
//
//   ifs-lab run <config>        run the configured scenario, write its report
//   ifs-lab render <config>     write the chaos-game picture (PPM) and summary
//   ifs-lab validate <config>   parse and validate only
//
// Exit codes: 0 success, 1 runtime or I/O failure, 2 parse/validation error,
// 3 NotFound-class result under --strict.

#include <chrono>
#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ifs_lab/report.hpp"
#include "ifs_lab/runner.hpp"

namespace {

enum ExitCode : int { exit_ok = 0, exit_runtime = 1, exit_invalid = 2, exit_not_found = 3 };

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> trials;
    std::optional<std::string> out;
    bool strict = false;
    bool timing = false;
};

int emit(const ifs::PreparedRun& run, ifs::ReportBundle bundle, const Options& opts,
         double seconds)
{
    if (opts.timing) {
        bundle.summary["wall_clock_seconds"] = seconds;
    }
    const std::string dir = opts.out.value_or(run.output_dir);
    for (const auto& path : ifs::write_report(bundle, dir)) {
        std::cout << path.string() << '\n';
    }
    if (bundle.not_found) {
        std::cerr << "ifs-lab: no chain connection found\n";
        return opts.strict ? exit_not_found : exit_ok;
    }
    return exit_ok;
}

int dispatch(const std::string& command, const Options& opts)
{
    std::optional<ifs::PreparedRun> run;
    try {
        run.emplace(ifs::prepare_run_file(opts.config, ifs::RunOverrides{opts.seed, opts.trials}));
    } catch (const std::exception& e) {
        std::cerr << "ifs-lab: " << e.what() << '\n';
        return exit_invalid;
    }
    if (command == "validate") {
        std::cout << "ok: " << run->kind << " on " << ifs::describe(run->system.space())
                  << " with " << run->system.size() << " map(s), seed " << run->seed << '\n';
        return exit_ok;
    }
    try {
        const auto t0 = std::chrono::steady_clock::now();
        ifs::ReportBundle bundle =
            command == "render" ? ifs::execute_render(*run) : ifs::execute_run(*run);
        const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
        return emit(*run, std::move(bundle), opts, dt.count());
    } catch (const ifs::Error& e) {
        std::cerr << "ifs-lab: " << e.what() << '\n';
        const bool invalid = e.kind() == ifs::ErrorKind::Validation ||
                             e.kind() == ifs::ErrorKind::Parse ||
                             e.kind() == ifs::ErrorKind::Unsupported;
        return invalid ? exit_invalid : exit_runtime;
    } catch (const std::exception& e) {
        std::cerr << "ifs-lab: " << e.what() << '\n';
        return exit_runtime;
    }
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Random iterated function systems: chains, hit sets and Monte Carlo checks"};
    app.set_version_flag("--version", std::string(ifs::tool_version));
    app.require_subcommand(1);

    Options opts;
    auto add_common = [&opts](CLI::App* sub) {
        sub->add_option("config", opts.config, "Scenario config file")->required();
        sub->add_option("--seed", opts.seed, "Base seed (overrides [scenario] seed)");
        sub->add_option("--trials", opts.trials, "Trial count (overrides [scenario] trials)");
        sub->add_option("--out", opts.out, "Output directory (overrides [output] dir)");
        sub->add_flag("--strict", opts.strict, "Exit with 3 when no connection is found");
        sub->add_flag("--timing", opts.timing, "Record wall-clock seconds in summary.json");
    };
    auto* run = app.add_subcommand("run", "Run the configured scenario");
    auto* render = app.add_subcommand("render", "Render the chaos-game orbit as PPM");
    auto* validate = app.add_subcommand("validate", "Parse and validate a config");
    add_common(run);
    add_common(render);
    add_common(validate);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_invalid;
    }
    const std::string command = run->parsed() ? "run" : render->parsed() ? "render" : "validate";
    return dispatch(command, opts);
}
