#include <CLI11.hpp>
#include <iostream>

#include "plapmp/cli.hpp"

using namespace plapmp::cli;

int main(int argc, char** argv) {
    CLI::App app{"plapmp: mountain-pass and frozen-gradient solver for p-Laplacian ground states"};
    app.require_subcommand(1);

    std::string config_path;
    std::string output;
    long long seed = -1;
    bool verbose = false;
    std::string sweep;

    auto common = [&](CLI::App* sub) {
        sub->add_option("-c,--config", config_path, "key = value config file");
        sub->add_option("-o,--output", output, "output directory (overrides output_dir)");
        sub->add_option("-s,--seed", seed, "sampling seed (overrides seed)");
        sub->add_flag("-v,--verbose", verbose, "progress lines on stderr");
    };
    CLI::App* check = app.add_subcommand("check", "audit hypotheses and contraction constants");
    CLI::App* solve = app.add_subcommand("solve", "run the frozen-gradient iteration");
    CLI::App* study = app.add_subcommand("study", "sweep one parameter, one solve per value");
    common(check);
    common(solve);
    common(study);
    study->add_option("--sweep", sweep, "parameter=v1,v2,... with parameter in {epsilon, p, radius, h}")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_code::usage;
    }

    try {
        RunConfig cfg = config_path.empty() ? RunConfig() : RunConfig::load(config_path);
        if (!output.empty()) cfg.set("output_dir", output);
        if (seed >= 0) cfg.set("seed", std::to_string(seed));
        CommandOptions opts{verbose, &std::cerr};
        if (check->parsed()) return cmd_check(cfg, opts);
        if (solve->parsed()) return cmd_solve(cfg, opts);
        const auto [param, values] = parse_sweep(sweep);
        return cmd_study(cfg, param, values, opts);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code::usage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
