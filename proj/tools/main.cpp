#include "runner/runner.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace dr = deadcore::runner;

int main(int argc, char** argv) {
    CLI::App app{"Numerical lab for two-phase nonlocal dead-core equations"};
    app.require_subcommand(1);

    std::vector<std::string> configs;
    std::string out;
    int jobs = 1;
    std::uint64_t seed = 0;
    bool dry_run = false;

    const std::pair<dr::Mode, const char*> commands[] = {
        {dr::Mode::Solve, "Nonlocal solve on the configured exterior data"},
        {dr::Mode::SolveLocal, "Local solve u'' = f(u) with two boundary values"},
        {dr::Mode::Exponent, "Growth exponent fits and branching detection"},
        {dr::Mode::Blowup, "Blow-up rescalings of a nonlocal solution"},
        {dr::Mode::Compare, "Comparison principle over random ordered data"},
        {dr::Mode::Liouville, "Liouville growth classification of a solution"},
        {dr::Mode::SLimit, "Distance to the local solution as s approaches 1"},
        {dr::Mode::Validate, "Check (s, gamma) and print the exponent table"},
    };
    std::vector<std::pair<CLI::App*, dr::Mode>> subs;
    for (const auto& [mode, help] : commands) {
        CLI::App* sub = app.add_subcommand(std::string(dr::to_string(mode)), help);
        sub->add_option("--config", configs, "Config file (repeatable)")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out, "Output directory");
        sub->add_option("--seed", seed, "Seed for the random generator");
        sub->add_option("--jobs", jobs, "Configs run concurrently")->check(CLI::PositiveNumber);
        sub->add_flag("--dry-run", dry_run, "Validate and print the plan only");
        subs.emplace_back(sub, mode);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : dr::ExitValidation;
    }

    for (const auto& [sub, mode] : subs) {
        if (!sub->parsed()) {
            continue;
        }
        dr::RunOptions options;
        options.dry_run = dry_run;
        if (sub->count("--out") > 0) {
            options.out = out;
        }
        if (sub->count("--seed") > 0) {
            options.seed = seed;
        }
        std::vector<std::filesystem::path> paths(configs.begin(), configs.end());
        return dr::run_all(paths, mode, options, jobs, std::cout);
    }
    return dr::ExitValidation;
}
