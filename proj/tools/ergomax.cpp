// ergomax command-line runner: one experiment per invocation.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ergomax/cli/run.hpp"

int main(int argc, char** argv)
{
    using namespace ergomax::cli;

    CLI::App app{"Joint ergodicity toolkit for finite measure-preserving systems"};
    app.set_version_flag("--version", "ergomax 1.0.0");

    std::string command;
    std::optional<std::string> config;
    Overrides ov;
    app.add_option("command", command, "Subcommand")->required()->check(CLI::IsMember(subcommands()));
    app.add_option("--config", config, "Experiment config (YAML)");
    app.add_option("--out", ov.out, "Report path (default: stdout)");
    app.add_option("--format", ov.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
    app.add_option("--tolerance", ov.tolerance, "Numeric tolerance")->check(CLI::NonNegativeNumber);
    app.add_option("--policy", ov.policy, "Reduction policy: default, paper-ex62, paper-ex78, random");
    app.add_option("--N", ov.N, "Averaging length")->check(CLI::PositiveNumber);
    app.add_option("--H", ov.H, "Seminorm truncation (0 = one period)")->check(CLI::NonNegativeNumber);
    app.add_option("--s", ov.s, "Seminorm degree")->check(CLI::NonNegativeNumber);
    app.add_option("--seed", ov.seed, "Seed for the random policy");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    return run(command, config, ov, std::cout, std::cerr);
}
