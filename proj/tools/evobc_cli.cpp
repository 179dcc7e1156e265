// evobc <solve|certify|sweep|verify|model> --config FILE [--out DIR] [--seed N] [--steps N] [--method NAME] [--quiet]

#include "evobc/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Evolution equations with time-boundary conditions u(0) = Phi u(tau)"};
    std::string command;
    std::string config;
    std::string out = ".";
    std::uint64_t seed = 0;
    std::size_t steps = 0;
    std::string method;
    bool quiet = false;

    app.add_option("command", command, "solve | certify | sweep | verify | model")
        ->required()
        ->check(CLI::IsMember({"solve", "certify", "sweep", "verify", "model"}));
    auto* config_opt = app.add_option("--config", config, "Problem description file");
    app.add_option("--out", out, "Output directory")->capture_default_str();
    auto* seed_opt = app.add_option("--seed", seed, "Overrides run.seed");
    auto* steps_opt = app.add_option("--steps", steps, "Overrides time.steps")->check(CLI::PositiveNumber);
    auto* method_opt = app.add_option("--method", method, "Overrides time.method")
                           ->check(CLI::IsMember({"crank_nicolson", "implicit_euler", "rk4", "exact_autonomous"}));
    app.add_flag("--quiet", quiet, "Only print errors and failing checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return evobc::exit_parse;
    }

    evobc::CommandOptions options;
    if (*config_opt) {
        options.config = config;
    }
    options.out = out;
    if (*seed_opt) {
        options.seed = seed;
    }
    if (*steps_opt) {
        options.steps = steps;
    }
    if (*method_opt) {
        options.method = method;
    }
    options.quiet = quiet;
    return evobc::run_command(command, options, std::cout, std::cerr);
}
