#include <CLI11.hpp>

#include <iostream>
#include <optional>

#include "lap/commands.hpp"

namespace {

lap::RunConfig load_or_default(const std::string& path) {
    if (path.empty()) {
        lap::RunConfig c;
        c.validate();
        return c;
    }
    return lap::load_config(path);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Least-action solver for the one-dimensional Rayleigh-Taylor mixing problem"};
    app.require_subcommand(1);

    std::string config, out;
    std::optional<std::uint64_t> seed;
    int threads = 1;
    std::vector<double> Ts;
    std::string dir;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config, "Configuration file")->check(CLI::ExistingFile);
        sub->add_option("--out", out, "Output directory (overrides [output] dir)");
        sub->add_option("--seed", seed, "Seed for sampling-based checks");
    };
    auto* solve = app.add_subcommand("solve", "Run the epsilon continuation and write fields, energy trace and report");
    add_common(solve);
    auto* verify = app.add_subcommand("verify", "Run the analysis and subsolution checks on a solve directory");
    verify->add_option("dir", dir, "Directory written by solve")->required();
    auto* sweep = app.add_subcommand("sweep-T", "Solve for several final times and tabulate the kinetic jump");
    add_common(sweep);
    sweep->add_option("--T", Ts, "Final times (must include 1)");
    sweep->add_option("--threads", threads, "Concurrent solves")->check(CLI::PositiveNumber);
    auto* checkpot = app.add_subcommand("check-potential", "Check the structural conditions on the potential");
    add_common(checkpot);
    auto* oracle = app.add_subcommand("oracle", "Compare Newton against coordinate descent on a tiny grid");
    add_common(oracle);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : lap::kExitInput;
    }

    if (verify->parsed()) return lap::cmd_verify(dir, std::cout);

    lap::RunConfig cfg;
    try {
        cfg = load_or_default(config);
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return lap::kExitInput;
    }
    if (seed) cfg.seed = *seed;
    if (out.empty()) out = cfg.out_dir;
    cfg.out_dir = out;

    try {
        if (solve->parsed()) return lap::cmd_solve(cfg, out, std::cout);
        if (sweep->parsed()) return lap::cmd_sweep_T(cfg, Ts.empty() ? cfg.sweep_T : Ts, threads, out, std::cout);
        if (checkpot->parsed()) return lap::cmd_check_potential(cfg, out, std::cout);
        if (oracle->parsed()) return lap::cmd_oracle(cfg, out, std::cout);
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return lap::kExitInput;
    }
    return lap::kExitInput;
}
