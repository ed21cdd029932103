#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "zeronoise/config.hpp"
#include "zeronoise/errors.hpp"
#include "zeronoise/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"zeronoise: random perturbations of attractors at desk scale"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    int threads = 1;

    const auto add = [&](const std::string& name, const std::string& desc) {
        CLI::App* sub = app.add_subcommand(name, desc);
        sub->add_option("--config", config_path, "experiment config file")->required();
        sub->add_option("--out", out_dir, "output directory (default: config [output] dir)");
        sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
        return sub;
    };

    add("orbit", "sample one random orbit");
    add("ulam", "build and save the discretized transfer operator");
    add("stationary", "stationary measure of the discretized operator");
    add("lyapunov", "Lyapunov spectrum along one random orbit");
    add("sweep", "zero-noise sweep over epsilon_list");
    add("domination", "domination and cone-invariance sampling");
    add("basin", "fraction of starts attracted to the stationary averages");
    add("degenerate-sets", "cells where the splitting has unit singular values");

    CLI11_PARSE(app, argc, argv);

    const std::string name = app.get_subcommands().front()->get_name();
    try {
        const zn::ExperimentConfig config = zn::load_config_file(config_path);
        return zn::run_subcommand(name, config, zn::RunOptions{out_dir, threads});
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
