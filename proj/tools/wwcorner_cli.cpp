#include "wwcorner/wwcorner.h"

#include "CLI11.hpp"

#include <cstdint>
#include <iostream>
#include <string>

int main(int argc, char** argv) {
    CLI::App app{"Contact-line water waves in a corner tank"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(wwc_version()));

    std::string output_dir;
    std::uint64_t seed = 0;
    bool serial = false;
    bool override_gate = false;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--output-dir", output_dir, "Directory for CSV, JSON and summary output");
        sub->add_flag("--serial", serial, "Single-threaded execution (the default schedule is already serial)");
        sub->add_flag("--override-angle-gate", override_gate, "Accept reference contact angles outside the gate");
    };

    std::string config_path, snapshot_path;
    CLI::App* run = app.add_subcommand("run", "Advance the configured initial state and write monitor.csv");
    run->add_option("config", config_path, "Config file")->required();
    CLI::Option* seed_run = run->add_option("--seed", seed, "Override [run] seed");
    add_common(run);

    CLI::App* conv = app.add_subcommand("convergence", "Refinement studies and rates table");
    conv->add_option("config", config_path, "Config file")->required();
    CLI::Option* seed_conv = conv->add_option("--seed", seed, "Override [run] seed");
    add_common(conv);

    CLI::App* diag = app.add_subcommand("diagnose", "Recompute the report of a snapshot");
    diag->add_option("snapshot", snapshot_path, "Snapshot JSON")->required();
    add_common(diag);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    wwc_options options{};
    options.output_dir = output_dir.empty() ? nullptr : output_dir.c_str();
    options.has_seed = (seed_run->count() + seed_conv->count()) > 0;
    options.seed = seed;
    options.serial = serial;
    options.override_angle_gate = override_gate;

    int status = 0;
    if (run->parsed()) status = wwc_cmd_run(config_path.c_str(), &options);
    else if (conv->parsed()) status = wwc_cmd_convergence(config_path.c_str(), &options);
    else status = wwc_cmd_diagnose(snapshot_path.c_str(), &options);
    std::cout.flush();
    return status;
}
