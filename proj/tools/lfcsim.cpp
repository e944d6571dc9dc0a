#include "lfcsim/commands.hpp"
#include "lfcsim/config.hpp"
#include "lfcsim/errors.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

// "a,b,c" or "start:step:stop"; empty means "use the config".
std::optional<std::vector<double>> grid_flag(const std::string& text)
{
    if (text.empty())
        return std::nullopt;
    return lfcsim::parse_grid(text);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Load-frequency control co-simulation with delayed AGC channels"};
    app.set_version_flag("--version", lfcsim::kToolVersion);
    app.require_subcommand(1);

    std::string config;
    std::string out_dir;
    bool full_rate = false;
    std::string kp, ki, delay;
    unsigned jobs = 1;

    auto* validate = app.add_subcommand("validate", "Parse and validate a scenario file");
    validate->add_option("--config", config, "Scenario file")->required();

    auto* run = app.add_subcommand("run", "Run one scenario and classify it");
    run->add_option("--config", config, "Scenario file")->required();
    run->add_option("--out", out_dir, "Output directory")->required();
    run->add_flag("--full-rate", full_rate, "Record every integration step");

    auto* sweep = app.add_subcommand("sweep", "Map the feasible (Kp, Ki, delay) space");
    sweep->add_option("--config", config, "Scenario file")->required();
    sweep->add_option("--kp", kp, "Kp grid: list a,b,c or range start:step:stop");
    sweep->add_option("--ki", ki, "Ki grid");
    sweep->add_option("--delay", delay, "Delay grid, s");
    sweep->add_option("--jobs", jobs, "Worker threads")->check(CLI::Range(1u, 1024u));
    sweep->add_option("--out", out_dir, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // CLI11 reports help/version as exit 0 and usage errors as non-zero;
        // map every usage error onto the tool's error status.
        const int code = app.exit(e);
        return code == 0 ? 0 : lfcsim::kExitError;
    }

    if (*validate)
        return lfcsim::cmd_validate(config, std::cout, std::cerr);
    if (*run)
        return lfcsim::cmd_run(config, out_dir, full_rate, std::cout, std::cerr);

    lfcsim::SweepRequest req;
    req.config = config;
    req.out_dir = out_dir;
    req.jobs = jobs;
    try {
        req.kp = grid_flag(kp);
        req.ki = grid_flag(ki);
        req.delay = grid_flag(delay);
    } catch (const lfcsim::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return lfcsim::kExitError;
    }
    return lfcsim::cmd_sweep(req, std::cout, std::cerr);
}
