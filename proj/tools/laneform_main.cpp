// laneform: two-level simulator for bidirectional flow in a corridor.
//
// Subcommands:
//   pde         macroscopic run (explicit or implicit scheme)
//   lattice     site-occupancy evolution under the synchronous update rule
//   sample      stochastic particle trajectories, trajectory-averaged
//   stationary  transversal profile matching and phase-plane sweeps
//   compare     micro/macro distance across lattice spacings
//   scenario    preset runs 1, 2, 3
//   sweep       rerun pde across values of one numeric config key
//
// Exit codes: 0 ok, 2 bad config/usage, 3 numeric failure, 4 I/O failure.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "laneform/common.hpp"
#include "laneform/config.hpp"
#include "laneform/run.hpp"

namespace {

std::string join_args(int argc, char** argv) {
    std::string s;
    for (int i = 0; i < argc; ++i) {
        if (i) s += ' ';
        s += argv[i];
    }
    return s;
}

laneform::Config resolve_config(const std::string& config_path, int scenario_id,
                                long long seed_flag) {
    laneform::Config c = scenario_id > 0 ? laneform::scenario_config(scenario_id)
                                         : laneform::Config{};
    if (!config_path.empty()) {
        if (scenario_id > 0)
            throw laneform::ConfigError("--config cannot be combined with a scenario preset");
        c = laneform::load_config(config_path);
    }
    if (seed_flag >= 0) c.seed = static_cast<std::uint64_t>(seed_flag);
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"laneform: two-level simulator for bidirectional corridor flow"};
    app.require_subcommand(1);

    std::string config_path;
    std::string outdir = "out";
    long long seed_flag = -1;
    int workers = 1;

    auto add_common = [&](CLI::App* sub, bool with_config = true) {
        if (with_config)
            sub->add_option("--config", config_path, "JSON config file");
        sub->add_option("--out", outdir, "output directory");
        sub->add_option("--seed", seed_flag, "override the config seed");
        sub->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
    };

    CLI::App* cmd_pde = app.add_subcommand("pde", "macroscopic run");
    add_common(cmd_pde);
    CLI::App* cmd_lat = app.add_subcommand("lattice", "site-occupancy evolution");
    add_common(cmd_lat);
    CLI::App* cmd_smp = app.add_subcommand("sample", "stochastic trajectories");
    add_common(cmd_smp);
    CLI::App* cmd_sta = app.add_subcommand("stationary", "transversal profiles");
    add_common(cmd_sta);
    CLI::App* cmd_cmp = app.add_subcommand("compare", "micro/macro comparison");
    add_common(cmd_cmp);

    int scenario_id = 0;
    CLI::App* cmd_scn = app.add_subcommand("scenario", "preset run (1, 2 or 3)");
    cmd_scn->add_option("id", scenario_id, "preset id")->required()->check(CLI::Range(1, 3));
    add_common(cmd_scn, /*with_config=*/false);

    std::string sweep_param;
    std::vector<double> sweep_values;
    CLI::App* cmd_swp = app.add_subcommand("sweep", "pde sweep over one config key");
    cmd_swp->add_option("--param", sweep_param, "dotted config key, e.g. model.gamma0")
        ->required();
    cmd_swp->add_option("--values", sweep_values, "values to sweep")->required()->expected(-1);
    add_common(cmd_swp);

    CLI11_PARSE(app, argc, argv);

    try {
        laneform::RunContext ctx;
        ctx.outdir = outdir;
        ctx.command = join_args(argc, argv);
        ctx.workers = workers;

        nlohmann::json summary;
        if (cmd_pde->parsed()) {
            summary = laneform::run_pde(resolve_config(config_path, 0, seed_flag), ctx);
        } else if (cmd_lat->parsed()) {
            summary = laneform::run_lattice(resolve_config(config_path, 0, seed_flag), ctx);
        } else if (cmd_smp->parsed()) {
            summary = laneform::run_sample(resolve_config(config_path, 0, seed_flag), ctx);
        } else if (cmd_sta->parsed()) {
            summary = laneform::run_stationary(resolve_config(config_path, 0, seed_flag), ctx);
        } else if (cmd_cmp->parsed()) {
            summary = laneform::run_compare(resolve_config(config_path, 0, seed_flag), ctx);
        } else if (cmd_scn->parsed()) {
            summary = laneform::run_pde(resolve_config("", scenario_id, seed_flag), ctx);
        } else if (cmd_swp->parsed()) {
            summary = laneform::run_sweep(resolve_config(config_path, 0, seed_flag), ctx,
                                          sweep_param, sweep_values);
        }
        std::printf("%s\n", summary.dump(2).c_str());
        return 0;
    } catch (const laneform::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const laneform::IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return 4;
    } catch (const laneform::NumericError& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
