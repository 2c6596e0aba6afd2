#pragma once

// Run drivers behind the CLI subcommands. Each driver resolves its inputs
// from the config, writes its artifacts into the output directory, and
// returns the run summary as JSON (the same object written to summary.json)
// so tests can reuse results without re-parsing files.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "laneform/config.hpp"

namespace laneform {

struct RunContext {
    std::filesystem::path outdir;  // created if missing
    std::string command;           // recorded in the manifest
    int workers = 1;               // thread fan-out for trajectories / sweeps
};

// Macroscopic run, explicit or implicit per scheme.type. Writes
// initial_state.csv, final_state.csv, series.csv, summary.json and
// manifest.json. For implicit runs the step size is scheme.tau when
// positive, else the output cadence, else t_end/100.
nlohmann::json run_pde(const Config& c, const RunContext& ctx);

// Site-occupancy evolution under the synchronous update rule on the config
// grid; cadence-matched to the nearest update step. Same artifact set as
// run_pde.
nlohmann::json run_lattice(const Config& c, const RunContext& ctx);

// Stochastic particle trajectories: draws each trajectory from the initial
// occupancy probabilities, runs the configured number of sweeps, and writes
// the trajectory-averaged occupation as final_state.csv. Deterministic for
// a fixed seed independent of the worker count.
nlohmann::json run_sample(const Config& c, const RunContext& ctx);

// Stationary transversal analysis: matches the configured line masses
// (profile.csv), sweeps the requested phase-plane levels (phase.csv), and
// tabulates the species overlap across the configured gamma0 values.
nlohmann::json run_stationary(const Config& c, const RunContext& ctx);

// Micro/macro comparison across lattice spacings: for each spacing level the
// corridor is re-gridded with dx = dy = h, the occupancy evolution and the
// full-expansion scheme start from the same data, and their distance at the
// common final time is tabulated together with level-to-level ratios.
nlohmann::json run_compare(const Config& c, const RunContext& ctx);

// Parameter sweep: reruns run_pde with the dotted config path set to each
// value, in outdir/sub_<k>, and writes index.json with the collected
// summaries. Sub-runs execute in parallel across workers.
nlohmann::json run_sweep(const Config& base, const RunContext& ctx, const std::string& param,
                         const std::vector<double>& values);

}  // namespace laneform
