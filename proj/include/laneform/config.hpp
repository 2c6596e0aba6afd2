#pragma once
// JSON run configuration: strict parsing (unknown keys are errors, named by
// their dotted path), scenario presets, and initial-state construction.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "laneform/grid.hpp"
#include "laneform/params.hpp"
#include "laneform/pde.hpp"

namespace laneform {

struct InitialConfig {
    std::string kind = "sinusoidal";  // "constant" or "sinusoidal"
    double c_r = 0.4, c_b = 0.4;
    double amplitude = 0.02;
};

struct TimeConfig {
    double t_end = 1.0;
    double output_every = 0.0;  // 0: only initial and final samples
};

struct SchemeConfig {
    std::string type = "explicit";  // "explicit" or "implicit"
    Variant variant = Variant::ReducedSymmetric;
    double dt = 0.0;   // explicit step; 0 = stability bound
    double tau = 0.0;  // implicit step; 0 = output cadence (or t_end)
    double cfl_safety = defaults::cfl_safety;
    double fp_tol = defaults::fp_tol;
    int fp_maxiter = defaults::fp_maxiter;
    double clip_eps = defaults::clip_eps;
    double reg_weight = 1.0;
};

struct SampleConfig {
    int trajectories = 1;
    int sweeps = 0;  // 0: derive from t_end via the per-step duration
};

struct StationaryConfig {
    double dy = 1e-4;
    double mass_r = 0.0, mass_b = 0.0;  // 0: derive from the initial condition
    std::vector<double> curve_constants;
    std::vector<double> gamma0_values;
};

struct CompareConfig {
    std::vector<double> h_levels{0.02, 0.01, 0.005};
    double t_end = 1.0;
};

struct Config {
    ModelParams model;
    Grid grid = Grid::corridor(100, 10);
    InitialConfig initial;
    TimeConfig time;
    SchemeConfig scheme;
    std::uint64_t seed = 1;
    SampleConfig sample;
    StationaryConfig stationary;
    CompareConfig compare;
};

Config parse_config(const nlohmann::json& j);
Config load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const Config& c);

// Presets 1..3: (1) symmetric relaxation, (2) lane formation under asymmetric
// dodging, (3) near-jam congestion.
Config scenario_config(int id);

// Initial state per config; validates admissibility and names offenders.
State build_initial(const Config& c);

// Override a scalar config entry addressed by dotted path (sweep support),
// e.g. "model.gamma0" or "initial.c_r".
void set_by_path(nlohmann::json& j, const std::string& dotted, double value);

}  // namespace laneform
