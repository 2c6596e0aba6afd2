#pragma once

// CSV and JSON writers for simulation output, plus the run manifest.
// All floating point output goes through fmt17 so that a rerun with the
// same seed produces byte-identical files.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "laneform/grid.hpp"

namespace laneform {

// One row of the time-series table recorded at output cadence.
struct SeriesRow {
    double t = 0.0;
    double mass_r = 0.0;
    double mass_b = 0.0;
    double entropy = 0.0;
    double d0 = 0.0;      // dissipation with linear vacancy weight
    double d1 = 0.0;      // dissipation with quadratic vacancy weight
    double min_r = 0.0;
    double min_b = 0.0;
    double max_rho = 0.0;
};

// Creates the directory (and parents) if needed. Throws IoError on failure.
void ensure_dir(const std::filesystem::path& dir);

// Cell table: i,j,x,y,r,b,rho.
void write_state_csv(const std::filesystem::path& path, const Grid& g, const State& s);

// Time-series table: t,mass_r,mass_b,entropy,d0,d1,min_r,min_b,max_rho.
void write_series_csv(const std::filesystem::path& path, const std::vector<SeriesRow>& rows);

// Stationary profile table: y,r,b,rho,c.
struct ProfileRow {
    double y = 0.0;
    double r = 0.0;
    double b = 0.0;
};
void write_profile_csv(const std::filesystem::path& path, const std::vector<ProfileRow>& rows,
                       double c);

// Phase-plane table: c,r,b (one block per level, concatenated).
struct PhaseRow {
    double c = 0.0;
    double r = 0.0;
    double b = 0.0;
};
void write_phase_csv(const std::filesystem::path& path, const std::vector<PhaseRow>& rows);

// Pretty-printed JSON with a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

// FNV-1a 64-bit hash of the given bytes, used for run identifiers.
std::uint64_t fnv1a64(const std::string& bytes);

// Run manifest: identifies a run by command line, resolved config and seed,
// and lists the files written. run_id is deterministic so a rerun with the
// same inputs maps to the same identifier.
struct Manifest {
    std::string command;
    nlohmann::json config;
    std::uint64_t seed = 0;
    std::vector<std::string> files;
    double wall_seconds = 0.0;

    std::string run_id() const;
    nlohmann::json to_json() const;
};

void write_manifest(const std::filesystem::path& dir, const Manifest& m);

}  // namespace laneform
