#pragma once
// Shared error types, numeric constants, and small helpers used across the library.

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace laneform {

// Error taxonomy maps 1:1 onto CLI exit codes (see tools/laneform_main.cpp):
//   ConfigError -> 2, NumericError -> 3, IoError -> 4.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

namespace defaults {
// Interior clipping used by the entropy transforms and the implicit solver when
// seeding iterates: densities are pulled at least this far inside {r>0, b>0, r+b<1}.
inline constexpr double clip_eps = 1e-10;
// Explicit stepper: post-step excursions outside [0,1] up to this size are snapped;
// anything larger is a hard NumericError.
inline constexpr double box_tol = 1e-12;
// CFL safety factor applied to the stability bound.
inline constexpr double cfl_safety = 0.8;
// Fixed-point iteration (implicit solver).
inline constexpr double fp_tol = 1e-12;
inline constexpr int fp_maxiter = 200;
// Lane classification thresholds.
inline constexpr double support_tol = 1e-6;
inline constexpr double mono_tol = 1e-8;
// Relative tolerance for stationary mass matching.
inline constexpr double mass_tol = 1e-6;
}  // namespace defaults

// x*log(x) with its continuous extension at x = 0 (value 0). Used by the entropy
// functional; safe for denormals (1e-300 gives a finite, tiny result).
inline double xlogx(double x) {
    return x > 0.0 ? x * std::log(x) : 0.0;
}

// Format a double with 17 significant digits (round-trip exact for binary64).
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace laneform
