#pragma once
// x-independent stationary profiles r(y), b(y) of the two-species system.
//
// Setting the lateral fluxes to zero row by row gives a 2x2 linear system for
// (r', b'):
//   [ (1-b)(g b + g0)   r (g(1-r) + g0) ] [r']   [ -(1-q) r b ]
//   [ b (g(1-b) + g0)   (1-r)(g r + g0) ] [b'] = [ +(1-q) r b ]
// with g = (gamma1+gamma2)/2, g0 = gamma0, q = r+b. Along solutions the curve
// constant
//   C = (gamma1+gamma2) r b / (1-q) + gamma0 q / (1-q)
// is conserved, and its level sets are single-valued in b:
//   b(r; C) = (C - (C+g0) r) / ((gamma1+gamma2) r + C + g0).
// The determinant is proportional to g0 (1 - 2r) at r = b, so profiles cannot
// cross the diagonal at height 1/2 and gamma0 = 0 is genuinely singular.
//
// Boundary conditions impose nothing (the fluxes already vanish), so profiles
// over a strip [y_lo, y_hi] form a two-parameter family: the level C and the
// seed position along the level curve. match_masses pins both by line masses
// (integrals of r and b in y over the strip):
//   equal masses   -> one bisection on the midpoint value m (seed r=b=m at
//                     mid-height; the profile is then swap-mirror symmetric)
//   unequal masses -> nested bisections, outer on C (total mass), inner on the
//                     seed r0 along the curve (mass difference).

#include <vector>

#include "laneform/params.hpp"

namespace laneform {

struct StatDeriv {
    double dr = 0.0, db = 0.0;
};

double curve_constant(double r, double b, const ModelParams& p);

// b on the level curve of C at abscissa r (may be negative/inadmissible when r
// is outside the achievable range; callers check).
double curve_b(double r, double c, const ModelParams& p);

// Midpoint value m with curve_constant(m, m) = C (closed form).
double curve_midpoint(double c, const ModelParams& p);

// Right-hand side (r', b'); throws NumericError when the system degenerates
// (relative determinant below ~1e-13, e.g. r = b = 1/2 or gamma0 = 0).
StatDeriv stationary_rhs(double r, double b, const ModelParams& p);

struct ProfilePoint {
    double y = 0.0, r = 0.0, b = 0.0;
};

struct Profile {
    std::vector<ProfilePoint> pts;  // ordered in integration direction
    bool truncated = false;         // stopped at the admissibility boundary
    double c0 = 0.0;                // curve constant at the seed
    double max_c_drift = 0.0;       // max |C(point) - c0| along the profile
};

// Fixed-step RK4 from (r0,b0) at y0 to y1 (either direction); dy > 0 is the
// nominal step, adjusted so the span divides evenly. Stops early (truncated)
// if a stage leaves the admissible box or the system degenerates.
Profile integrate_profile(double r0, double b0, double y0, double y1, double dy,
                          const ModelParams& p);

struct MatchedProfile {
    Profile profile;       // ascending y over [y_lo, y_hi]
    double mass_r = 0.0;   // achieved line masses (trapezoid on the samples)
    double mass_b = 0.0;
    double c = 0.0;        // matched curve constant
    double crossing_y = 0.0;  // y with r = b (NaN if the profile never crosses)
    int outer_iters = 0, inner_iters = 0;
};

// Find the stationary profile over [y_lo, y_hi] with prescribed line masses.
// Throws NumericError when the targets are outside the achievable range.
MatchedProfile match_masses(double mass_r, double mass_b, double y_lo, double y_hi,
                            double dy, const ModelParams& p);

struct PhasePoint {
    double r = 0.0, b = 0.0;
};

struct PhaseCurve {
    double c = 0.0;
    std::vector<PhasePoint> pts;  // ordered by descending r (ascending y)
    double max_c_defect = 0.0;    // max |curve_constant(pt) - c|
    bool truncated = false;
};

// Phase-plane sweep: for each positive level, integrate through the midpoint
// seed in both directions until a species drops below axis_floor. Levels <= 0
// yield empty curves. Emitted points are thinned to at most max_points.
std::vector<PhaseCurve> sweep_curves(const std::vector<double>& levels, double dy,
                                     const ModelParams& p, double axis_floor = 1e-9,
                                     std::size_t max_points = 4001);

}  // namespace laneform
