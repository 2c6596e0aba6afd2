#pragma once
// Run diagnostics: the entropy functional and its parts, discrete dissipation
// lower bounds, a bounded-growth detector for entropy time series, lane
// classification of final states, and micro/macro state distances.

#include <vector>

#include "laneform/grid.hpp"
#include "laneform/params.hpp"

namespace laneform {

// E = sum over cells of
//       r(log r - 1) + b(log b - 1) + (1/2)(1-q)(log(1-q) - 1)
//     + (2/h)(r V_r + b V_b),   V_r = -x, V_b = +x
// times the cell area (midpoint quadrature; x log x extends by 0 at 0).
struct EntropyBreakdown {
    double r_term = 0.0, b_term = 0.0, vacancy_term = 0.0, potential_term = 0.0;
    double total = 0.0;
};
EntropyBreakdown entropy_functional(const State& s, const Grid& g, const ModelParams& p);

// Discrete dissipation bounds, face-difference quadrature:
//   D = C0 * sum_faces [ w_f |d sqrt(r)|^2 + w_f |d sqrt(b)|^2
//                        + |d sqrt(1-q)|^2 + |d q|^2 ] * dA
// with d the face difference over the face distance, w_f the face-mean vacancy
// for d0 and its square for d1 (so d1 <= d0 always), and
// C0 = (h/2) min(1/2, gamma0). Wall faces are excluded; both vanish on
// constant states.
struct DissipationPair {
    double d0 = 0.0, d1 = 0.0;
};
DissipationPair dissipation(const State& s, const Grid& g, const ModelParams& p);

// Bounded-growth detector for an entropy series sampled at times t with
// dissipation d1:
//  - statistic g_k = (E_k - E_{k-1})/(t_k - t_{k-1}) + mean(D1 over the step);
//    max_statistic = max g_k, fitted_constant = max(0, max_statistic).
//  - bounded: with difference quotients q_k = (E_k - E_0)/(t_k - t_0), the
//    second-half sup must not exceed max(first-half sup, 0) by more than a
//    10% relative margin. Equilibrating (decaying) series pass; superlinear
//    growth (e.g. a time-reversed decay) fails.
struct GrowthCheck {
    double max_statistic = 0.0;
    double fitted_constant = 0.0;
    bool bounded = false;
    bool dissipation_nonneg = false;
};
GrowthCheck entropy_growth_check(const std::vector<double>& t, const std::vector<double>& E,
                                 const std::vector<double>& d1);

// Lane classification of the x-averaged profiles rbar(y), bbar(y). With
// gamma1 >= gamma2 red drifts down, blue up (mirrored otherwise):
//  - strong: the supports {rbar > support_tol} and {bbar > support_tol} are
//    non-empty, disjoint, and ordered with the down species below.
//  - weak: the down species is monotone nonincreasing and the up species
//    nondecreasing in y (violations <= mono_tol), their difference changes
//    sign exactly once, and the separation at both walls exceeds support_tol.
//  - none: anything else (flat symmetric profiles land here).
enum class LaneKind { None, Weak, Strong };
struct LaneReport {
    LaneKind kind = LaneKind::None;
    bool red_down = true;       // orientation used (gamma1 >= gamma2)
    double crossing_y = 0.0;    // NaN unless a unique crossing exists
    int sign_changes = 0;       // of bbar - rbar (oriented)
    double mono_defect_down = 0.0, mono_defect_up = 0.0;
};
LaneReport classify_lanes(const State& s, const Grid& g, const ModelParams& p,
                          double support_tol = defaults::support_tol,
                          double mono_tol = defaults::mono_tol);

const char* lane_kind_name(LaneKind k);

// Cellwise distances between two states on the same grid shape.
struct StateDistance {
    double l2_r = 0.0, l2_b = 0.0, sup_r = 0.0, sup_b = 0.0;
};
StateDistance state_distance(const State& a, const State& b, const Grid& g);

}  // namespace laneform
