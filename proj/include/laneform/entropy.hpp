#pragma once
// Entropy (dual) variables and the gradient-flow coefficients of the symmetric
// reduced system (alpha = 0, gamma1 = gamma2 = gamma).
//
// Dual variables:
//   u = log r - (1/2) log(1-q) - (2/h) x
//   v = log b - (1/2) log(1-q) + (2/h) x      (q = r + b)
// The inverse map is closed-form: eliminating r via r = b * e^{u-v-4x/h} turns
// the pair into a quadratic in b whose positive root is
//   b = B / (A/2 + sqrt(A^2/4 + B)),  A = e^{u+v} + e^{2v-4x/h},  B = e^{2v-4x/h}
// evaluated here in a shifted form with all exponents <= 0, so it cannot
// overflow and the denominator stays >= 1.
//
// In these variables the reduced system is dq/dt = div(M grad(u,v) + extra) with
// a diagonal-plus-coupling mobility M, and after eliminating grad(q) it takes
// the symmetric form dq/dt = div(G grad(u,v) + H) with G symmetric positive
// semidefinite. G and H below are exactly the coefficients the implicit solver
// assembles, including the overall h/2 factor.

#include "laneform/grid.hpp"
#include "laneform/params.hpp"

namespace laneform {

struct Mat4 {
    double m[4][4] = {};
};
struct Vec4 {
    double v[4] = {};
};

// Cellwise forward transform. Densities are nudged inside the open box by
// clip_eps first (floors on r, b and on the vacancy); inputs already outside
// the closed box by more than clip_eps raise NumericError.
EntropyState primal_to_entropy(const State& s, const Grid& g, const ModelParams& p,
                               double clip_eps = defaults::clip_eps);

// Closed-form inverse; exact up to rounding, overflow-free for any (u,v,x).
State entropy_to_primal(const EntropyState& e, const ModelParams& p);

// Scalar versions (quadrature and tests).
void dual_from_primal(double r, double b, double x, const ModelParams& p, double& u, double& v);
void primal_from_dual(double u, double v, double x, const ModelParams& p, double& r, double& b);

// Mobility of the reduced system in the representation
//   d/dt (r,b) = (h/2) div( M grad(u,v) + N )
// with unknown ordering (du/dx, du/dy, dv/dx, dv/dy); N carries the grad(q)
// remainders (r/2 dq/dx, gamma0 r dq/dy, b/2 dq/dx, gamma0 b dq/dy).
Mat4 mobility_matrix(double r, double b, const ModelParams& p);

// Symmetric gradient-flow coefficients: flux = G grad(u,v) + H (same unknown
// ordering; G includes the h/2 prefactor, H is the drift column). G is
// symmetric PSD on the admissible box; H vanishes on the diagonal r = b.
void gradient_flow_coeffs(double r, double b, const ModelParams& p, Mat4& G, Vec4& H);

}  // namespace laneform
