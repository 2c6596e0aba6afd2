#pragma once
// Implicit (backward Euler) time stepping of the symmetric reduced system in
// entropy variables, with an H1 regularization that scales with the step:
//   (1/tau)(s^k - s^{k-1}) = div( G grad(u,v) + H ) + tau*w*(Lap - 1)(u,v)
// where (u,v) are evaluated at the new state. The x-potentials make u,v
// non-periodic, so the solver works in the gauged unknowns
//   uh = u + (2/h)x,   vh = v - (2/h)x        (periodic in x)
// and folds the gauge into the drift column: Hh1 = H1 - (2/h)(G11 - G13),
// Hh3 = H3 - (2/h)(G31 - G33). The regularizer acts on (uh, vh).
//
// Each step solves the nonlinear system by a damped quasi-Newton iteration:
// the Jacobian keeps the exact (1/tau) ds/d(u,v) block (the inverse entropy
// Hessian, symmetric positive definite) plus the frozen-coefficient diffusion
// and regularization operators, so every linear system is SPD and goes through
// a sparse LDLT factorization.
//
// Summing the scheme over cells gives the exact per-species mass drift
//   M_r^k - M_r^{k-1} = -tau^2 * w * sum(uh) * dA
// (likewise for b with vh); the regularization tests pin this identity.

#include <utility>

#include "laneform/entropy.hpp"
#include "laneform/grid.hpp"
#include "laneform/params.hpp"

namespace laneform {

struct ImplicitOptions {
    double fp_tol = defaults::fp_tol;    // stop when the primal change is below this
    int fp_maxiter = defaults::fp_maxiter;
    double clip_eps = defaults::clip_eps;
    double reg_weight = 1.0;             // w above; 0 disables the regularization
};

class ImplicitStepper {
  public:
    // Requires gamma1 == gamma2 and alpha == 0 (the variant with gradient-flow
    // structure); throws ConfigError otherwise.
    ImplicitStepper(Grid grid, ModelParams params, ImplicitOptions opt = {});

    // One backward-Euler step of size tau; returns the Newton iterations used.
    // Throws NumericError if the iteration fails to converge.
    int step(State& s, double tau);

    // Spatial operator of this scheme at state s: div(G grad + H) per species,
    // plus reg_coeff*(Lap-1)(uh,vh) when reg_coeff != 0. Forward-Euler twins
    // for order studies integrate exactly this.
    std::pair<Field2D, Field2D> apply_operator(const State& s, double reg_coeff = 0.0) const;

    // Gauged entropy variables of the last accepted step.
    const Field2D& last_uh() const { return uh_; }
    const Field2D& last_vh() const { return vh_; }

    const Grid& grid() const { return grid_; }

  private:
    Grid grid_;
    ModelParams params_;
    ImplicitOptions opt_;
    Field2D uh_, vh_;
};

}  // namespace laneform
