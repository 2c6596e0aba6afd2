#pragma once
// Macroscopic level: finite-volume discretization of the cross-diffusion limit
// on a cell-centered grid, periodic in x, zero-flux walls in y. Three flux
// variants share one machinery:
//   reduced_symmetric  alpha = 0, gamma1 = gamma2 = gamma; pure gradient-flow
//                      structure (the variant the implicit solver handles).
//   dodge_scaled       lateral drift written directly at the lattice-spacing
//                      scale: coefficient +-h with mobility (1-q)*opposite.
//   full               first-order expansion with cohesion alpha, signed
//                      lateral drift (gamma1-gamma2) and the cross x-derivative
//                      terms it induces.
// Fluxes live on faces; step_explicit is forward Euler in conservation form,
// so per-species masses are conserved to rounding.

#include <string>
#include <vector>

#include "laneform/grid.hpp"
#include "laneform/kernels.hpp"
#include "laneform/params.hpp"

namespace laneform {

enum class Variant { ReducedSymmetric, DodgeScaled, Full };

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& name);

// Face-flux arrays. x faces: index f + (nx+1)*j, f = 0..nx (f and f=nx are the
// same periodic face, duplicated for stencil convenience; face f sits between
// cells f-1 and f). y faces: index i + nx*jf, jf = 0..ny (walls jf=0 and jf=ny
// are stored and identically zero).
struct FaceFluxes {
    int nx = 0, ny = 0;
    std::vector<double> fxr, fxb, fyr, fyb;

    FaceFluxes() = default;
    FaceFluxes(int nx_, int ny_)
        : nx(nx_),
          ny(ny_),
          fxr(static_cast<std::size_t>(nx_ + 1) * ny_, 0.0),
          fxb(static_cast<std::size_t>(nx_ + 1) * ny_, 0.0),
          fyr(static_cast<std::size_t>(nx_) * (ny_ + 1), 0.0),
          fyb(static_cast<std::size_t>(nx_) * (ny_ + 1), 0.0) {}

    double xr(int f, int j) const { return fxr[static_cast<std::size_t>(j) * (nx + 1) + f]; }
    double xb(int f, int j) const { return fxb[static_cast<std::size_t>(j) * (nx + 1) + f]; }
    double yr(int i, int jf) const { return fyr[static_cast<std::size_t>(jf) * nx + i]; }
    double yb(int i, int jf) const { return fyb[static_cast<std::size_t>(jf) * nx + i]; }
};

struct StepperOptions {
    double cfl_safety = defaults::cfl_safety;
    double box_tol = defaults::box_tol;
};

class ExplicitStepper {
  public:
    ExplicitStepper(Grid grid, ModelParams params, Variant variant, StepperOptions opt = {});

    // Largest admissible forward-Euler step: cfl_safety * min over the drift
    // and diffusion restrictions of the variant's coefficients.
    double max_dt() const;

    // One conservative step of size dt; throws NumericError if dt exceeds
    // max_dt() or the result leaves the admissible box beyond box_tol (small
    // excursions are snapped).
    void step(State& s, double dt);

    // Advance to time t_end with uniform steps of size <= dt_cap (dt_cap <= 0
    // means max_dt()); the final partial step lands exactly on t_end.
    void advance_to(State& s, double t_end, double dt_cap = 0.0);

    void fluxes(const State& s, FaceFluxes& out);

    const Grid& grid() const { return grid_; }
    Variant variant() const { return variant_; }

  private:
    Grid grid_;
    ModelParams params_;
    Variant variant_;
    StepperOptions opt_;
    // y-kernel coefficient slots (fixed per variant)
    double cdr_ = 0.0, cdb_ = 0.0, csym_ = 0.0, cg0_ = 0.0, cxc_ = 0.0;
    bool general_x_ = false;

    // scratch: derived cell fields and padded rows
    Field2D q_, v_, rb_, mr_, mb_, ar_, ab_, pr_fld_, pb_fld_;
    std::vector<double> padr_, padb_, padq_, padv_, padar_, padab_, padpr_, padpb_;
    FaceFluxes flux_;
    Field2D rn_, bn_;

    void derive_cells(const State& s);
};

// One-shot flux evaluation (test and analysis convenience).
FaceFluxes compute_fluxes(const State& s, const Grid& g, const ModelParams& p, Variant v);

double stability_dt(const Grid& g, const ModelParams& p, Variant v,
                    double cfl_safety = defaults::cfl_safety);

}  // namespace laneform
