#pragma once
// Microscopic level: two species hopping on an nx-by-ny exclusion lattice,
// periodic in x, walls in y. Red walks +x, blue walks -x. Rates (before the
// global probability scale) for a red particle at (i,j):
//   forward +x : (1 - q[i+1,j]) * (1 + alpha * r[i+2,j])
//   down    -y : (1 - q[i,j-1]) * (gamma0 + gamma1 * b[i+1,j])
//   up      +y : (1 - q[i,j+1]) * (gamma0 + gamma2 * b[i+1,j])
// with q = r + b; blue mirrors through x (cohesion from b[i-2,j], lateral
// channels keyed to r[i-1,j], gamma1 on the up channel). Two views share these
// rates: the synchronous mean-field update of occupation probabilities
// (MasterEvolver) and the stochastic hard-exclusion sampler (ParticleSystem).

#include <cstdint>
#include <random>
#include <vector>

#include "laneform/grid.hpp"
#include "laneform/params.hpp"

namespace laneform {

struct JumpRates {
    double fwd = 0.0, down = 0.0, up = 0.0;
    double sum() const { return fwd + down + up; }
};

// Unscaled rates read off a probability (or indicator) state; x wraps, moves
// across a y wall get rate 0.
JumpRates red_rates(const State& s, int i, int j, const ModelParams& p);
JumpRates blue_rates(const State& s, int i, int j, const ModelParams& p);

// Macroscopic time advanced by one synchronous step under diffusive scaling.
inline double step_duration(const ModelParams& p) { return p.rate_scale() * p.h; }

// Synchronous master-equation update of site occupation probabilities. The
// update is a convex combination within each species, so r and b stay in [0,1]
// cellwise and the per-species masses are conserved exactly; r+b <= 1 is not
// guaranteed by the scheme and is deliberately not enforced here.
class MasterEvolver {
  public:
    MasterEvolver(int nx, int ny, ModelParams params);

    void step(State& s);
    void evolve(State& s, int steps);

    const ModelParams& params() const { return params_; }

  private:
    int nx_, ny_;
    ModelParams params_;
    double lam_;
    // pad-2 row copies of r, b, q for the whole grid plus one zero ghost row
    std::vector<double> pr_, pb_, pq_, zero_;
    Field2D rn_, bn_;
};

enum class Occupant : std::uint8_t { Empty = 0, Red = 1, Blue = 2 };

// Hard-exclusion particle configuration driven by the same scaled rates as the
// master update. One sweep gives every particle exactly one move attempt, in
// freshly shuffled order, so for a lone particle the sweep law equals the
// synchronous update law exactly.
class ParticleSystem {
  public:
    ParticleSystem(int nx, int ny);

    // Independent per-site draw: Red w.p. r, Blue w.p. b, else empty.
    static ParticleSystem draw(const State& probs, std::mt19937_64& rng);

    void place(int i, int j, Occupant kind);  // throws on occupied site
    Occupant at(int i, int j) const;
    int particles() const { return static_cast<int>(kind_.size()); }
    int count(Occupant kind) const;

    // 0/1 occupation-indicator fields (shared rate formulas read these).
    const State& indicator() const { return ind_; }

    void sweep(const ModelParams& p, std::mt19937_64& rng);
    void sweeps(const ModelParams& p, int n, std::mt19937_64& rng);

    int nx() const { return nx_; }
    int ny() const { return ny_; }

  private:
    int nx_, ny_;
    std::vector<std::int32_t> site_;  // -1 empty, else particle index
    std::vector<std::int32_t> pi_, pj_;
    std::vector<Occupant> kind_;
    State ind_;
    std::vector<std::int32_t> order_;

    void move_particle(int idx, int ni, int nj);
};

}  // namespace laneform
