// Stochastic hard-exclusion sampler over the shared jump rates.

#include <algorithm>
#include <string>

#include "laneform/common.hpp"
#include "laneform/lattice.hpp"

namespace laneform {

namespace {
inline int wrap(int i, int n) { return (i % n + n) % n; }
}  // namespace

ParticleSystem::ParticleSystem(int nx, int ny)
    : nx_(nx), ny_(ny), site_(static_cast<std::size_t>(nx) * ny, -1), ind_(nx, ny) {
    if (nx < 1 || ny < 1) throw ConfigError("lattice needs nx, ny >= 1");
}

ParticleSystem ParticleSystem::draw(const State& probs, std::mt19937_64& rng) {
    ParticleSystem ps(probs.r.nx, probs.r.ny);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int j = 0; j < ps.ny_; ++j) {
        for (int i = 0; i < ps.nx_; ++i) {
            const double r = probs.r.at(i, j), b = probs.b.at(i, j);
            if (r + b > 1.0 + defaults::box_tol)
                throw NumericError("cannot draw a configuration: r+b > 1 at cell (" +
                                   std::to_string(i) + "," + std::to_string(j) + ")");
            const double u = uni(rng);
            if (u < r)
                ps.place(i, j, Occupant::Red);
            else if (u < r + b)
                ps.place(i, j, Occupant::Blue);
        }
    }
    return ps;
}

void ParticleSystem::place(int i, int j, Occupant kind) {
    if (kind == Occupant::Empty) return;
    const std::size_t c = static_cast<std::size_t>(j) * nx_ + i;
    if (site_[c] != -1) throw ConfigError("site already occupied");
    site_[c] = static_cast<std::int32_t>(kind_.size());
    pi_.push_back(i);
    pj_.push_back(j);
    kind_.push_back(kind);
    (kind == Occupant::Red ? ind_.r : ind_.b).at(i, j) = 1.0;
}

Occupant ParticleSystem::at(int i, int j) const {
    const std::int32_t idx = site_[static_cast<std::size_t>(j) * nx_ + i];
    return idx < 0 ? Occupant::Empty : kind_[idx];
}

int ParticleSystem::count(Occupant kind) const {
    return static_cast<int>(std::count(kind_.begin(), kind_.end(), kind));
}

void ParticleSystem::move_particle(int idx, int ni, int nj) {
    const int oi = pi_[idx], oj = pj_[idx];
    Field2D& f = (kind_[idx] == Occupant::Red) ? ind_.r : ind_.b;
    site_[static_cast<std::size_t>(oj) * nx_ + oi] = -1;
    f.at(oi, oj) = 0.0;
    site_[static_cast<std::size_t>(nj) * nx_ + ni] = idx;
    f.at(ni, nj) = 1.0;
    pi_[idx] = ni;
    pj_[idx] = nj;
}

void ParticleSystem::sweep(const ModelParams& p, std::mt19937_64& rng) {
    const double lam = p.rate_scale();
    order_.resize(kind_.size());
    for (std::size_t k = 0; k < order_.size(); ++k) order_[k] = static_cast<std::int32_t>(k);
    std::shuffle(order_.begin(), order_.end(), rng);
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    for (const std::int32_t idx : order_) {
        const int i = pi_[idx], j = pj_[idx];
        const bool red = (kind_[idx] == Occupant::Red);
        const JumpRates rates = red ? red_rates(ind_, i, j, p) : blue_rates(ind_, i, j, p);
        const double u = uni(rng);
        const int dir = red ? 1 : -1;
        // Occupied targets carry rate 0 through the vacancy factor, so a drawn
        // move is always legal.
        if (u < lam * rates.fwd) {
            move_particle(idx, wrap(i + dir, nx_), j);
        } else if (u < lam * (rates.fwd + rates.down)) {
            move_particle(idx, i, j - 1);
        } else if (u < lam * rates.sum()) {
            move_particle(idx, i, j + 1);
        }
        // else stay; lam*sum <= 1 by the choice of the probability scale
    }
}

void ParticleSystem::sweeps(const ModelParams& p, int n, std::mt19937_64& rng) {
    for (int k = 0; k < n; ++k) sweep(p, rng);
}

}  // namespace laneform
