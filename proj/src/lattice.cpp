#include "laneform/lattice.hpp"

#include <algorithm>
#include <sstream>

#include "laneform/common.hpp"
#include "laneform/kernels.hpp"

namespace laneform {

namespace {

inline int wrap(int i, int n) { return (i % n + n) % n; }

// Fill a pad-w periodic copy of row[0..n-1]; dst has n + 2w slots and dst[w+i]
// holds row[i].
inline void fill_padded(const double* row, int n, int w, double* dst) {
    for (int k = 0; k < w; ++k) dst[k] = row[wrap(k - w, n)];
    std::copy(row, row + n, dst + w);
    for (int k = 0; k < w; ++k) dst[w + n + k] = row[wrap(n + k, n)];
}

}  // namespace

JumpRates red_rates(const State& s, int i, int j, const ModelParams& p) {
    const int nx = s.r.nx, ny = s.r.ny;
    auto q = [&](int ii, int jj) { return s.r.at(wrap(ii, nx), jj) + s.b.at(wrap(ii, nx), jj); };
    JumpRates out;
    out.fwd = (1.0 - q(i + 1, j)) * (1.0 + p.alpha * s.r.at(wrap(i + 2, nx), j));
    const double bahead = s.b.at(wrap(i + 1, nx), j);
    if (j > 0) out.down = (1.0 - q(i, j - 1)) * (p.gamma0 + p.gamma1 * bahead);
    if (j < ny - 1) out.up = (1.0 - q(i, j + 1)) * (p.gamma0 + p.gamma2 * bahead);
    return out;
}

JumpRates blue_rates(const State& s, int i, int j, const ModelParams& p) {
    const int nx = s.r.nx, ny = s.r.ny;
    auto q = [&](int ii, int jj) { return s.r.at(wrap(ii, nx), jj) + s.b.at(wrap(ii, nx), jj); };
    JumpRates out;
    out.fwd = (1.0 - q(i - 1, j)) * (1.0 + p.alpha * s.b.at(wrap(i - 2, nx), j));
    const double rahead = s.r.at(wrap(i - 1, nx), j);
    if (j < ny - 1) out.up = (1.0 - q(i, j + 1)) * (p.gamma0 + p.gamma1 * rahead);
    if (j > 0) out.down = (1.0 - q(i, j - 1)) * (p.gamma0 + p.gamma2 * rahead);
    return out;
}

MasterEvolver::MasterEvolver(int nx, int ny, ModelParams params)
    : nx_(nx), ny_(ny), params_(params), rn_(nx, ny), bn_(nx, ny) {
    params_.validate();
    if (nx < 1 || ny < 1) throw ConfigError("lattice needs nx, ny >= 1");
    lam_ = params_.rate_scale();
    const std::size_t stride = static_cast<std::size_t>(nx_) + 4;
    pr_.assign(stride * ny_, 0.0);
    pb_.assign(stride * ny_, 0.0);
    pq_.assign(stride * ny_, 0.0);
    zero_.assign(stride, 0.0);
}

void MasterEvolver::step(State& s) {
    if (s.r.nx != nx_ || s.r.ny != ny_)
        throw ConfigError("state shape does not match the evolver lattice");
    const KernelTable& K = kernels();
    const std::size_t stride = static_cast<std::size_t>(nx_) + 4;

    for (int j = 0; j < ny_; ++j) {
        const double* rr = s.r.row(j);
        const double* bb = s.b.row(j);
        double* prj = pr_.data() + stride * j;
        double* pbj = pb_.data() + stride * j;
        double* pqj = pq_.data() + stride * j;
        fill_padded(rr, nx_, 2, prj);
        fill_padded(bb, nx_, 2, pbj);
        for (std::size_t k = 0; k < stride; ++k) pqj[k] = prj[k] + pbj[k];
    }

    for (int j = 0; j < ny_; ++j) {
        MasterRowArgs a;
        a.n = nx_;
        a.lam = lam_;
        a.alpha = params_.alpha;
        a.g0 = params_.gamma0;
        a.g1 = params_.gamma1;
        a.g2 = params_.gamma2;
        a.mdn = (j > 0) ? 1.0 : 0.0;
        a.mup = (j < ny_ - 1) ? 1.0 : 0.0;
        auto center = [&](std::vector<double>& buf, int row) {
            return buf.data() + stride * row + 2;
        };
        const double* zc = zero_.data() + 2;
        a.r0 = center(pr_, j);
        a.b0 = center(pb_, j);
        a.q0 = center(pq_, j);
        a.rm = (j > 0) ? center(pr_, j - 1) : zc;
        a.bm = (j > 0) ? center(pb_, j - 1) : zc;
        a.qm = (j > 0) ? center(pq_, j - 1) : zc;
        a.rp = (j < ny_ - 1) ? center(pr_, j + 1) : zc;
        a.bp = (j < ny_ - 1) ? center(pb_, j + 1) : zc;
        a.qp = (j < ny_ - 1) ? center(pq_, j + 1) : zc;
        K.master_row(a, rn_.row(j), bn_.row(j));
    }

    // Per-species box: the update is a convex combination, so anything beyond
    // rounding noise indicates a real defect.
    double worst = 0.0;
    for (double& x : rn_.a) {
        worst = std::max({worst, -x, x - 1.0});
        x = std::clamp(x, 0.0, 1.0);
    }
    for (double& x : bn_.a) {
        worst = std::max({worst, -x, x - 1.0});
        x = std::clamp(x, 0.0, 1.0);
    }
    if (worst > defaults::box_tol) {
        std::ostringstream oss;
        oss << "synchronous update left the per-species box by " << fmt17(worst);
        throw NumericError(oss.str());
    }

    std::swap(s.r.a, rn_.a);
    std::swap(s.b.a, bn_.a);
    s.t += step_duration(params_);
}

void MasterEvolver::evolve(State& s, int steps) {
    for (int k = 0; k < steps; ++k) step(s);
}

}  // namespace laneform
