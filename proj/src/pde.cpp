#include "laneform/pde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "laneform/common.hpp"

namespace laneform {

namespace {

inline int wrap(int i, int n) { return (i % n + n) % n; }

inline void fill_pad1(const double* row, int n, double* dst) {
    dst[0] = row[n - 1];
    std::copy(row, row + n, dst + 1);
    dst[n + 1] = row[0];
}

}  // namespace

std::string variant_name(Variant v) {
    switch (v) {
        case Variant::ReducedSymmetric: return "reduced_symmetric";
        case Variant::DodgeScaled: return "dodge_scaled";
        case Variant::Full: return "full";
    }
    return "?";
}

Variant variant_from_name(const std::string& name) {
    if (name == "reduced_symmetric") return Variant::ReducedSymmetric;
    if (name == "dodge_scaled") return Variant::DodgeScaled;
    if (name == "full") return Variant::Full;
    throw ConfigError("unknown scheme variant '" + name +
                      "' (expected reduced_symmetric, dodge_scaled or full)");
}

double stability_dt(const Grid& g, const ModelParams& p, Variant v, double cfl_safety) {
    const double dx = g.dx(), dy = g.dy();
    const double inf = std::numeric_limits<double>::infinity();
    // Worst-case wave speeds and diffusion coefficients over the admissible box.
    double vx = 0.0, vy = 0.0;
    switch (v) {
        case Variant::ReducedSymmetric: vx = 1.0; vy = 0.0; break;
        case Variant::DodgeScaled: vx = 1.0 + p.alpha; vy = p.h; break;
        case Variant::Full: vx = 1.0 + p.alpha; vy = std::abs(p.gamma1 - p.gamma2); break;
    }
    const double Dx = 0.5 * p.h * (3.0 + 2.0 * p.alpha);
    const double Dy = p.h * (2.0 * p.gamma0 + 0.5 * (p.gamma1 + p.gamma2));
    double dt = inf;
    if (vx > 0.0) dt = std::min(dt, dx / vx);
    if (vy > 0.0) dt = std::min(dt, dy / vy);
    if (Dx > 0.0) dt = std::min(dt, dx * dx / (2.0 * Dx));
    if (Dy > 0.0) dt = std::min(dt, dy * dy / (2.0 * Dy));
    if (!std::isfinite(dt)) throw ConfigError("degenerate parameters: no dynamics at all");
    return cfl_safety * dt;
}

ExplicitStepper::ExplicitStepper(Grid grid, ModelParams params, Variant variant,
                                 StepperOptions opt)
    : grid_(grid), params_(params), variant_(variant), opt_(opt) {
    grid_.validate();
    params_.validate();
    if (!(opt_.cfl_safety > 0.0 && opt_.cfl_safety <= 1.0))
        throw ConfigError("cfl_safety must lie in (0,1]");
    const double g = params_.gamma1;  // shared lateral strength in the symmetric variant
    switch (variant_) {
        case Variant::ReducedSymmetric:
            if (params_.gamma1 != params_.gamma2 || params_.alpha != 0.0)
                throw ConfigError("reduced_symmetric requires gamma1 == gamma2 and alpha == 0");
            cdr_ = cdb_ = 0.0;
            csym_ = params_.h * g;
            cg0_ = params_.h * params_.gamma0;
            cxc_ = 0.0;
            general_x_ = false;
            break;
        case Variant::DodgeScaled:
            cdr_ = -params_.h;
            cdb_ = +params_.h;
            csym_ = 0.5 * params_.h * (params_.gamma1 + params_.gamma2);
            cg0_ = params_.h * params_.gamma0;
            cxc_ = 0.0;
            general_x_ = true;
            break;
        case Variant::Full:
            cdr_ = -(params_.gamma1 - params_.gamma2);
            cdb_ = +(params_.gamma1 - params_.gamma2);
            csym_ = 0.5 * params_.h * (params_.gamma1 + params_.gamma2);
            cg0_ = params_.h * params_.gamma0;
            cxc_ = params_.h * (params_.gamma1 - params_.gamma2);
            general_x_ = true;
            break;
    }
    const int nx = grid_.nx, ny = grid_.ny;
    q_ = Field2D(nx, ny);
    v_ = Field2D(nx, ny);
    rb_ = Field2D(nx, ny);
    mr_ = Field2D(nx, ny);
    mb_ = Field2D(nx, ny);
    if (general_x_) {
        ar_ = Field2D(nx, ny);
        ab_ = Field2D(nx, ny);
        pr_fld_ = Field2D(nx, ny);
        pb_fld_ = Field2D(nx, ny);
    }
    const std::size_t stride = static_cast<std::size_t>(nx) + 2;
    padr_.assign(stride * ny, 0.0);
    padb_.assign(stride * ny, 0.0);
    padq_.assign(stride * ny, 0.0);
    padv_.assign(stride * ny, 0.0);
    if (general_x_) {
        padar_.assign(stride * ny, 0.0);
        padab_.assign(stride * ny, 0.0);
        padpr_.assign(stride * ny, 0.0);
        padpb_.assign(stride * ny, 0.0);
    }
    flux_ = FaceFluxes(nx, ny);
    rn_ = Field2D(nx, ny);
    bn_ = Field2D(nx, ny);
}

double ExplicitStepper::max_dt() const {
    return stability_dt(grid_, params_, variant_, opt_.cfl_safety);
}

void ExplicitStepper::derive_cells(const State& s) {
    const int nx = grid_.nx, ny = grid_.ny;
    for (int j = 0; j < ny; ++j) {
        const double* rr = s.r.row(j);
        const double* bb = s.b.row(j);
        double* qq = q_.row(j);
        double* vv = v_.row(j);
        double* rb = rb_.row(j);
        double* mr = mr_.row(j);
        double* mb = mb_.row(j);
        for (int i = 0; i < nx; ++i) {
            qq[i] = rr[i] + bb[i];
            vv[i] = 1.0 - qq[i];
            rb[i] = rr[i] * bb[i];
            mr[i] = vv[i] * bb[i];
            mb[i] = vv[i] * rr[i];
        }
        if (general_x_) {
            double* ar = ar_.row(j);
            double* ab = ab_.row(j);
            double* pr = pr_fld_.row(j);
            double* pb = pb_fld_.row(j);
            for (int i = 0; i < nx; ++i) {
                ar[i] = vv[i] * (1.0 + params_.alpha * rr[i]);
                ab[i] = vv[i] * (1.0 + params_.alpha * bb[i]);
                pr[i] = rr[i] * ar[i];
                pb[i] = bb[i] * ab[i];
            }
        }
    }
    const std::size_t stride = static_cast<std::size_t>(nx) + 2;
    for (int j = 0; j < ny; ++j) {
        fill_pad1(s.r.row(j), nx, padr_.data() + stride * j);
        fill_pad1(s.b.row(j), nx, padb_.data() + stride * j);
        fill_pad1(q_.row(j), nx, padq_.data() + stride * j);
        fill_pad1(v_.row(j), nx, padv_.data() + stride * j);
        if (general_x_) {
            fill_pad1(ar_.row(j), nx, padar_.data() + stride * j);
            fill_pad1(ab_.row(j), nx, padab_.data() + stride * j);
            fill_pad1(pr_fld_.row(j), nx, padpr_.data() + stride * j);
            fill_pad1(pb_fld_.row(j), nx, padpb_.data() + stride * j);
        }
    }
}

void ExplicitStepper::fluxes(const State& s, FaceFluxes& F) {
    if (s.r.nx != grid_.nx || s.r.ny != grid_.ny)
        throw ConfigError("state shape does not match the stepper grid");
    if (F.nx != grid_.nx || F.ny != grid_.ny) F = FaceFluxes(grid_.nx, grid_.ny);
    derive_cells(s);
    const KernelTable& K = kernels();
    const int nx = grid_.nx, ny = grid_.ny;
    const std::size_t stride = static_cast<std::size_t>(nx) + 2;
    const double dxinv = 1.0 / grid_.dx();
    const double dyinv = 1.0 / grid_.dy();
    auto center = [&](const std::vector<double>& buf, int j) { return buf.data() + stride * j + 1; };

    for (int j = 0; j < ny; ++j) {
        FluxXArgs a;
        a.n = nx;
        a.h = params_.h;
        a.dxinv = dxinv;
        const double* rc = center(padr_, j);
        const double* bc = center(padb_, j);
        const double* qc = center(padq_, j);
        const double* vc = center(padv_, j);
        a.rW = rc - 1; a.rE = rc;
        a.bW = bc - 1; a.bE = bc;
        a.qW = qc - 1; a.qE = qc;
        a.vW = vc - 1; a.vE = vc;
        double* fr = F.fxr.data() + static_cast<std::size_t>(j) * (nx + 1);
        double* fb = F.fxb.data() + static_cast<std::size_t>(j) * (nx + 1);
        if (general_x_) {
            const double* arc = center(padar_, j);
            const double* abc = center(padab_, j);
            const double* prc = center(padpr_, j);
            const double* pbc = center(padpb_, j);
            a.ArW = arc - 1; a.ArE = arc;
            a.AbW = abc - 1; a.AbE = abc;
            a.PrW = prc - 1; a.PrE = prc;
            a.PbW = pbc - 1; a.PbE = pbc;
            K.flux_x_general(a, fr, fb);
        } else {
            K.flux_x_reduced(a, fr, fb);
        }
        fr[nx] = fr[0];  // duplicated periodic face
        fb[nx] = fb[0];
    }

    for (int jf = 1; jf < ny; ++jf) {
        const int js = jf - 1, jn = jf;
        FluxYArgs a;
        a.n = nx;
        a.dxinv = dxinv;
        a.dyinv = dyinv;
        a.cdr = cdr_; a.cdb = cdb_; a.csym = csym_; a.cg0 = cg0_; a.cxc = cxc_;
        a.rS = s.r.row(js); a.rN = s.r.row(jn);
        a.bS = s.b.row(js); a.bN = s.b.row(jn);
        a.qS = q_.row(js); a.qN = q_.row(jn);
        a.vS = v_.row(js); a.vN = v_.row(jn);
        a.rbS = rb_.row(js); a.rbN = rb_.row(jn);
        a.mrS = mr_.row(js); a.mrN = mr_.row(jn);
        a.mbS = mb_.row(js); a.mbN = mb_.row(jn);
        // Upwind rows: negative coefficient means downward transport, whose
        // donor is the north cell (and vice versa).
        a.rDon = (cdr_ <= 0.0) ? a.rN : a.rS;
        a.bDon = (cdb_ >= 0.0) ? a.bS : a.bN;
        a.prS = center(padr_, js); a.prN = center(padr_, jn);
        a.pbS = center(padb_, js); a.pbN = center(padb_, jn);
        K.flux_y(a, F.fyr.data() + static_cast<std::size_t>(jf) * nx,
                 F.fyb.data() + static_cast<std::size_t>(jf) * nx);
    }
    // wall faces jf = 0 and jf = ny stay identically zero
}

void ExplicitStepper::step(State& s, double dt) {
    const double cap = max_dt();
    if (!(dt > 0.0) || !std::isfinite(dt)) throw NumericError("step size must be finite and > 0");
    if (dt > cap * (1.0 + 1e-12)) {
        std::ostringstream oss;
        oss << "explicit step refused: dt = " << fmt17(dt) << " exceeds the stability bound "
            << fmt17(cap) << " for variant " << variant_name(variant_);
        throw NumericError(oss.str());
    }
    fluxes(s, flux_);
    const KernelTable& K = kernels();
    const int nx = grid_.nx, ny = grid_.ny;
    const double cx = dt / grid_.dx();
    const double cy = dt / grid_.dy();
    for (int j = 0; j < ny; ++j) {
        const double* fxr = flux_.fxr.data() + static_cast<std::size_t>(j) * (nx + 1);
        const double* fxb = flux_.fxb.data() + static_cast<std::size_t>(j) * (nx + 1);
        const double* fySr = flux_.fyr.data() + static_cast<std::size_t>(j) * nx;
        const double* fyNr = flux_.fyr.data() + static_cast<std::size_t>(j + 1) * nx;
        const double* fySb = flux_.fyb.data() + static_cast<std::size_t>(j) * nx;
        const double* fyNb = flux_.fyb.data() + static_cast<std::size_t>(j + 1) * nx;
        K.cell_update(nx, s.r.row(j), fxr, fxr + 1, fySr, fyNr, cx, cy, rn_.row(j));
        K.cell_update(nx, s.b.row(j), fxb, fxb + 1, fySb, fyNb, cx, cy, bn_.row(j));
    }

    // Box handling: snap rounding-level excursions, refuse anything larger.
    double worst = 0.0;
    int wi = -1, wj = -1;
    for (int j = 0; j < ny; ++j) {
        double* rr = rn_.row(j);
        double* bb = bn_.row(j);
        for (int i = 0; i < nx; ++i) {
            double r = rr[i], b = bb[i];
            if (!std::isfinite(r) || !std::isfinite(b))
                throw NumericError("explicit step produced a non-finite density at cell (" +
                                   std::to_string(i) + "," + std::to_string(j) + ")");
            double d = std::max({-r, -b, r + b - 1.0});
            if (d > worst) { worst = d; wi = i; wj = j; }
            r = std::max(r, 0.0);
            b = std::max(b, 0.0);
            const double q = r + b;
            if (q > 1.0) { r /= q; b /= q; }
            rr[i] = r;
            bb[i] = b;
        }
    }
    if (worst > opt_.box_tol) {
        std::ostringstream oss;
        oss << "explicit step left the admissible box by " << fmt17(worst) << " at cell (" << wi
            << "," << wj << "); reduce dt or cfl_safety";
        throw NumericError(oss.str());
    }
    std::swap(s.r.a, rn_.a);
    std::swap(s.b.a, bn_.a);
    s.t += dt;
}

void ExplicitStepper::advance_to(State& s, double t_end, double dt_cap) {
    const double cap = (dt_cap > 0.0) ? std::min(dt_cap, max_dt()) : max_dt();
    // Fixed step count so reruns take bit-identical paths.
    const double span = t_end - s.t;
    if (span <= 0.0) return;
    const long long n = std::max(1LL, static_cast<long long>(std::ceil(span / cap - 1e-12)));
    const double dt = span / static_cast<double>(n);
    for (long long k = 0; k < n; ++k) step(s, dt);
    s.t = t_end;
}

FaceFluxes compute_fluxes(const State& s, const Grid& g, const ModelParams& p, Variant v) {
    ExplicitStepper st(g, p, v);
    FaceFluxes F;
    st.fluxes(s, F);
    return F;
}

}  // namespace laneform
