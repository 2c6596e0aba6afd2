#pragma once
// Element-wise bodies shared by the scalar and SIMD kernel translation units.
//
// Each body is templated on an IO policy that supplies the pack type and
// load/store helpers. The scalar build instantiates them with packs of one
// double; the SIMD build instantiates the same source with vector packs (plus a
// scalar tail). Because both instantiations share one expression tree and the
// project builds with -ffp-contract=off, the results are bit-identical by
// construction, and the equivalence tests hold that line.

#include "laneform/kernels.hpp"

namespace laneform::detail {

// IO policy for packs of one double; SIMD policies live in kernels_simd.cpp.
struct ScalarIO {
    using pack = double;
    static constexpr int width = 1;
    static double load(const double* p, int i) { return p[i]; }
    static void store(double* p, int i, double v) { p[i] = v; }
};

template <class IO>
inline void flux_x_reduced_at(const FluxXArgs& a, int i, double* fr, double* fb) {
    using P = typename IO::pack;
    const double h2 = 0.5 * a.h;
    P rW = IO::load(a.rW, i), rE = IO::load(a.rE, i);
    P bW = IO::load(a.bW, i), bE = IO::load(a.bE, i);
    P qW = IO::load(a.qW, i), qE = IO::load(a.qE, i);
    P vf = 0.5 * (IO::load(a.vW, i) + IO::load(a.vE, i));
    P rf = 0.5 * (rW + rE);
    P bf = 0.5 * (bW + bE);
    P drdx = (rE - rW) * a.dxinv;
    P dbdx = (bE - bW) * a.dxinv;
    P dqdx = (qE - qW) * a.dxinv;
    // Red drifts +x (donor W), blue drifts -x (donor E); shared h/2 diffusion pair.
    IO::store(fr, i, vf * rW - h2 * (vf * drdx + rf * dqdx));
    IO::store(fb, i, -(vf * bE) - h2 * (vf * dbdx + bf * dqdx));
}

template <class IO>
inline void flux_x_general_at(const FluxXArgs& a, int i, double* fr, double* fb) {
    using P = typename IO::pack;
    const double h2 = 0.5 * a.h;
    P rW = IO::load(a.rW, i), rE = IO::load(a.rE, i);
    P bW = IO::load(a.bW, i), bE = IO::load(a.bE, i);
    P vf = 0.5 * (IO::load(a.vW, i) + IO::load(a.vE, i));
    P arf = 0.5 * (IO::load(a.ArW, i) + IO::load(a.ArE, i));
    P abf = 0.5 * (IO::load(a.AbW, i) + IO::load(a.AbE, i));
    P dPr = (IO::load(a.PrE, i) - IO::load(a.PrW, i)) * a.dxinv;
    P dPb = (IO::load(a.PbE, i) - IO::load(a.PbW, i)) * a.dxinv;
    P drdx = (rE - rW) * a.dxinv;
    P dbdx = (bE - bW) * a.dxinv;
    // Upwind cohesive drift, potential-gradient correction, plain vacancy diffusion.
    IO::store(fr, i, arf * rW + h2 * dPr - (a.h * vf) * drdx);
    IO::store(fb, i, -(abf * bE) + h2 * dPb - (a.h * vf) * dbdx);
}

template <class IO>
inline void flux_y_at(const FluxYArgs& a, int i, double* fr, double* fb) {
    using P = typename IO::pack;
    P rS = IO::load(a.rS, i), rN = IO::load(a.rN, i);
    P bS = IO::load(a.bS, i), bN = IO::load(a.bN, i);
    P vf = 0.5 * (IO::load(a.vS, i) + IO::load(a.vN, i));
    P rf = 0.5 * (rS + rN);
    P bf = 0.5 * (bS + bN);
    P rbf = 0.5 * (IO::load(a.rbS, i) + IO::load(a.rbN, i));
    P dr = (rN - rS) * a.dyinv;
    P db = (bN - bS) * a.dyinv;
    P dq = (IO::load(a.qN, i) - IO::load(a.qS, i)) * a.dyinv;
    P drb = (IO::load(a.rbN, i) - IO::load(a.rbS, i)) * a.dyinv;
    P sym = vf * drb + rbf * dq;
    P mrf = 0.5 * (IO::load(a.mrS, i) + IO::load(a.mrN, i));
    P mbf = 0.5 * (IO::load(a.mbS, i) + IO::load(a.mbN, i));
    // Central x-derivatives averaged over the two rows (pad-1 reads).
    P dbdx = 0.25 * a.dxinv *
             ((IO::load(a.pbS, i + 1) - IO::load(a.pbS, i - 1)) +
              (IO::load(a.pbN, i + 1) - IO::load(a.pbN, i - 1)));
    P drdx = 0.25 * a.dxinv *
             ((IO::load(a.prS, i + 1) - IO::load(a.prS, i - 1)) +
              (IO::load(a.prN, i + 1) - IO::load(a.prN, i - 1)));
    IO::store(fr, i, a.cdr * (mrf * IO::load(a.rDon, i)) - a.csym * sym -
                         a.cg0 * (vf * dr + rf * dq) - a.cxc * (vf * rf * dbdx));
    IO::store(fb, i, a.cdb * (mbf * IO::load(a.bDon, i)) - a.csym * sym -
                         a.cg0 * (vf * db + bf * dq) - a.cxc * (vf * bf * drdx));
}

template <class IO>
inline void cell_update_at(int i, const double* s, const double* fxl, const double* fxr,
                           const double* fys, const double* fyn, double cx, double cy,
                           double* out) {
    using P = typename IO::pack;
    P val = IO::load(s, i) - cx * (IO::load(fxr, i) - IO::load(fxl, i)) -
            cy * (IO::load(fyn, i) - IO::load(fys, i));
    IO::store(out, i, val);
}

template <class IO>
inline void master_row_at(const MasterRowArgs& a, int i, double* rout, double* bout) {
    using P = typename IO::pack;
    P vC = 1.0 - IO::load(a.q0, i);
    P r0 = IO::load(a.r0, i);
    P b0 = IO::load(a.b0, i);

    // Red outflow rates from (i,j): forward +x with cohesion two sites ahead,
    // lateral channels keyed to the opposing density one site ahead.
    P r_fwd = (1.0 - IO::load(a.q0, i + 1)) * (1.0 + a.alpha * IO::load(a.r0, i + 2));
    P r_dn = a.mdn * (1.0 - IO::load(a.qm, i)) * (a.g0 + a.g1 * IO::load(a.b0, i + 1));
    P r_up = a.mup * (1.0 - IO::load(a.qp, i)) * (a.g0 + a.g2 * IO::load(a.b0, i + 1));
    // Red inflows into (i,j): from behind, from above (dropping), from below (rising).
    P r_in = vC * ((1.0 + a.alpha * IO::load(a.r0, i + 1)) * IO::load(a.r0, i - 1) +
                   a.mup * (a.g0 + a.g1 * IO::load(a.bp, i + 1)) * IO::load(a.rp, i) +
                   a.mdn * (a.g0 + a.g2 * IO::load(a.bm, i + 1)) * IO::load(a.rm, i));
    IO::store(rout, i, r0 + a.lam * (r_in - (r_fwd + r_dn + r_up) * r0));

    // Blue mirrors red through x: forward -x with cohesion two sites back,
    // lateral channels keyed to the red density one site back (g1 = toward own
    // walking direction's preferred side, g2 the other).
    P b_fwd = (1.0 - IO::load(a.q0, i - 1)) * (1.0 + a.alpha * IO::load(a.b0, i - 2));
    P b_up = a.mup * (1.0 - IO::load(a.qp, i)) * (a.g0 + a.g1 * IO::load(a.r0, i - 1));
    P b_dn = a.mdn * (1.0 - IO::load(a.qm, i)) * (a.g0 + a.g2 * IO::load(a.r0, i - 1));
    P b_in = vC * ((1.0 + a.alpha * IO::load(a.b0, i - 1)) * IO::load(a.b0, i + 1) +
                   a.mdn * (a.g0 + a.g1 * IO::load(a.rm, i - 1)) * IO::load(a.bm, i) +
                   a.mup * (a.g0 + a.g2 * IO::load(a.rp, i - 1)) * IO::load(a.bp, i));
    IO::store(bout, i, b0 + a.lam * (b_in - (b_fwd + b_up + b_dn) * b0));
}

}  // namespace laneform::detail
