#pragma once
// Hot inner loops, sliced per grid row so they vectorize cleanly.
//
// Two implementations ship: a scalar reference (kernels_scalar.cpp) and a
// std::experimental::simd variant (kernels_simd.cpp, built with AVX2 codegen on
// x86-64). Both are compiled with FP contraction off and use the same operation
// order, so results are required to be bit-identical; the equivalence tests
// assert exactly that. Selection happens once at startup: the SIMD table is used
// when the CPU supports it, and the LANEFORM_KERNELS environment variable
// ("scalar" or "simd") or set_active_kernels() overrides the choice.
//
// Conventions shared by all kernels:
//  - "rows" are contiguous slices of Field2D (stride 1 in i).
//  - x is periodic; callers pass pointers into padded copies of each row so the
//    kernels themselves are branch-free. A pad-w copy of row[0..n-1] stores the
//    wrapped values at indices -w..-1 and n..n+w-1 relative to the returned
//    center pointer.
//  - y walls enter via 0/1 masks and zeroed ghost rows, never via branches.

namespace laneform {

// x-face fluxes along one row; face f sits between cell f-1 (W) and cell f (E),
// n faces per row with wrap handled by the padded pointers. Fields: r,b species
// densities, q = r+b, v = 1-q; A* = v*(1+alpha*s) drift mobilities and
// P* = s*A* their potentials (general variant only).
struct FluxXArgs {
    int n = 0;
    double h = 0.0;      // lattice spacing (diffusion scale)
    double dxinv = 0.0;  // 1/dx of the grid
    const double *rW = nullptr, *rE = nullptr;
    const double *bW = nullptr, *bE = nullptr;
    const double *qW = nullptr, *qE = nullptr;
    const double *vW = nullptr, *vE = nullptr;
    const double *ArW = nullptr, *ArE = nullptr;
    const double *AbW = nullptr, *AbE = nullptr;
    const double *PrW = nullptr, *PrE = nullptr;
    const double *PbW = nullptr, *PbE = nullptr;
};

// y-face fluxes between row S (below) and row N (above) for one interior face
// row; i runs over 0..n-1. Coefficient slots cover every scheme variant:
//   F_r[i] = cdr*mr_f*rDon[i] - csym*(v_f d(rb) + (rb)_f dq)
//            - cg0*(v_f dr + r_f dq) - cxc*v_f*r_f*dbdx
// and symmetrically for b (cdb, mb_f, bDon, drdx). mr = v*b and mb = v*r are
// the lateral drift mobilities; rDon/bDon point at the donor (upwind) row for
// the drift term. dbdx/drdx are central x-derivatives averaged over both rows,
// read from pad-1 row copies.
struct FluxYArgs {
    int n = 0;
    double dxinv = 0.0, dyinv = 0.0;
    double cdr = 0.0, cdb = 0.0, csym = 0.0, cg0 = 0.0, cxc = 0.0;
    const double *rS = nullptr, *rN = nullptr;
    const double *bS = nullptr, *bN = nullptr;
    const double *qS = nullptr, *qN = nullptr;
    const double *vS = nullptr, *vN = nullptr;
    const double *rbS = nullptr, *rbN = nullptr;
    const double *mrS = nullptr, *mrN = nullptr;
    const double *mbS = nullptr, *mbN = nullptr;
    const double *rDon = nullptr, *bDon = nullptr;
    const double *prS = nullptr, *prN = nullptr;  // pad-1 copies for d/dx stencils
    const double *pbS = nullptr, *pbN = nullptr;
};

// One synchronous master-equation row update. All nine field rows are pad-2
// copies (indices i-2..i+2 valid around the center pointer); rm/r0/rp are the
// red rows at j-1, j, j+1, likewise bm/b0/bp and the totals qm/q0/qp. mdn/mup
// are 1.0 on interior faces and 0.0 at the bottom/top wall; the matching ghost
// rows must be zero-filled.
struct MasterRowArgs {
    int n = 0;
    double lam = 0.0;  // global jump probability scale
    double alpha = 0.0, g0 = 0.0, g1 = 0.0, g2 = 0.0;
    double mdn = 1.0, mup = 1.0;
    const double *rm = nullptr, *r0 = nullptr, *rp = nullptr;
    const double *bm = nullptr, *b0 = nullptr, *bp = nullptr;
    const double *qm = nullptr, *q0 = nullptr, *qp = nullptr;
};

struct KernelTable {
    const char* name;
    // Symmetrized-lateral x fluxes: upwind drift with vacancy mobility plus the
    // h/2-scaled diffusion pair. Writes fr[0..n-1], fb[0..n-1].
    void (*flux_x_reduced)(const FluxXArgs&, double* fr, double* fb);
    // General x fluxes with cohesion: upwind drift with A mobilities, potential
    // gradient (h/2) d(P)/dx and plain diffusion -h*v_f*ds/dx.
    void (*flux_x_general)(const FluxXArgs&, double* fr, double* fb);
    void (*flux_y)(const FluxYArgs&, double* fr, double* fb);
    // Conservative cell update: out[i] = s[i] - cx*(fxr[i]-fxl[i]) - cy*(fyn[i]-fys[i]).
    void (*cell_update)(int n, const double* s, const double* fxl, const double* fxr,
                        const double* fys, const double* fyn, double cx, double cy, double* out);
    void (*master_row)(const MasterRowArgs&, double* rout, double* bout);
};

const KernelTable& kernels_scalar();
// Null when the build has no SIMD variant for this ISA or the CPU lacks AVX2.
const KernelTable* kernels_simd_if_supported();

// Runtime-selected table (SIMD when available). First call latches the choice;
// LANEFORM_KERNELS=scalar|simd overrides autodetection.
const KernelTable& kernels();
// Test/CLI hook; name as above, nullptr re-enables autodetection. Throws
// ConfigError for unknown names or "simd" on unsupported hardware.
void set_active_kernels(const char* name);

}  // namespace laneform
