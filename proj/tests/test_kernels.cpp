// Scalar vs SIMD kernel equivalence. Both tables are built from one shared
// expression tree with FP contraction off, so every output must be
// bit-identical, not merely close; these tests compare bit patterns.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bit>
#include <cstdint>
#include <random>
#include <vector>

#include "laneform/common.hpp"
#include "laneform/config.hpp"
#include "laneform/kernels.hpp"
#include "laneform/lattice.hpp"
#include "laneform/pde.hpp"

using namespace laneform;

namespace {

bool same_bits(double a, double b) {
    return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

std::vector<double> rand_vec(std::size_t n, std::mt19937_64& rng, double lo = 0.0,
                             double hi = 0.5) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

// Lengths that exercise sub-pack, exact-pack and pack-plus-tail code paths.
const int kLens[] = {1, 3, 4, 7, 8, 16, 33};

}  // namespace

TEST_CASE("raw kernels match bit for bit") {
    const KernelTable* simd = kernels_simd_if_supported();
    if (!simd) {
        MESSAGE("no SIMD kernel table on this host; scalar-only build verified trivially");
        return;
    }
    const KernelTable& ref = kernels_scalar();
    std::mt19937_64 rng(20240817u);

    for (int n : kLens) {
        CAPTURE(n);

        // x-face fluxes, both variants
        {
            FluxXArgs a;
            a.n = n;
            a.h = 0.17;
            a.dxinv = 3.7;
            auto rW = rand_vec(n, rng), rE = rand_vec(n, rng);
            auto bW = rand_vec(n, rng), bE = rand_vec(n, rng);
            auto qW = rand_vec(n, rng, 0.0, 0.9), qE = rand_vec(n, rng, 0.0, 0.9);
            auto vW = rand_vec(n, rng), vE = rand_vec(n, rng);
            auto ArW = rand_vec(n, rng), ArE = rand_vec(n, rng);
            auto AbW = rand_vec(n, rng), AbE = rand_vec(n, rng);
            auto PrW = rand_vec(n, rng), PrE = rand_vec(n, rng);
            auto PbW = rand_vec(n, rng), PbE = rand_vec(n, rng);
            a.rW = rW.data(); a.rE = rE.data();
            a.bW = bW.data(); a.bE = bE.data();
            a.qW = qW.data(); a.qE = qE.data();
            a.vW = vW.data(); a.vE = vE.data();
            a.ArW = ArW.data(); a.ArE = ArE.data();
            a.AbW = AbW.data(); a.AbE = AbE.data();
            a.PrW = PrW.data(); a.PrE = PrE.data();
            a.PbW = PbW.data(); a.PbE = PbE.data();

            std::vector<double> fr1(n), fb1(n), fr2(n), fb2(n);
            ref.flux_x_reduced(a, fr1.data(), fb1.data());
            simd->flux_x_reduced(a, fr2.data(), fb2.data());
            for (int i = 0; i < n; ++i) {
                CHECK(same_bits(fr1[i], fr2[i]));
                CHECK(same_bits(fb1[i], fb2[i]));
            }
            ref.flux_x_general(a, fr1.data(), fb1.data());
            simd->flux_x_general(a, fr2.data(), fb2.data());
            for (int i = 0; i < n; ++i) {
                CHECK(same_bits(fr1[i], fr2[i]));
                CHECK(same_bits(fb1[i], fb2[i]));
            }
        }

        // y-face fluxes; pr/pb rows carry one pad cell each side
        {
            FluxYArgs a;
            a.n = n;
            a.dxinv = 2.9;
            a.dyinv = 4.3;
            a.cdr = -0.1; a.cdb = 0.1; a.csym = 0.03; a.cg0 = 0.2; a.cxc = 0.05;
            auto rS = rand_vec(n, rng), rN = rand_vec(n, rng);
            auto bS = rand_vec(n, rng), bN = rand_vec(n, rng);
            auto qS = rand_vec(n, rng, 0.0, 0.9), qN = rand_vec(n, rng, 0.0, 0.9);
            auto vS = rand_vec(n, rng), vN = rand_vec(n, rng);
            auto rbS = rand_vec(n, rng), rbN = rand_vec(n, rng);
            auto mrS = rand_vec(n, rng), mrN = rand_vec(n, rng);
            auto mbS = rand_vec(n, rng), mbN = rand_vec(n, rng);
            auto rDon = rand_vec(n, rng), bDon = rand_vec(n, rng);
            auto prS = rand_vec(n + 2, rng), prN = rand_vec(n + 2, rng);
            auto pbS = rand_vec(n + 2, rng), pbN = rand_vec(n + 2, rng);
            a.rS = rS.data(); a.rN = rN.data();
            a.bS = bS.data(); a.bN = bN.data();
            a.qS = qS.data(); a.qN = qN.data();
            a.vS = vS.data(); a.vN = vN.data();
            a.rbS = rbS.data(); a.rbN = rbN.data();
            a.mrS = mrS.data(); a.mrN = mrN.data();
            a.mbS = mbS.data(); a.mbN = mbN.data();
            a.rDon = rDon.data(); a.bDon = bDon.data();
            a.prS = prS.data() + 1; a.prN = prN.data() + 1;
            a.pbS = pbS.data() + 1; a.pbN = pbN.data() + 1;

            std::vector<double> fr1(n), fb1(n), fr2(n), fb2(n);
            ref.flux_y(a, fr1.data(), fb1.data());
            simd->flux_y(a, fr2.data(), fb2.data());
            for (int i = 0; i < n; ++i) {
                CHECK(same_bits(fr1[i], fr2[i]));
                CHECK(same_bits(fb1[i], fb2[i]));
            }
        }

        // conservative cell update
        {
            auto s = rand_vec(n, rng), fxl = rand_vec(n, rng), fxr = rand_vec(n, rng);
            auto fys = rand_vec(n, rng), fyn = rand_vec(n, rng);
            std::vector<double> o1(n), o2(n);
            ref.cell_update(n, s.data(), fxl.data(), fxr.data(), fys.data(), fyn.data(),
                            0.37, 0.81, o1.data());
            simd->cell_update(n, s.data(), fxl.data(), fxr.data(), fys.data(), fyn.data(),
                              0.37, 0.81, o2.data());
            for (int i = 0; i < n; ++i) CHECK(same_bits(o1[i], o2[i]));
        }

        // synchronous master row; all nine rows carry two pad cells each side
        for (int mask = 0; mask < 4; ++mask) {
            MasterRowArgs a;
            a.n = n;
            a.lam = 0.4;
            a.alpha = 0.2; a.g0 = 0.1; a.g1 = 0.5; a.g2 = 0.4;
            a.mdn = (mask & 1) ? 1.0 : 0.0;
            a.mup = (mask & 2) ? 1.0 : 0.0;
            auto rm = rand_vec(n + 4, rng), r0 = rand_vec(n + 4, rng), rp = rand_vec(n + 4, rng);
            auto bm = rand_vec(n + 4, rng), b0 = rand_vec(n + 4, rng), bp = rand_vec(n + 4, rng);
            auto qm = rand_vec(n + 4, rng, 0.0, 0.9), q0 = rand_vec(n + 4, rng, 0.0, 0.9),
                 qp = rand_vec(n + 4, rng, 0.0, 0.9);
            a.rm = rm.data() + 2; a.r0 = r0.data() + 2; a.rp = rp.data() + 2;
            a.bm = bm.data() + 2; a.b0 = b0.data() + 2; a.bp = bp.data() + 2;
            a.qm = qm.data() + 2; a.q0 = q0.data() + 2; a.qp = qp.data() + 2;

            std::vector<double> r1(n), b1(n), r2(n), b2(n);
            ref.master_row(a, r1.data(), b1.data());
            simd->master_row(a, r2.data(), b2.data());
            for (int i = 0; i < n; ++i) {
                CHECK(same_bits(r1[i], r2[i]));
                CHECK(same_bits(b1[i], b2[i]));
            }
        }
    }
}

TEST_CASE("kernel table selection") {
    CHECK(std::string(kernels_scalar().name) == "scalar");

    set_active_kernels("scalar");
    CHECK(std::string(kernels().name) == "scalar");

    CHECK_THROWS_AS(set_active_kernels("fancy"), ConfigError);
    CHECK(std::string(kernels().name) == "scalar");  // failed switch leaves choice alone

    const KernelTable* simd = kernels_simd_if_supported();
    if (simd) {
        set_active_kernels("simd");
        CHECK(std::string(kernels().name) == "simd");
    } else {
        CHECK_THROWS_AS(set_active_kernels("simd"), ConfigError);
    }

    set_active_kernels(nullptr);  // back to autodetection
    const std::string picked = kernels().name;
    CHECK((picked == "scalar" || picked == "simd"));
    CHECK((simd ? picked == "simd" : picked == "scalar"));
}

namespace {

State random_admissible(int nx, int ny, std::mt19937_64& rng) {
    State s(nx, ny);
    std::uniform_real_distribution<double> u(0.02, 0.47);
    for (auto& x : s.r.a) x = u(rng);
    for (auto& x : s.b.a) x = u(rng);
    return s;
}

}  // namespace

TEST_CASE("whole-grid operations agree between tables") {
    if (!kernels_simd_if_supported()) {
        MESSAGE("no SIMD kernel table on this host; nothing to cross-check");
        return;
    }
    std::mt19937_64 rng(77u);
    const int nx = 33, ny = 5;
    Grid g = Grid::corridor(nx, ny);
    State s = random_admissible(nx, ny, rng);

    struct Case {
        Variant v;
        ModelParams p;
    };
    const Case cases[] = {
        {Variant::ReducedSymmetric, ModelParams{0.1, 0.01, 0.45, 0.45, 0.0}},
        {Variant::DodgeScaled, ModelParams{0.1, 0.01, 0.5, 0.4, 0.2}},
        {Variant::Full, ModelParams{0.1, 0.01, 0.5, 0.4, 0.2}},
    };
    for (const auto& c : cases) {
        CAPTURE(variant_name(c.v));
        set_active_kernels("scalar");
        FaceFluxes fa = compute_fluxes(s, g, c.p, c.v);
        set_active_kernels("simd");
        FaceFluxes fb = compute_fluxes(s, g, c.p, c.v);
        for (std::size_t k = 0; k < fa.fxr.size(); ++k) {
            CHECK(same_bits(fa.fxr[k], fb.fxr[k]));
            CHECK(same_bits(fa.fxb[k], fb.fxb[k]));
        }
        for (std::size_t k = 0; k < fa.fyr.size(); ++k) {
            CHECK(same_bits(fa.fyr[k], fb.fyr[k]));
            CHECK(same_bits(fa.fyb[k], fb.fyb[k]));
        }

        // one explicit step end to end
        set_active_kernels("scalar");
        ExplicitStepper sa(g, c.p, c.v);
        State s1 = s;
        sa.step(s1, sa.max_dt());
        set_active_kernels("simd");
        ExplicitStepper sb(g, c.p, c.v);
        State s2 = s;
        sb.step(s2, sb.max_dt());
        for (std::size_t k = 0; k < s1.r.a.size(); ++k) {
            CHECK(same_bits(s1.r.a[k], s2.r.a[k]));
            CHECK(same_bits(s1.b.a[k], s2.b.a[k]));
        }
    }

    // synchronous lattice update end to end
    ModelParams mp{0.1, 0.1, 0.5, 0.4, 0.2};
    set_active_kernels("scalar");
    MasterEvolver ma(nx, ny, mp);
    State s1 = s;
    ma.evolve(s1, 3);
    set_active_kernels("simd");
    MasterEvolver mb(nx, ny, mp);
    State s2 = s;
    mb.evolve(s2, 3);
    for (std::size_t k = 0; k < s1.r.a.size(); ++k) {
        CHECK(same_bits(s1.r.a[k], s2.r.a[k]));
        CHECK(same_bits(s1.b.a[k], s2.b.a[k]));
    }

    set_active_kernels(nullptr);
}
