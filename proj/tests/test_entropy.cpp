// Dual (entropy) variables: closed-form inverse, overflow safety, the
// algebraic identities tying the mobility form to the symmetric gradient-flow
// coefficients, and the implicit backward-Euler stepper built on them.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "laneform/common.hpp"
#include "laneform/entropy.hpp"
#include "laneform/grid.hpp"
#include "laneform/implicit.hpp"
#include "laneform/params.hpp"

using namespace laneform;

namespace {

const ModelParams kSym{0.3, 0.1, 0.2, 0.2, 0.0};  // symmetric reduced system

// Uniform sample of the open admissible box.
void random_box_point(std::mt19937_64& rng, double& r, double& b) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    r = u(rng) * (1.0 - 1e-9);
    b = u(rng) * (1.0 - 1e-9 - r);
    r = std::max(r, 1e-12);
    b = std::max(b, 1e-12);
}

}  // namespace

TEST_CASE("scalar dual transform round-trips over the box") {
    std::mt19937_64 rng(1618u);
    const double xs[] = {-3.0, 0.0, 0.7, 3.0};
    const ModelParams p{0.1, 0.1, 0.2, 0.2, 0.0};
    for (int k = 0; k < 10000; ++k) {
        double r, b;
        random_box_point(rng, r, b);
        const double x = xs[k % 4];
        double u, v, r2, b2;
        dual_from_primal(r, b, x, p, u, v);
        primal_from_dual(u, v, x, p, r2, b2);
        CHECK(std::abs(r2 - r) <= 1e-12 * r + 1e-300);
        CHECK(std::abs(b2 - b) <= 1e-12 * b + 1e-300);
    }
}

TEST_CASE("inverse transform cannot overflow") {
    const ModelParams p{0.1, 0.1, 0.2, 0.2, 0.0};
    const double cases[][3] = {
        {500.0, -200.0, 35.0},   // potential 700, huge positive exponent
        {-500.0, -500.0, 0.0},   // both species essentially absent
        {800.0, 800.0, 0.0},     // packed to capacity
        {0.0, 0.0, -35.0},       // potential -700 the other way
        {300.0, 300.0, 35.0},
    };
    for (const auto& c : cases) {
        double r, b;
        primal_from_dual(c[0], c[1], c[2], p, r, b);
        CHECK(std::isfinite(r));
        CHECK(std::isfinite(b));
        CHECK(r > 0.0);
        CHECK(b > 0.0);
        CHECK(r <= 1.0);
        CHECK(b <= 1.0);
        CHECK(r + b <= 1.0 + 1e-15);
    }
}

TEST_CASE("field transform round-trips and guards the box") {
    std::mt19937_64 rng(42u);
    Grid g = Grid::corridor(20, 5);
    State s(20, 5);
    std::uniform_real_distribution<double> u(0.01, 0.47);
    for (auto& x : s.r.a) x = u(rng);
    for (auto& x : s.b.a) x = u(rng);
    s.t = 1.25;

    EntropyState e = primal_to_entropy(s, g, kSym);
    CHECK(e.t == s.t);
    State s2 = entropy_to_primal(e, kSym);
    CHECK(s2.t == s.t);
    for (std::size_t k = 0; k < s.r.a.size(); ++k) {
        CHECK(std::abs(s2.r.a[k] - s.r.a[k]) <= 1e-12);
        CHECK(std::abs(s2.b.a[k] - s.b.a[k]) <= 1e-12);
    }

    State wrong(19, 5);
    CHECK_THROWS_AS(primal_to_entropy(wrong, g, kSym), ConfigError);

    // a nudge below zero within clip_eps is absorbed, a real violation is not
    State dip = s;
    dip.r.at(3, 2) = -5e-11;
    CHECK_NOTHROW(primal_to_entropy(dip, g, kSym, 1e-10));
    dip.r.at(3, 2) = -2e-6;
    CHECK_THROWS_AS(primal_to_entropy(dip, g, kSym, 1e-10), NumericError);
}

TEST_CASE("mobility matrix entries") {
    const ModelParams p{0.3, 0.1, 0.2, 0.2, 0.0};
    Mat4 M = mobility_matrix(0.3, 0.2, p);
    const double vac = 0.5;
    CHECK(M.m[0][0] == doctest::Approx(vac * 0.3).epsilon(1e-15));
    CHECK(M.m[2][2] == doctest::Approx(vac * 0.2).epsilon(1e-15));
    CHECK(M.m[1][1] == doctest::Approx(2 * 0.1 * vac * 0.3 + 2 * 0.2 * vac * 0.06).epsilon(1e-14));
    CHECK(M.m[1][3] == doctest::Approx(2 * 0.2 * vac * 0.06).epsilon(1e-14));
    CHECK(M.m[3][3] == doctest::Approx(2 * 0.1 * vac * 0.2 + 2 * 0.2 * vac * 0.06).epsilon(1e-14));
    CHECK(M.m[3][1] == M.m[1][3]);
    CHECK(M.m[0][2] == 0.0);
    CHECK(M.m[0][1] == 0.0);
}

TEST_CASE("gradient-flow coefficients: structure, PSD, drift closure") {
    std::mt19937_64 rng(2718u);
    const ModelParams p = kSym;
    const double h2 = 0.5 * p.h;

    for (int k = 0; k < 10000; ++k) {
        double r, b;
        random_box_point(rng, r, b);
        const double vac = 1.0 - r - b;
        Mat4 G;
        Vec4 H;
        gradient_flow_coeffs(r, b, p, G, H);

        // symmetry and block sparsity
        CHECK(G.m[0][2] == G.m[2][0]);
        CHECK(G.m[1][3] == G.m[3][1]);
        CHECK(G.m[0][1] == 0.0);
        CHECK(G.m[0][3] == 0.0);
        CHECK(G.m[1][2] == 0.0);
        CHECK(G.m[2][3] == 0.0);
        CHECK(H.v[1] == 0.0);
        CHECK(H.v[3] == 0.0);

        // each 2x2 block is PSD: nonnegative diagonal, nonnegative determinant
        CHECK(G.m[0][0] >= 0.0);
        CHECK(G.m[2][2] >= 0.0);
        CHECK(G.m[1][1] >= 0.0);
        CHECK(G.m[3][3] >= 0.0);
        const double detx = G.m[0][0] * G.m[2][2] - G.m[0][2] * G.m[0][2];
        const double dety = G.m[1][1] * G.m[3][3] - G.m[1][3] * G.m[1][3];
        CHECK(detx >= -1e-16 * (G.m[0][0] * G.m[2][2] + G.m[0][2] * G.m[0][2]));
        CHECK(dety >= -1e-16 * (G.m[1][1] * G.m[3][3] + G.m[1][3] * G.m[1][3]));

        // eliminating grad(q) from the mobility form must reproduce G exactly:
        // with dq = 2 vac (r du + b dv) / (2-q) for gauged duals (du, dv),
        //   (h/2)(M00 du + r/2 dq)                == G00 du + G02 dv
        //   (h/2)(M22 dv + b/2 dq)                == G20 du + G22 dv
        //   (h/2)(M11 du + M13 dv + gamma0 r dq)  == G11 du + G13 dv
        //   (h/2)(M33 dv + M31 du + gamma0 b dq)  == G31 du + G33 dv
        Mat4 M = mobility_matrix(r, b, p);
        std::uniform_real_distribution<double> ud(-3.0, 3.0);
        const double du = ud(rng), dv = ud(rng);
        const double dq = 2.0 * vac * (r * du + b * dv) / (2.0 - r - b);
        const double lx_r = h2 * (M.m[0][0] * du + 0.5 * r * dq);
        const double rx_r = G.m[0][0] * du + G.m[0][2] * dv;
        CHECK(std::abs(lx_r - rx_r) <= 1e-14);
        const double lx_b = h2 * (M.m[2][2] * dv + 0.5 * b * dq);
        const double rx_b = G.m[2][0] * du + G.m[2][2] * dv;
        CHECK(std::abs(lx_b - rx_b) <= 1e-14);
        const double ly_r = h2 * (M.m[1][1] * du + M.m[1][3] * dv + p.gamma0 * r * dq);
        const double ry_r = G.m[1][1] * du + G.m[1][3] * dv;
        CHECK(std::abs(ly_r - ry_r) <= 1e-14);
        const double ly_b = h2 * (M.m[3][3] * dv + M.m[3][1] * du + p.gamma0 * b * dq);
        const double ry_b = G.m[3][1] * du + G.m[3][3] * dv;
        CHECK(std::abs(ly_b - ry_b) <= 1e-14);

        // the x-potentials close onto the pure drift fluxes
        //   (2/h)(G00 - G02) - H0 == vac r,   (2/h)(G22 - G20) + H2 == vac b
        const double drift_r = (2.0 / p.h) * (G.m[0][0] - G.m[0][2]) - H.v[0];
        const double drift_b = (2.0 / p.h) * (G.m[2][2] - G.m[2][0]) + H.v[2];
        // the closure cancels terms of size O(G/h), so the rounding floor is
        // absolute at machine scale, not relative to the small product vac r
        CHECK(std::abs(drift_r - vac * r) <= 1e-12 * vac * r + 1e-15);
        CHECK(std::abs(drift_b - vac * b) <= 1e-12 * vac * b + 1e-15);
    }

    // the drift column vanishes identically on the diagonal r = b
    for (double d : {1e-9, 0.01, 0.2, 0.4999}) {
        Mat4 G;
        Vec4 H;
        gradient_flow_coeffs(d, d, p, G, H);
        CHECK(H.v[0] == 0.0);
        CHECK(H.v[2] == 0.0);
    }
}

namespace {

State smooth_state(const Grid& g, double c, double amp) {
    State s(g.nx, g.ny);
    const double pi = std::acos(-1.0);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double mod =
                amp * std::sin(2.0 * pi * (g.cx(i) - g.x0) / g.wx) *
                std::cos(pi * (g.cy(j) - g.y0) / g.wy);
            s.r.at(i, j) = c + mod;
            s.b.at(i, j) = c - mod;
        }
    return s;
}

}  // namespace

TEST_CASE("implicit stepper guards") {
    Grid g = Grid::corridor(12, 4);
    CHECK_THROWS_WITH_AS(ImplicitStepper(g, ModelParams{0.1, 0.1, 0.5, 0.4, 0.0}),
                         doctest::Contains("symmetric reduced system"), ConfigError);
    CHECK_THROWS_AS(ImplicitStepper(g, ModelParams{0.1, 0.1, 0.2, 0.2, 0.1}), ConfigError);
    ImplicitOptions bad;
    bad.fp_tol = 0.0;
    CHECK_THROWS_AS(ImplicitStepper(g, kSym, bad), ConfigError);

    ImplicitStepper st(g, kSym);
    State wrong(11, 4);
    CHECK_THROWS_AS(st.step(wrong, 0.01), ConfigError);
    State s = smooth_state(g, 0.4, 0.02);
    CHECK_THROWS_AS(st.step(s, 0.0), NumericError);
    CHECK_THROWS_AS(st.step(s, std::nan("")), NumericError);
}

TEST_CASE("flat states are exact fixed points without regularization") {
    Grid g = Grid::corridor(12, 4);
    ImplicitOptions opt;
    opt.reg_weight = 0.0;
    ImplicitStepper st(g, kSym, opt);
    State s(12, 4);
    for (auto& x : s.r.a) x = 0.3;
    for (auto& x : s.b.a) x = 0.2;
    State before = s;
    const int iters = st.step(s, 0.05);
    CHECK(iters == 0);
    CHECK(s.t == 0.05);
    for (std::size_t k = 0; k < s.r.a.size(); ++k) {
        CHECK(s.r.a[k] == before.r.a[k]);
        CHECK(s.b.a[k] == before.b.a[k]);
    }

    // the spatial operator itself is exactly zero on constants
    auto [opr, opb] = st.apply_operator(s, 0.0);
    for (double x : opr.a) CHECK(x == 0.0);
    for (double x : opb.a) CHECK(x == 0.0);

    // with regularization the operator reduces to -(coeff) * gauged duals
    const double uh = std::log(0.3) - 0.5 * std::log(0.5);
    const double vhv = std::log(0.2) - 0.5 * std::log(0.5);
    auto [opr2, opb2] = st.apply_operator(s, 0.3);
    for (double x : opr2.a) CHECK(x == doctest::Approx(-0.3 * uh).epsilon(1e-13));
    for (double x : opb2.a) CHECK(x == doctest::Approx(-0.3 * vhv).epsilon(1e-13));
}

TEST_CASE("implicit steps stay strictly inside the box and relax the profile") {
    Grid g = Grid::corridor(16, 4);
    ImplicitStepper st(g, kSym);
    State s = smooth_state(g, 0.4, 0.02);
    const double dev0 = std::max(s.r.max() - 0.4, 0.4 - s.r.min());
    for (int k = 0; k < 5; ++k) {
        const int iters = st.step(s, 0.01);
        CHECK(iters >= 1);
        CHECK(s.r.min() > 0.0);
        CHECK(s.b.min() > 0.0);
        double qmax = 0.0;
        for (std::size_t c = 0; c < s.r.a.size(); ++c)
            qmax = std::max(qmax, s.r.a[c] + s.b.a[c]);
        CHECK(qmax < 1.0);
    }
    const double dev1 = std::max(s.r.max() - 0.4, 0.4 - s.r.min());
    CHECK(dev1 < dev0);  // diffusion relaxes the modulation
    CHECK(s.t == doctest::Approx(0.05).epsilon(1e-12));
}

TEST_CASE("regularization mass drift follows the closed-form identity") {
    Grid g = Grid::corridor(16, 4);
    ImplicitOptions opt;
    opt.reg_weight = 1.0;
    ImplicitStepper st(g, kSym, opt);
    State s = smooth_state(g, 0.4, 0.02);
    const double tau = 0.01;
    for (int k = 0; k < 3; ++k) {
        const double mr0 = s.mass_r(g), mb0 = s.mass_b(g);
        st.step(s, tau);
        const double want_r = -tau * tau * opt.reg_weight * st.last_uh().sum() * g.cell_area();
        const double want_b = -tau * tau * opt.reg_weight * st.last_vh().sum() * g.cell_area();
        const double dr = s.mass_r(g) - mr0;
        const double db = s.mass_b(g) - mb0;
        CHECK(std::abs(dr - want_r) <= 1e-11 * std::max({std::abs(dr), std::abs(want_r), 1e-12}));
        CHECK(std::abs(db - want_b) <= 1e-11 * std::max({std::abs(db), std::abs(want_b), 1e-12}));
    }
}

TEST_CASE("backward and forward Euler twins contract quadratically in tau") {
    // both schemes integrate the same spatial operator, so their one-step gap
    // is O(tau^2) and halving tau must shrink it by roughly four (>= 3.5 with
    // slack for the nonlinearity)
    Grid g = Grid::corridor(16, 4);
    ImplicitOptions opt;
    opt.reg_weight = 1.0;
    auto gap = [&](double tau) {
        ImplicitStepper st(g, kSym, opt);
        State be = smooth_state(g, 0.4, 0.02);
        st.step(be, tau);
        State fe = smooth_state(g, 0.4, 0.02);
        auto [opr, opb] = st.apply_operator(fe, tau * opt.reg_weight);
        double worst = 0.0;
        for (std::size_t c = 0; c < fe.r.a.size(); ++c) {
            worst = std::max(worst, std::abs(be.r.a[c] - (fe.r.a[c] + tau * opr.a[c])));
            worst = std::max(worst, std::abs(be.b.a[c] - (fe.b.a[c] + tau * opb.a[c])));
        }
        return worst;
    };
    const double g1 = gap(4e-3), g2 = gap(2e-3);
    CAPTURE(g1);
    CAPTURE(g2);
    CHECK(g1 / g2 >= 3.5);
}
