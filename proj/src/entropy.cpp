#include "laneform/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "laneform/common.hpp"

namespace laneform {

namespace {

// Clip (r,b) into the open box with margin eps: floors on both species, then a
// proportional squeeze if the vacancy falls below eps.
inline void clip_inward(double& r, double& b, double eps) {
    r = std::max(r, eps);
    b = std::max(b, eps);
    const double q = r + b;
    if (q > 1.0 - eps) {
        const double scale = (1.0 - eps) / q;
        r *= scale;
        b *= scale;
    }
}

}  // namespace

void dual_from_primal(double r, double b, double x, const ModelParams& p, double& u, double& v) {
    const double half_log_vac = 0.5 * std::log(1.0 - r - b);
    const double pot = 2.0 * x / p.h;
    u = std::log(r) - half_log_vac - pot;
    v = std::log(b) - half_log_vac + pot;
}

void primal_from_dual(double u, double v, double x, const ModelParams& p, double& r, double& b) {
    // r = e^{u + 2x/h} s, b = e^{v - 2x/h} s with s = sqrt(1-q) solving
    // s^2 + (Er+Eb)s - 1 = 0. Shift all exponents by m <= 0 so nothing can
    // overflow; the common denominator is then >= 2.
    const double pot = 2.0 * x / p.h;
    const double eu = u + pot;
    const double ev = v - pot;
    const double m = std::max({eu, ev, 0.0});
    const double a = std::exp(eu - m);
    const double c = std::exp(ev - m);
    const double t = std::exp(-m);
    const double sum = a + c;
    const double denom = sum + std::sqrt(sum * sum + 4.0 * (t * t));
    r = std::max(2.0 * a / denom, 1e-300);
    b = std::max(2.0 * c / denom, 1e-300);
}

EntropyState primal_to_entropy(const State& s, const Grid& g, const ModelParams& p,
                               double clip_eps) {
    if (s.r.nx != g.nx || s.r.ny != g.ny)
        throw ConfigError("state shape does not match the grid");
    s.check_box(clip_eps, "entropy transform");
    EntropyState e;
    e.grid = g;
    e.t = s.t;
    e.u = Field2D(g.nx, g.ny);
    e.v = Field2D(g.nx, g.ny);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            double r = s.r.at(i, j), b = s.b.at(i, j);
            clip_inward(r, b, clip_eps);
            dual_from_primal(r, b, g.cx(i), p, e.u.at(i, j), e.v.at(i, j));
        }
    }
    return e;
}

State entropy_to_primal(const EntropyState& e, const ModelParams& p) {
    State s(e.grid.nx, e.grid.ny);
    s.t = e.t;
    for (int j = 0; j < e.grid.ny; ++j) {
        for (int i = 0; i < e.grid.nx; ++i) {
            primal_from_dual(e.u.at(i, j), e.v.at(i, j), e.grid.cx(i), p, s.r.at(i, j),
                             s.b.at(i, j));
        }
    }
    return s;
}

Mat4 mobility_matrix(double r, double b, const ModelParams& p) {
    const double vac = 1.0 - r - b;
    const double g = p.gamma1;  // symmetric lateral strength
    Mat4 M;
    M.m[0][0] = vac * r;
    M.m[1][1] = 2.0 * p.gamma0 * vac * r + 2.0 * g * vac * r * b;
    M.m[1][3] = 2.0 * g * vac * r * b;
    M.m[2][2] = vac * b;
    M.m[3][1] = 2.0 * g * vac * r * b;
    M.m[3][3] = 2.0 * p.gamma0 * vac * b + 2.0 * g * vac * r * b;
    return M;
}

void gradient_flow_coeffs(double r, double b, const ModelParams& p, Mat4& G, Vec4& H) {
    const double q = r + b;
    const double vac = 1.0 - q;
    const double den = 2.0 - q;  // always >= 1 on the box
    const double g = p.gamma1;
    const double h2 = 0.5 * p.h;
    G = Mat4{};
    H = Vec4{};
    // x-block (rows/cols 0 and 2): eliminate dq/dx through the dual variables;
    // the potential part of that elimination is what feeds H.
    G.m[0][0] = h2 * vac * r * (1.0 + r / den);
    G.m[0][2] = h2 * vac * r * b / den;
    G.m[2][0] = G.m[0][2];
    G.m[2][2] = h2 * vac * b * (1.0 + b / den);
    // y-block (rows/cols 1 and 3)
    G.m[1][1] = h2 * 2.0 * vac * r * (p.gamma0 * (2.0 - b) / den + g * b);
    G.m[1][3] = h2 * 2.0 * vac * r * b * (p.gamma0 / den + g);
    G.m[3][1] = G.m[1][3];
    G.m[3][3] = h2 * 2.0 * vac * b * (p.gamma0 * (2.0 - r) / den + g * r);
    H.v[0] = vac * r * (r - b) / den;
    H.v[2] = vac * b * (r - b) / den;
}

}  // namespace laneform
