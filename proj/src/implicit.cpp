#include "laneform/implicit.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "laneform/common.hpp"

namespace laneform {

namespace {

inline int wrap(int i, int n) { return (i % n + n) % n; }

// Per-cell coefficient slabs for the gradient-flow form, in gauged variables.
struct Coeffs {
    Field2D g11, g13, g33;  // x-block of G
    Field2D g22, g24, g44;  // y-block of G
    Field2D hh1, hh3;       // gauged drift column
};

void clip_pair(double& r, double& b, double eps) {
    r = std::max(r, eps);
    b = std::max(b, eps);
    const double q = r + b;
    if (q > 1.0 - eps) {
        const double scale = (1.0 - eps) / q;
        r *= scale;
        b *= scale;
    }
}

// Gauged duals uh = log r - log(1-q)/2, vh = log b - log(1-q)/2 plus the G/H
// coefficients, all read off a clip_eps-narrowed copy of the state.
void cell_coeffs(const State& s, const ModelParams& p, double clip_eps, Coeffs& C, Field2D& uh,
                 Field2D& vh) {
    const int nx = s.r.nx, ny = s.r.ny;
    const double two_over_h = 2.0 / p.h;
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            double r = s.r.at(i, j), b = s.b.at(i, j);
            clip_pair(r, b, clip_eps);
            const double half_log_vac = 0.5 * std::log(1.0 - r - b);
            uh.at(i, j) = std::log(r) - half_log_vac;
            vh.at(i, j) = std::log(b) - half_log_vac;
            Mat4 G;
            Vec4 H;
            gradient_flow_coeffs(r, b, p, G, H);
            C.g11.at(i, j) = G.m[0][0];
            C.g13.at(i, j) = G.m[0][2];
            C.g33.at(i, j) = G.m[2][2];
            C.g22.at(i, j) = G.m[1][1];
            C.g24.at(i, j) = G.m[1][3];
            C.g44.at(i, j) = G.m[3][3];
            C.hh1.at(i, j) = H.v[0] - two_over_h * (G.m[0][0] - G.m[0][2]);
            C.hh3.at(i, j) = H.v[2] - two_over_h * (G.m[2][0] - G.m[2][2]);
        }
    }
}

// div(G grad(uh,vh) + Hh) + reg_coeff*(Lap - 1)(uh,vh), by face differencing
// with arithmetic-mean face coefficients. Periodic x, zero-flux y walls.
void compute_op(const Grid& g, const Coeffs& C, const Field2D& uh, const Field2D& vh,
                double reg_coeff, Field2D& opr, Field2D& opb) {
    const int nx = g.nx, ny = g.ny;
    const double dxi = 1.0 / g.dx(), dyi = 1.0 / g.dy();
    std::fill(opr.a.begin(), opr.a.end(), 0.0);
    std::fill(opb.a.begin(), opb.a.end(), 0.0);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {  // x-face i: between cells c=i-1 (wrap) and d=i
            const int ic = wrap(i - 1, nx);
            const double guu = 0.5 * (C.g11.at(ic, j) + C.g11.at(i, j));
            const double guv = 0.5 * (C.g13.at(ic, j) + C.g13.at(i, j));
            const double gvv = 0.5 * (C.g33.at(ic, j) + C.g33.at(i, j));
            const double du = (uh.at(i, j) - uh.at(ic, j)) * dxi;
            const double dv = (vh.at(i, j) - vh.at(ic, j)) * dxi;
            const double h1 = 0.5 * (C.hh1.at(ic, j) + C.hh1.at(i, j));
            const double h3 = 0.5 * (C.hh3.at(ic, j) + C.hh3.at(i, j));
            const double fr = guu * du + guv * dv + h1;
            const double fb = guv * du + gvv * dv + h3;
            // face i is the west face of cell d=i and the east face of cell c
            opr.at(i, j) -= fr * dxi;
            opr.at(ic, j) += fr * dxi;
            opb.at(i, j) -= fb * dxi;
            opb.at(ic, j) += fb * dxi;
        }
    }
    for (int jf = 1; jf < ny; ++jf) {
        for (int i = 0; i < nx; ++i) {  // y-face between cells (i,jf-1) and (i,jf)
            const int js = jf - 1, jn = jf;
            const double guu = 0.5 * (C.g22.at(i, js) + C.g22.at(i, jn));
            const double guv = 0.5 * (C.g24.at(i, js) + C.g24.at(i, jn));
            const double gvv = 0.5 * (C.g44.at(i, js) + C.g44.at(i, jn));
            const double du = (uh.at(i, jn) - uh.at(i, js)) * dyi;
            const double dv = (vh.at(i, jn) - vh.at(i, js)) * dyi;
            const double fr = guu * du + guv * dv;
            const double fb = guv * du + gvv * dv;
            opr.at(i, jn) -= fr * dyi;
            opr.at(i, js) += fr * dyi;
            opb.at(i, jn) -= fb * dyi;
            opb.at(i, js) += fb * dyi;
        }
    }
    if (reg_coeff != 0.0) {
        for (int j = 0; j < ny; ++j) {
            for (int i = 0; i < nx; ++i) {
                const int iw = wrap(i - 1, nx), ie = wrap(i + 1, nx);
                double lap_u = (uh.at(ie, j) - 2.0 * uh.at(i, j) + uh.at(iw, j)) * dxi * dxi;
                double lap_v = (vh.at(ie, j) - 2.0 * vh.at(i, j) + vh.at(iw, j)) * dxi * dxi;
                if (j > 0) {
                    lap_u += (uh.at(i, j - 1) - uh.at(i, j)) * dyi * dyi;
                    lap_v += (vh.at(i, j - 1) - vh.at(i, j)) * dyi * dyi;
                }
                if (j < ny - 1) {
                    lap_u += (uh.at(i, j + 1) - uh.at(i, j)) * dyi * dyi;
                    lap_v += (vh.at(i, j + 1) - vh.at(i, j)) * dyi * dyi;
                }
                opr.at(i, j) += reg_coeff * (lap_u - uh.at(i, j));
                opb.at(i, j) += reg_coeff * (lap_v - vh.at(i, j));
            }
        }
    }
}

}  // namespace

ImplicitStepper::ImplicitStepper(Grid grid, ModelParams params, ImplicitOptions opt)
    : grid_(grid), params_(params), opt_(opt) {
    grid_.validate();
    params_.validate();
    if (params_.gamma1 != params_.gamma2 || params_.alpha != 0.0)
        throw ConfigError("the implicit entropy scheme covers the symmetric reduced system "
                          "only (gamma1 == gamma2, alpha == 0)");
    if (!(opt_.fp_tol > 0.0) || opt_.fp_maxiter < 1 || opt_.reg_weight < 0.0)
        throw ConfigError("invalid implicit solver options");
    uh_ = Field2D(grid_.nx, grid_.ny);
    vh_ = Field2D(grid_.nx, grid_.ny);
}

std::pair<Field2D, Field2D> ImplicitStepper::apply_operator(const State& s,
                                                            double reg_coeff) const {
    if (s.r.nx != grid_.nx || s.r.ny != grid_.ny)
        throw ConfigError("state shape does not match the stepper grid");
    Coeffs C{Field2D(grid_.nx, grid_.ny), Field2D(grid_.nx, grid_.ny),
             Field2D(grid_.nx, grid_.ny), Field2D(grid_.nx, grid_.ny),
             Field2D(grid_.nx, grid_.ny), Field2D(grid_.nx, grid_.ny),
             Field2D(grid_.nx, grid_.ny), Field2D(grid_.nx, grid_.ny)};
    Field2D uh(grid_.nx, grid_.ny), vh(grid_.nx, grid_.ny);
    cell_coeffs(s, params_, opt_.clip_eps, C, uh, vh);
    Field2D opr(grid_.nx, grid_.ny), opb(grid_.nx, grid_.ny);
    compute_op(grid_, C, uh, vh, reg_coeff, opr, opb);
    return {std::move(opr), std::move(opb)};
}

int ImplicitStepper::step(State& s, double tau) {
    if (s.r.nx != grid_.nx || s.r.ny != grid_.ny)
        throw ConfigError("state shape does not match the stepper grid");
    if (!(tau > 0.0) || !std::isfinite(tau))
        throw NumericError("implicit step size must be finite and > 0");
    const int nx = grid_.nx, ny = grid_.ny;
    const std::size_t N = grid_.cells();
    const double dxi = 1.0 / grid_.dx(), dyi = 1.0 / grid_.dy();
    const double wreg = tau * opt_.reg_weight;
    const double reg_coeff = wreg;  // coefficient of (Lap-1) in the operator

    const Field2D rprev = s.r, bprev = s.b;
    State cur = s;  // Newton iterate in primal form

    Coeffs C{Field2D(nx, ny), Field2D(nx, ny), Field2D(nx, ny), Field2D(nx, ny),
             Field2D(nx, ny), Field2D(nx, ny), Field2D(nx, ny), Field2D(nx, ny)};
    Field2D uh(nx, ny), vh(nx, ny), opr(nx, ny), opb(nx, ny);

    auto residual = [&](const State& st, Field2D& uh_out, Field2D& vh_out,
                        Eigen::VectorXd& F) -> double {
        cell_coeffs(st, params_, opt_.clip_eps, C, uh_out, vh_out);
        compute_op(grid_, C, uh_out, vh_out, reg_coeff, opr, opb);
        double norm = 0.0;
        for (std::size_t c = 0; c < N; ++c) {
            const double fr = (st.r.a[c] - rprev.a[c]) / tau - opr.a[c];
            const double fb = (st.b.a[c] - bprev.a[c]) / tau - opb.a[c];
            F[static_cast<Eigen::Index>(c)] = fr;
            F[static_cast<Eigen::Index>(N + c)] = fb;
            norm = std::max({norm, std::abs(fr), std::abs(fb)});
        }
        return norm;
    };

    Eigen::VectorXd F(2 * N), Fnew(2 * N), delta;
    double fnorm = residual(cur, uh, vh, F);

    auto cell_index = [nx](int i, int j) { return static_cast<long>(j) * nx + i; };

    int iter = 0;
    bool converged = false;
    for (; iter < opt_.fp_maxiter; ++iter) {
        if (fnorm == 0.0) {  // exact solution (e.g. flat state, no regularization)
            converged = true;
            break;
        }

        // Assemble the SPD quasi-Newton matrix
        //   J = (1/tau) ds/d(uh,vh) + K_G + wreg*(I + K_Lap)
        // with K_* the positive-form stiffness of the face coefficients.
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(22 * N);
        for (int j = 0; j < ny; ++j) {
            for (int i = 0; i < nx; ++i) {
                double r = cur.r.at(i, j), b = cur.b.at(i, j);
                clip_pair(r, b, opt_.clip_eps);
                const double k = 0.5 / (1.0 - r - b);
                const double err = 1.0 / r + k, ebb = 1.0 / b + k;
                const double det = err * ebb - k * k;
                const double dru = ebb / det, drv = -k / det, dbv = err / det;
                const long cu = cell_index(i, j), cv = static_cast<long>(N) + cu;
                trip.emplace_back(cu, cu, dru / tau + wreg);
                trip.emplace_back(cu, cv, drv / tau);
                trip.emplace_back(cv, cu, drv / tau);
                trip.emplace_back(cv, cv, dbv / tau + wreg);
            }
        }
        auto add_face = [&](long cu, long du, long cv, long dv, double guu, double guv,
                            double gvv) {
            trip.emplace_back(cu, cu, guu);
            trip.emplace_back(du, du, guu);
            trip.emplace_back(cu, du, -guu);
            trip.emplace_back(du, cu, -guu);
            trip.emplace_back(cv, cv, gvv);
            trip.emplace_back(dv, dv, gvv);
            trip.emplace_back(cv, dv, -gvv);
            trip.emplace_back(dv, cv, -gvv);
            if (guv != 0.0) {
                trip.emplace_back(cu, cv, guv);
                trip.emplace_back(cv, cu, guv);
                trip.emplace_back(du, dv, guv);
                trip.emplace_back(dv, du, guv);
                trip.emplace_back(cu, dv, -guv);
                trip.emplace_back(dv, cu, -guv);
                trip.emplace_back(du, cv, -guv);
                trip.emplace_back(cv, du, -guv);
            }
        };
        for (int j = 0; j < ny; ++j) {
            for (int i = 0; i < nx; ++i) {
                const int ic = wrap(i - 1, nx);
                const long cu = cell_index(ic, j), du = cell_index(i, j);
                const double s2 = dxi * dxi;
                add_face(cu, du, static_cast<long>(N) + cu, static_cast<long>(N) + du,
                         (0.5 * (C.g11.at(ic, j) + C.g11.at(i, j)) + wreg) * s2,
                         0.5 * (C.g13.at(ic, j) + C.g13.at(i, j)) * s2,
                         (0.5 * (C.g33.at(ic, j) + C.g33.at(i, j)) + wreg) * s2);
            }
        }
        for (int jf = 1; jf < ny; ++jf) {
            for (int i = 0; i < nx; ++i) {
                const long cu = cell_index(i, jf - 1), du = cell_index(i, jf);
                const double s2 = dyi * dyi;
                add_face(cu, du, static_cast<long>(N) + cu, static_cast<long>(N) + du,
                         (0.5 * (C.g22.at(i, jf - 1) + C.g22.at(i, jf)) + wreg) * s2,
                         0.5 * (C.g24.at(i, jf - 1) + C.g24.at(i, jf)) * s2,
                         (0.5 * (C.g44.at(i, jf - 1) + C.g44.at(i, jf)) + wreg) * s2);
            }
        }
        Eigen::SparseMatrix<double> J(2 * static_cast<long>(N), 2 * static_cast<long>(N));
        J.setFromTriplets(trip.begin(), trip.end());
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
        solver.compute(J);
        if (solver.info() != Eigen::Success)
            throw NumericError("implicit step: sparse factorization failed");
        delta = solver.solve(-F);

        // Damped update in the gauged duals, backtracking on the residual norm.
        double lam = 1.0;
        State trial(nx, ny);
        trial.t = cur.t;
        double fnew = 0.0;
        Field2D uh_t(nx, ny), vh_t(nx, ny);
        double change = 0.0;
        for (int halving = 0;; ++halving) {
            change = 0.0;
            for (std::size_t c = 0; c < N; ++c) {
                const double ut = uh.a[c] + lam * delta[static_cast<Eigen::Index>(c)];
                const double vt = vh.a[c] + lam * delta[static_cast<Eigen::Index>(N + c)];
                double r, b;
                primal_from_dual(ut, vt, 0.0, params_, r, b);
                change = std::max({change, std::abs(r - cur.r.a[c]), std::abs(b - cur.b.a[c])});
                trial.r.a[c] = r;
                trial.b.a[c] = b;
            }
            fnew = residual(trial, uh_t, vh_t, Fnew);
            if (fnew <= fnorm || halving >= 10 || change <= opt_.fp_tol) break;
            lam *= 0.5;
        }
        cur.r = trial.r;
        cur.b = trial.b;
        uh = uh_t;
        vh = vh_t;
        F = Fnew;
        fnorm = fnew;
        if (change <= opt_.fp_tol) {
            converged = true;
            ++iter;
            break;
        }
    }
    if (!converged) {
        std::ostringstream oss;
        oss << "implicit step did not converge in " << opt_.fp_maxiter
            << " iterations (residual " << fmt17(fnorm) << ")";
        throw NumericError(oss.str());
    }

    s.r = cur.r;
    s.b = cur.b;
    s.t += tau;
    uh_ = uh;
    vh_ = vh;
    return iter;
}

}  // namespace laneform
