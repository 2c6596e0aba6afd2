#include "laneform/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "laneform/common.hpp"

namespace laneform {

namespace {
inline int wrap(int i, int n) { return (i % n + n) % n; }
}  // namespace

EntropyBreakdown entropy_functional(const State& s, const Grid& g, const ModelParams& p) {
    if (s.r.nx != g.nx || s.r.ny != g.ny) throw ConfigError("state shape does not match grid");
    EntropyBreakdown e;
    const double dA = g.cell_area();
    for (int j = 0; j < g.ny; ++j) {
        const double* rr = s.r.row(j);
        const double* bb = s.b.row(j);
        for (int i = 0; i < g.nx; ++i) {
            const double r = rr[i], b = bb[i];
            const double vac = 1.0 - r - b;
            e.r_term += xlogx(r) - r;
            e.b_term += xlogx(b) - b;
            e.vacancy_term += 0.5 * (xlogx(vac) - vac);
            e.potential_term += (2.0 / p.h) * g.cx(i) * (b - r);
        }
    }
    e.r_term *= dA;
    e.b_term *= dA;
    e.vacancy_term *= dA;
    e.potential_term *= dA;
    e.total = e.r_term + e.b_term + e.vacancy_term + e.potential_term;
    return e;
}

DissipationPair dissipation(const State& s, const Grid& g, const ModelParams& p) {
    if (s.r.nx != g.nx || s.r.ny != g.ny) throw ConfigError("state shape does not match grid");
    const double c0 = 0.5 * p.h * std::min(0.5, p.gamma0);
    const double dA = g.cell_area();
    const int nx = g.nx, ny = g.ny;
    double acc0 = 0.0, acc1 = 0.0;
    auto face = [&](double rL, double bL, double rR, double bR, double dist) {
        const double qL = rL + bL, qR = rR + bR;
        const double vacf = 0.5 * ((1.0 - qL) + (1.0 - qR));
        const double dsr = (std::sqrt(rR) - std::sqrt(rL)) / dist;
        const double dsb = (std::sqrt(bR) - std::sqrt(bL)) / dist;
        const double dsv = (std::sqrt(1.0 - qR) - std::sqrt(1.0 - qL)) / dist;
        const double dq = (qR - qL) / dist;
        const double shared = dsv * dsv + dq * dq;
        const double species = dsr * dsr + dsb * dsb;
        acc0 += vacf * species + shared;
        acc1 += vacf * vacf * species + shared;
    };
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {  // x-face between i-1 (wrap) and i
            const int ic = wrap(i - 1, nx);
            face(s.r.at(ic, j), s.b.at(ic, j), s.r.at(i, j), s.b.at(i, j), g.dx());
        }
    }
    for (int jf = 1; jf < ny; ++jf) {
        for (int i = 0; i < nx; ++i) {
            face(s.r.at(i, jf - 1), s.b.at(i, jf - 1), s.r.at(i, jf), s.b.at(i, jf), g.dy());
        }
    }
    return DissipationPair{c0 * acc0 * dA, c0 * acc1 * dA};
}

GrowthCheck entropy_growth_check(const std::vector<double>& t, const std::vector<double>& E,
                                 const std::vector<double>& d1) {
    if (t.size() != E.size() || t.size() != d1.size() || t.size() < 3)
        throw ConfigError("growth check needs >= 3 aligned samples (t, E, D1)");
    GrowthCheck out;
    out.max_statistic = -std::numeric_limits<double>::infinity();
    out.dissipation_nonneg = true;
    for (std::size_t k = 1; k < t.size(); ++k) {
        const double dt = t[k] - t[k - 1];
        if (!(dt > 0.0)) throw ConfigError("growth check needs strictly increasing times");
        const double gk = (E[k] - E[k - 1]) / dt + 0.5 * (d1[k] + d1[k - 1]);
        if (!std::isfinite(gk)) {
            out.max_statistic = std::numeric_limits<double>::infinity();
            out.bounded = false;
            return out;
        }
        out.max_statistic = std::max(out.max_statistic, gk);
    }
    for (double d : d1) out.dissipation_nonneg = out.dissipation_nonneg && (d >= -1e-12);
    out.fitted_constant = std::max(0.0, out.max_statistic);

    std::vector<double> q;
    q.reserve(t.size() - 1);
    double maxabs = 0.0;
    for (std::size_t k = 1; k < t.size(); ++k) {
        q.push_back((E[k] - E[0]) / (t[k] - t[0]));
        maxabs = std::max(maxabs, std::abs(q.back()));
    }
    const std::size_t half = q.size() / 2;
    double sup1 = -std::numeric_limits<double>::infinity();
    double sup2 = sup1;
    for (std::size_t k = 0; k < q.size(); ++k) (k < half ? sup1 : sup2) = std::max(k < half ? sup1 : sup2, q[k]);
    const double margin = 0.1 * maxabs + 1e-12;
    out.bounded = (sup2 <= std::max(sup1, 0.0) + margin);
    return out;
}

LaneReport classify_lanes(const State& s, const Grid& g, const ModelParams& p,
                          double support_tol, double mono_tol) {
    if (s.r.nx != g.nx || s.r.ny != g.ny) throw ConfigError("state shape does not match grid");
    LaneReport rep;
    rep.red_down = (p.gamma1 >= p.gamma2);
    const int nx = g.nx, ny = g.ny;
    std::vector<double> dn(ny, 0.0), up(ny, 0.0);
    for (int j = 0; j < ny; ++j) {
        double sr = 0.0, sb = 0.0;
        const double* rr = s.r.row(j);
        const double* bb = s.b.row(j);
        for (int i = 0; i < nx; ++i) {
            sr += rr[i];
            sb += bb[i];
        }
        dn[j] = (rep.red_down ? sr : sb) / nx;
        up[j] = (rep.red_down ? sb : sr) / nx;
    }

    // strong: ordered disjoint supports
    int dn_max = -1, up_min = ny;
    bool dn_any = false, up_any = false;
    for (int j = 0; j < ny; ++j) {
        if (dn[j] > support_tol) {
            dn_max = j;
            dn_any = true;
        }
        if (up[j] > support_tol && !up_any) {
            up_min = j;
            up_any = true;
        }
    }
    const bool strong = dn_any && up_any && dn_max < up_min;

    // weak: monotone profiles with one significant crossing
    for (int j = 0; j + 1 < ny; ++j) {
        rep.mono_defect_down = std::max(rep.mono_defect_down, dn[j + 1] - dn[j]);
        rep.mono_defect_up = std::max(rep.mono_defect_up, up[j] - up[j + 1]);
    }
    double cross = std::numeric_limits<double>::quiet_NaN();
    int changes = 0;
    double prev = up[0] - dn[0];
    for (int j = 1; j < ny; ++j) {
        const double d = up[j] - dn[j];
        if ((prev < 0.0 && d >= 0.0) || (prev > 0.0 && d <= 0.0) ||
            (prev == 0.0 && d != 0.0)) {
            ++changes;
            if (changes == 1 && prev != d) {
                const double w = prev / (prev - d);
                cross = g.cy(j - 1) + w * (g.cy(j) - g.cy(j - 1));
            }
        }
        prev = d;
    }
    rep.sign_changes = changes;
    const bool separated = (up[0] - dn[0]) < -support_tol && (up[ny - 1] - dn[ny - 1]) > support_tol;
    const bool weak = rep.mono_defect_down <= mono_tol && rep.mono_defect_up <= mono_tol &&
                      changes == 1 && separated;

    if (strong) {
        rep.kind = LaneKind::Strong;
        rep.crossing_y = cross;
    } else if (weak) {
        rep.kind = LaneKind::Weak;
        rep.crossing_y = cross;
    } else {
        rep.kind = LaneKind::None;
        rep.crossing_y = std::numeric_limits<double>::quiet_NaN();
    }
    return rep;
}

const char* lane_kind_name(LaneKind k) {
    switch (k) {
        case LaneKind::None: return "none";
        case LaneKind::Weak: return "weak";
        case LaneKind::Strong: return "strong";
    }
    return "?";
}

StateDistance state_distance(const State& a, const State& b, const Grid& g) {
    if (a.r.nx != b.r.nx || a.r.ny != b.r.ny || a.r.nx != g.nx || a.r.ny != g.ny)
        throw ConfigError("state distance needs matching shapes");
    StateDistance d;
    double s2r = 0.0, s2b = 0.0;
    for (std::size_t c = 0; c < a.r.a.size(); ++c) {
        const double er = a.r.a[c] - b.r.a[c];
        const double eb = a.b.a[c] - b.b.a[c];
        s2r += er * er;
        s2b += eb * eb;
        d.sup_r = std::max(d.sup_r, std::abs(er));
        d.sup_b = std::max(d.sup_b, std::abs(eb));
    }
    d.l2_r = std::sqrt(s2r * g.cell_area());
    d.l2_b = std::sqrt(s2b * g.cell_area());
    return d;
}

}  // namespace laneform
