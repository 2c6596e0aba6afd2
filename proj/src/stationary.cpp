#include "laneform/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "laneform/common.hpp"

namespace laneform {

namespace {

constexpr double kBoxFloor = 1e-12;  // admissibility margin during integration

bool admissible(double r, double b) {
    return r > kBoxFloor && b > kBoxFloor && (r + b) < 1.0 - kBoxFloor && std::isfinite(r) &&
           std::isfinite(b);
}

// One RK4 step of the stationary ODE; returns false (leaving r,b untouched)
// when any stage leaves the box or the system degenerates.
bool rk4_step(double& r, double& b, double step, const ModelParams& p) {
    try {
        const StatDeriv k1 = stationary_rhs(r, b, p);
        const double r2 = r + 0.5 * step * k1.dr, b2 = b + 0.5 * step * k1.db;
        if (!admissible(r2, b2)) return false;
        const StatDeriv k2 = stationary_rhs(r2, b2, p);
        const double r3 = r + 0.5 * step * k2.dr, b3 = b + 0.5 * step * k2.db;
        if (!admissible(r3, b3)) return false;
        const StatDeriv k3 = stationary_rhs(r3, b3, p);
        const double r4 = r + step * k3.dr, b4 = b + step * k3.db;
        if (!admissible(r4, b4)) return false;
        const StatDeriv k4 = stationary_rhs(r4, b4, p);
        const double rn = r + (step / 6.0) * (k1.dr + 2.0 * k2.dr + 2.0 * k3.dr + k4.dr);
        const double bn = b + (step / 6.0) * (k1.db + 2.0 * k2.db + 2.0 * k3.db + k4.db);
        if (!admissible(rn, bn)) return false;
        r = rn;
        b = bn;
        return true;
    } catch (const NumericError&) {
        return false;
    }
}

// Trapezoid masses of a uniformly sampled profile.
void line_masses(const Profile& prof, double& mr, double& mb) {
    mr = mb = 0.0;
    const auto& P = prof.pts;
    if (P.size() < 2) return;
    for (std::size_t k = 0; k + 1 < P.size(); ++k) {
        const double w = std::abs(P[k + 1].y - P[k].y) * 0.5;
        mr += w * (P[k].r + P[k + 1].r);
        mb += w * (P[k].b + P[k + 1].b);
    }
}

}  // namespace

double curve_constant(double r, double b, const ModelParams& p) {
    const double q = r + b;
    if (!(q < 1.0)) throw NumericError("curve constant undefined at q >= 1");
    return ((p.gamma1 + p.gamma2) * r * b + p.gamma0 * q) / (1.0 - q);
}

double curve_b(double r, double c, const ModelParams& p) {
    return (c - (c + p.gamma0) * r) / ((p.gamma1 + p.gamma2) * r + c + p.gamma0);
}

double curve_midpoint(double c, const ModelParams& p) {
    // 2g m^2 + 2(g0+c) m - c = 0 with g = (gamma1+gamma2)/2, in the
    // subtraction-free form that survives g -> 0.
    const double g = 0.5 * (p.gamma1 + p.gamma2);
    const double a = p.gamma0 + c;
    return c / (a + std::sqrt(a * a + 2.0 * g * c));
}

StatDeriv stationary_rhs(double r, double b, const ModelParams& p) {
    const double q = r + b;
    const double vac = 1.0 - q;
    const double g = 0.5 * (p.gamma1 + p.gamma2);
    const double a11 = (1.0 - b) * (g * b + p.gamma0);
    const double a12 = r * (g * (1.0 - r) + p.gamma0);
    const double a21 = b * (g * (1.0 - b) + p.gamma0);
    const double a22 = (1.0 - r) * (g * r + p.gamma0);
    const double det = a11 * a22 - a12 * a21;
    const double scale = std::max({std::abs(a11 * a22), std::abs(a12 * a21),
                                   std::numeric_limits<double>::min()});
    if (!(std::abs(det) > 1e-13 * scale)) {
        std::ostringstream oss;
        oss << "stationary system degenerates at (r,b) = (" << fmt17(r) << "," << fmt17(b)
            << ")";
        throw NumericError(oss.str());
    }
    const double f = vac * r * b;
    // Cramer on A (r',b')^T = f (-1, +1)^T
    return StatDeriv{f * (-a22 - a12) / det, f * (a11 + a21) / det};
}

Profile integrate_profile(double r0, double b0, double y0, double y1, double dy,
                          const ModelParams& p) {
    if (!(dy > 0.0)) throw ConfigError("integration step dy must be > 0");
    Profile prof;
    if (!admissible(r0, b0)) {
        prof.truncated = true;
        return prof;
    }
    prof.c0 = curve_constant(r0, b0, p);
    const double span = y1 - y0;
    const long long n = std::max(1LL, static_cast<long long>(std::llround(std::abs(span) / dy)));
    const double step = span / static_cast<double>(n);

    double r = r0, b = b0;
    prof.pts.push_back({y0, r, b});
    for (long long k = 0; k < n; ++k) {
        if (!rk4_step(r, b, step, p)) {
            prof.truncated = true;
            break;
        }
        const double y = y0 + (k + 1) * step;
        prof.pts.push_back({y, r, b});
        prof.max_c_drift =
            std::max(prof.max_c_drift, std::abs(curve_constant(r, b, p) - prof.c0));
    }
    return prof;
}

namespace {

// Continue a truncated profile to the wall with its last values held flat.
// Both components of the stationary right-hand side carry the common factor
// (1-q) r b, so once a species reaches the admissibility floor the flow is
// frozen to within that floor and the flat tail is the correct completion.
// The padded points do not enter max_c_drift (they are not integration
// output); the truncated flag is kept so strict-monotonicity consumers can
// recognize the plateau.
void pad_to_wall(Profile& prof, double wall, double dy) {
    if (prof.pts.empty()) return;
    const ProfilePoint last = prof.pts.back();
    const double span = wall - last.y;
    const double step = span >= 0.0 ? dy : -dy;
    const long long n = static_cast<long long>(std::llround(std::abs(span) / dy));
    for (long long k = 1; k <= n; ++k)
        prof.pts.push_back({last.y + k * step, last.r, last.b});
    if (n >= 1) prof.pts.back().y = wall;
}

// Profile through the symmetric seed r=b=m at mid-height, assembled ascending.
Profile profile_from_midpoint(double m, double y_lo, double y_hi, double dy,
                              const ModelParams& p) {
    const double mid = 0.5 * (y_lo + y_hi);
    Profile up = integrate_profile(m, m, mid, y_hi, dy, p);
    Profile dn = integrate_profile(m, m, mid, y_lo, dy, p);
    if (up.truncated) pad_to_wall(up, y_hi, dy);
    if (dn.truncated) pad_to_wall(dn, y_lo, dy);
    Profile full;
    full.c0 = up.c0;
    full.truncated = up.truncated || dn.truncated;
    full.max_c_drift = std::max(up.max_c_drift, dn.max_c_drift);
    full.pts.reserve(dn.pts.size() + up.pts.size());
    for (auto it = dn.pts.rbegin(); it != dn.pts.rend(); ++it) full.pts.push_back(*it);
    for (std::size_t k = 1; k < up.pts.size(); ++k) full.pts.push_back(up.pts[k]);
    return full;
}

double crossing_height(const Profile& prof) {
    for (std::size_t k = 0; k + 1 < prof.pts.size(); ++k) {
        const double d0 = prof.pts[k].b - prof.pts[k].r;
        const double d1 = prof.pts[k + 1].b - prof.pts[k + 1].r;
        if (d0 == 0.0) return prof.pts[k].y;
        if ((d0 < 0.0 && d1 >= 0.0) || (d0 > 0.0 && d1 <= 0.0)) {
            const double w = d0 / (d0 - d1);
            return prof.pts[k].y + w * (prof.pts[k + 1].y - prof.pts[k].y);
        }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

MatchedProfile match_masses(double mass_r, double mass_b, double y_lo, double y_hi, double dy,
                            const ModelParams& p) {
    p.validate();
    if (!(y_hi > y_lo)) throw ConfigError("mass matching needs y_hi > y_lo");
    if (!(mass_r > 0.0) || !(mass_b > 0.0))
        throw ConfigError("mass matching needs positive target masses");
    const double span = y_hi - y_lo;
    if (mass_r + mass_b >= span * (1.0 - 1e-9))
        throw NumericError("target masses exceed the admissible strip capacity");

    MatchedProfile out;
    const double rel_equal = 1e-14 * (mass_r + mass_b);

    if (std::abs(mass_r - mass_b) <= rel_equal) {
        // Symmetric branch: bisect the midpoint value. With flat-tail
        // completion the achieved mass is monotone in the seed, from ~0 at
        // the floor up to m * span as m -> 1/2.
        auto eval = [&](double m, Profile& prof) {
            prof = profile_from_midpoint(m, y_lo, y_hi, dy, p);
            double mr, mb;
            line_masses(prof, mr, mb);
            return mr - mass_r;
        };
        double lo = 2e-12, hi = 0.5 - 1e-9;
        Profile prof;
        double flo = eval(lo, prof);
        if (flo > 0.0) throw NumericError("target masses below the achievable range");
        double fhi = eval(hi, prof);
        if (fhi < 0.0) throw NumericError("target masses exceed the achievable range");
        int it = 0;
        for (; it < 200 && (hi - lo) > 1e-16; ++it) {
            const double m = 0.5 * (lo + hi);
            const double f = eval(m, prof);
            if (f < 0.0)
                lo = m;
            else
                hi = m;
        }
        const double m = 0.5 * (lo + hi);
        out.profile = profile_from_midpoint(m, y_lo, y_hi, dy, p);
        out.inner_iters = it;
        out.c = curve_constant(m, m, p);
    } else {
        // Asymmetric branch: outer bisection on the level C (total mass),
        // inner bisection on the seed r0 along the curve (mass difference).
        const double target_sum = mass_r + mass_b;
        const double target_diff = mass_r - mass_b;
        int inner_total = 0;

        struct InnerResult {
            bool valid = false;
            double r0 = 0.0, sum = 0.0;
            Profile prof;
        };
        auto solve_inner = [&](double c) {
            InnerResult res;
            const double rmax = c / (c + p.gamma0);
            const double lo_r = 1e-10, hi_r = rmax * (1.0 - 1e-10);
            if (!(hi_r > lo_r)) return res;
            auto diff_at = [&](double r0, Profile& prof, double& sum) {
                const double b0 = curve_b(r0, c, p);
                prof = integrate_profile(r0, b0, y_lo, y_hi, dy, p);
                if (prof.truncated) pad_to_wall(prof, y_hi, dy);
                if (prof.pts.size() < 2) return std::numeric_limits<double>::quiet_NaN();
                double mr, mb;
                line_masses(prof, mr, mb);
                sum = mr + mb;
                return (mr - mb) - target_diff;
            };
            // Scan for a valid sign-change bracket.
            const int K = 33;
            double prev_r = 0.0, prev_f = std::numeric_limits<double>::quiet_NaN();
            double blo = 0.0, bhi = 0.0;
            bool have = false;
            for (int k = 0; k < K; ++k) {
                const double r0 = lo_r + (hi_r - lo_r) * k / (K - 1.0);
                Profile prof;
                double sum = 0.0;
                const double f = diff_at(r0, prof, sum);
                if (std::isnan(f)) continue;
                if (!std::isnan(prev_f) && ((prev_f <= 0.0 && f >= 0.0) ||
                                            (prev_f >= 0.0 && f <= 0.0))) {
                    blo = prev_r;
                    bhi = r0;
                    have = (prev_f <= 0.0);
                    // orient bracket so f(blo) <= 0 <= f(bhi)
                    if (!have) std::swap(blo, bhi);
                    have = true;
                    break;
                }
                prev_r = r0;
                prev_f = f;
            }
            if (!have) return res;
            double lo = blo, hi = bhi;
            Profile prof;
            double sum = 0.0;
            for (int it = 0; it < 100 && std::abs(hi - lo) > 1e-16; ++it) {
                ++inner_total;
                const double r0 = 0.5 * (lo + hi);
                const double f = diff_at(r0, prof, sum);
                if (std::isnan(f)) {
                    // shrink toward the valid side conservatively
                    hi = r0;
                    continue;
                }
                if (f < 0.0)
                    lo = r0;
                else
                    hi = r0;
            }
            res.r0 = 0.5 * (lo + hi);
            const double f = diff_at(res.r0, res.prof, res.sum);
            res.valid = !std::isnan(f);
            return res;
        };

        // Bracket the level by scanning a log grid.
        double clo = 0.0, chi = 0.0;
        InnerResult rlo, rhi;
        bool have = false;
        double prev_c = 0.0;
        InnerResult prev;
        for (int k = 0; k <= 36; ++k) {
            const double c = 1e-6 * std::pow(10.0, k * 0.25);  // 1e-6 .. 1e3
            InnerResult cur = solve_inner(c);
            if (!cur.valid) continue;
            if (prev.valid && prev.sum <= target_sum && cur.sum >= target_sum) {
                clo = prev_c;
                chi = c;
                rlo = prev;
                rhi = cur;
                have = true;
                break;
            }
            prev = cur;
            prev_c = c;
        }
        if (!have)
            throw NumericError("mass matching failed: no level brackets the target masses");
        int it = 0;
        InnerResult best;
        for (; it < 100 && (chi - clo) > 1e-15 * chi; ++it) {
            const double c = 0.5 * (clo + chi);
            InnerResult cur = solve_inner(c);
            if (!cur.valid) {
                chi = c;  // retreat toward the last valid low side
                continue;
            }
            if (cur.sum < target_sum)
                clo = c;
            else
                chi = c;
            best = cur;
        }
        if (!best.valid) best = solve_inner(0.5 * (clo + chi));
        if (!best.valid) throw NumericError("mass matching failed to converge");
        out.profile = best.prof;
        out.c = 0.5 * (clo + chi);
        out.outer_iters = it;
        out.inner_iters = inner_total;
    }

    line_masses(out.profile, out.mass_r, out.mass_b);
    out.crossing_y = crossing_height(out.profile);
    return out;
}

std::vector<PhaseCurve> sweep_curves(const std::vector<double>& levels, double dy,
                                     const ModelParams& p, double axis_floor,
                                     std::size_t max_points) {
    p.validate();
    if (!(dy > 0.0)) throw ConfigError("integration step dy must be > 0");
    std::vector<PhaseCurve> out;
    out.reserve(levels.size());
    const long long budget = 2'000'000;  // steps per direction

    for (const double c : levels) {
        PhaseCurve curve;
        curve.c = c;
        if (!(c > 0.0)) {
            out.push_back(std::move(curve));
            continue;
        }
        const double m = curve_midpoint(c, p);
        if (!admissible(m, m)) {
            curve.truncated = true;
            out.push_back(std::move(curve));
            continue;
        }
        // March one direction until a species hits the floor; by the swap
        // symmetry of the system the other branch is the reflection, but both
        // are integrated to expose any asymmetry as a C defect.
        auto march = [&](double dir) {
            std::vector<PhasePoint> pts;
            double r = m, b = m;
            pts.push_back({r, b});
            for (long long k = 0; k < budget; ++k) {
                if (!rk4_step(r, b, dir * dy, p)) {
                    curve.truncated = true;
                    break;
                }
                pts.push_back({r, b});
                curve.max_c_defect =
                    std::max(curve.max_c_defect, std::abs(curve_constant(r, b, p) - c));
                if (r <= axis_floor || b <= axis_floor) break;
            }
            return pts;
        };
        std::vector<PhasePoint> down = march(-1.0);  // r grows, b shrinks
        std::vector<PhasePoint> up = march(+1.0);    // b grows, r shrinks
        curve.pts.reserve(down.size() + up.size());
        for (auto it = down.rbegin(); it != down.rend(); ++it) curve.pts.push_back(*it);
        for (std::size_t k = 1; k < up.size(); ++k) curve.pts.push_back(up[k]);
        if (curve.pts.size() > max_points) {
            const std::size_t stride = (curve.pts.size() + max_points - 1) / max_points;
            std::vector<PhasePoint> thin;
            thin.reserve(curve.pts.size() / stride + 2);
            for (std::size_t k = 0; k < curve.pts.size(); k += stride) thin.push_back(curve.pts[k]);
            if ((curve.pts.size() - 1) % stride != 0) thin.push_back(curve.pts.back());
            curve.pts = std::move(thin);
        }
        out.push_back(std::move(curve));
    }
    return out;
}

}  // namespace laneform
