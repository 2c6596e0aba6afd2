#include "laneform/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace laneform {

void Grid::validate() const {
    std::ostringstream oss;
    bool ok = true;
    if (!(nx >= 1 && ny >= 1)) {
        oss << "grid must have nx, ny >= 1 (got " << nx << " x " << ny << ")";
        ok = false;
    } else if (!(wx > 0.0) || !(wy > 0.0) || !std::isfinite(wx) || !std::isfinite(wy) ||
               !std::isfinite(x0) || !std::isfinite(y0)) {
        oss << "grid extents must be finite and positive (wx=" << fmt17(wx)
            << ", wy=" << fmt17(wy) << ")";
        ok = false;
    }
    if (!ok) throw ConfigError(oss.str());
}

double Field2D::sum() const {
    // Pairwise-ish compensated sum keeps mass-conservation checks meaningful
    // on long runs without pulling in extended precision.
    double s = 0.0, c = 0.0;
    for (double x : a) {
        double y = x - c;
        double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    return s;
}

double Field2D::min() const {
    return a.empty() ? 0.0 : *std::min_element(a.begin(), a.end());
}

double Field2D::max() const {
    return a.empty() ? 0.0 : *std::max_element(a.begin(), a.end());
}

void State::check_box(double tol, const std::string& context) const {
    double worst = 0.0;
    int wi = -1, wj = -1;
    const char* what = "";
    for (int j = 0; j < r.ny; ++j) {
        const double* rr = r.row(j);
        const double* bb = b.row(j);
        for (int i = 0; i < r.nx; ++i) {
            const double rv = rr[i], bv = bb[i];
            double d;
            d = -rv;
            if (d > worst) { worst = d; wi = i; wj = j; what = "r < 0"; }
            d = -bv;
            if (d > worst) { worst = d; wi = i; wj = j; what = "b < 0"; }
            d = rv + bv - 1.0;
            if (d > worst) { worst = d; wi = i; wj = j; what = "r+b > 1"; }
            if (!std::isfinite(rv) || !std::isfinite(bv)) {
                std::ostringstream oss;
                oss << context << ": non-finite density at cell (" << i << "," << j << ")";
                throw NumericError(oss.str());
            }
        }
    }
    if (worst > tol) {
        std::ostringstream oss;
        oss << context << ": admissibility violated at cell (" << wi << "," << wj << "): " << what
            << " by " << fmt17(worst) << " (tol " << fmt17(tol) << ")";
        throw NumericError(oss.str());
    }
}

State mirror_swap_x(const State& s) {
    State out(s.r.nx, s.r.ny);
    out.t = s.t;
    const int nx = s.r.nx, ny = s.r.ny;
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            out.r.at(i, j) = s.b.at(nx - 1 - i, j);
            out.b.at(i, j) = s.r.at(nx - 1 - i, j);
        }
    }
    return out;
}

}  // namespace laneform
