#pragma once
// Cell-centered rectangular grid and the two-species density fields living on it.
//
// Boundary policy is fixed for the whole code base: periodic in x, no-flux walls
// in y. Cell centers sit at (x0 + (i+1/2)dx, y0 + (j+1/2)dy); the same layout is
// used for lattice probabilities, so micro and macro states compare cell-by-cell.

#include <cstddef>
#include <string>
#include <vector>

#include "laneform/common.hpp"

namespace laneform {

struct Grid {
    double x0 = 0.0, y0 = 0.0;   // lower-left corner
    double wx = 1.0, wy = 0.1;   // extents
    int nx = 100, ny = 10;

    static Grid corridor(int nx, int ny) { return Grid{0.0, 0.0, 1.0, 0.1, nx, ny}; }
    // Centered convention: [-lx, lx] x [-ly, ly].
    static Grid centered(double lx, double ly, int nx, int ny) {
        return Grid{-lx, -ly, 2.0 * lx, 2.0 * ly, nx, ny};
    }

    double dx() const { return wx / nx; }
    double dy() const { return wy / ny; }
    double cell_area() const { return dx() * dy(); }
    double area() const { return wx * wy; }
    double cx(int i) const { return x0 + (i + 0.5) * dx(); }
    double cy(int j) const { return y0 + (j + 0.5) * dy(); }
    std::size_t cells() const { return static_cast<std::size_t>(nx) * ny; }

    void validate() const;
    bool same_shape(const Grid& o) const {
        return nx == o.nx && ny == o.ny && x0 == o.x0 && y0 == o.y0 && wx == o.wx && wy == o.wy;
    }
};

// Row-major scalar field: index (i,j) -> j*nx + i.
struct Field2D {
    int nx = 0, ny = 0;
    std::vector<double> a;

    Field2D() = default;
    Field2D(int nx_, int ny_, double fill = 0.0)
        : nx(nx_), ny(ny_), a(static_cast<std::size_t>(nx_) * ny_, fill) {}

    double& at(int i, int j) { return a[static_cast<std::size_t>(j) * nx + i]; }
    double at(int i, int j) const { return a[static_cast<std::size_t>(j) * nx + i]; }
    double* row(int j) { return a.data() + static_cast<std::size_t>(j) * nx; }
    const double* row(int j) const { return a.data() + static_cast<std::size_t>(j) * nx; }
    std::size_t size() const { return a.size(); }

    double sum() const;
    double min() const;
    double max() const;
};

// Primal state: red/blue densities (or occupation probabilities) plus time.
struct State {
    Field2D r, b;
    double t = 0.0;

    State() = default;
    State(int nx, int ny) : r(nx, ny), b(nx, ny) {}

    // Verifies 0 <= r, b and r+b <= 1 cellwise within tol; throws NumericError
    // naming the worst offending cell otherwise.
    void check_box(double tol, const std::string& context) const;

    double mass_r(const Grid& g) const { return r.sum() * g.cell_area(); }
    double mass_b(const Grid& g) const { return b.sum() * g.cell_area(); }
};

// Entropy-variable state; u,v are only meaningful relative to a grid (they carry
// the +-2x/h potentials), so the owning grid is kept alongside.
struct EntropyState {
    Field2D u, v;
    Grid grid;
    double t = 0.0;
};

// Mirror x (i -> nx-1-i) and swap species; the discrete counterpart of
// r(x,y) <-> b(x_max + x_min - x, y). Exact on cell-centered grids.
State mirror_swap_x(const State& s);

}  // namespace laneform
