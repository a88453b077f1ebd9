#pragma once
#include <array>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <vector>

#include "mcf/errors.hpp"

namespace mcf {

// One axis of a structured tensor-product grid. Periodic axes wrap and
// carry no ghost padding; non-periodic axes get one ghost node per side.
struct Axis {
    double x0 = 0.0;
    double dx = 1.0;
    int n = 1;
    bool periodic = false;
};

struct Grid {
    int dim = 1;
    std::array<Axis, 2> ax{};

    static Grid make1d(double x0, double dx, int n) {
        Grid g;
        g.dim = 1;
        g.ax[0] = {x0, dx, n, false};
        g.ax[1] = {0.0, 1.0, 1, true}; // dummy, no padding
        return g;
    }
    static Grid make2d(const Axis& a0, const Axis& a1) {
        Grid g;
        g.dim = 2;
        g.ax[0] = a0;
        g.ax[1] = a1;
        return g;
    }

    int n0() const { return ax[0].n; }
    int n1() const { return ax[1].n; }
    int pad(int axis) const { return ax[axis].periodic ? 0 : 1; }
    int row_len() const { return n1() + 2 * pad(1); }
    std::size_t storage_size() const {
        return std::size_t(n0() + 2 * pad(0)) * row_len();
    }
    std::size_t owned_count() const { return std::size_t(n0()) * n1(); }

    double coord(int axis, int idx) const { return ax[axis].x0 + idx * ax[axis].dx; }

    int wrap1(int j) const {
        if (!ax[1].periodic) return j;
        int n = n1();
        j %= n;
        return j < 0 ? j + n : j;
    }
    // Flat storage index; i in [-pad0, n0+pad0), j wraps if periodic.
    std::size_t flat(int i, int j) const {
        int jw = wrap1(j);
        assert(i >= -pad(0) && i < n0() + pad(0));
        assert(jw >= -pad(1) && jw < n1() + pad(1));
        return std::size_t(i + pad(0)) * row_len() + (jw + pad(1));
    }
    std::size_t owned_flat(int i, int j) const { return std::size_t(i) * n1() + j; }
};

// Scalar field over a grid, with ghost padding along non-periodic axes.
// The grid descriptor is tiny, so each field keeps its own copy; fields
// stay valid when the owning mesh is moved around.
struct Field {
    Grid g;
    std::vector<double> v;
    bool ghosts_filled = false;

    Field() = default;
    explicit Field(const Grid& grid, double fill = 0.0)
        : g(grid), v(grid.storage_size(), fill) {}

    double& at(int i, int j = 0) { return v[g.flat(i, j)]; }
    double at(int i, int j = 0) const { return v[g.flat(i, j)]; }
};

struct VecField {
    std::array<Field, 2> c;
    explicit VecField(const Grid& grid) : c{Field(grid), Field(grid)} {}
    VecField() = default;
};

// Symmetric 2x2 (or 1x1) tensor field.
struct SymField {
    std::array<Field, 3> c; // xx, xy, yy
    explicit SymField(const Grid& grid) : c{Field(grid), Field(grid), Field(grid)} {}
    SymField() = default;
    double at(int a, int b, int i, int j = 0) const { return c[a + b].at(i, j); }
    double& at(int a, int b, int i, int j = 0) { return c[a + b].at(i, j); }
};

// Small dense symmetric matrix helpers used by pointwise kernels.
struct Sym2 {
    // [s00 s01; s01 s11]; 1d uses s00 only.
    double s00 = 0, s01 = 0, s11 = 0;
    double operator()(int a, int b) const {
        return (a == 0 && b == 0) ? s00 : (a == 1 && b == 1) ? s11 : s01;
    }
    double det(int dim) const { return dim == 1 ? s00 : s00 * s11 - s01 * s01; }
    Sym2 inverse(int dim) const {
        if (dim == 1) {
            if (s00 <= 0) throw SingularMetric("metric not positive at node");
            return {1.0 / s00, 0, 0};
        }
        double d = det(2);
        if (d <= 0 || s00 <= 0) throw SingularMetric("metric not positive at node");
        return {s11 / d, -s01 / d, s00 / d};
    }
    double min_eig(int dim) const {
        if (dim == 1) return s00;
        double tr = s00 + s11, dd = det(2);
        double disc = tr * tr / 4 - dd;
        return tr / 2 - (disc > 0 ? std::sqrt(disc) : 0.0);
    }
};

} // namespace mcf
