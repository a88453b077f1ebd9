#include "mcf/chart.hpp"

#include <cmath>

namespace mcf {

namespace {

double checked(const Field& u, int i, int j) {
    const Grid& g = u.g;
    if (i < 0 || i >= g.n0()) {
        if (g.pad(0) == 0) throw MissingGhost("axis-0 index outside grid");
        if (!u.ghosts_filled || i < -1 || i > g.n0())
            throw MissingGhost("stencil needs unfilled ghost on axis 0");
    }
    if (!g.ax[1].periodic && (j < 0 || j >= g.n1())) {
        if (g.dim < 2 || !u.ghosts_filled || j < -1 || j > g.n1())
            throw MissingGhost("stencil needs unfilled ghost on axis 1");
    }
    return u.v[g.flat(i, j)];
}

} // namespace

double d1(const Field& u, int axis, int i, int j) {
    double h = u.g.ax[axis].dx;
    if (axis == 0) return (checked(u, i + 1, j) - checked(u, i - 1, j)) / (2 * h);
    return (checked(u, i, j + 1) - checked(u, i, j - 1)) / (2 * h);
}

double d2(const Field& u, int axis, int i, int j) {
    double h = u.g.ax[axis].dx;
    double c = checked(u, i, j);
    if (axis == 0)
        return (checked(u, i + 1, j) - 2 * c + checked(u, i - 1, j)) / (h * h);
    return (checked(u, i, j + 1) - 2 * c + checked(u, i, j - 1)) / (h * h);
}

double dcross(const Field& u, int i, int j) {
    double h0 = u.g.ax[0].dx, h1 = u.g.ax[1].dx;
    return (checked(u, i + 1, j + 1) - checked(u, i + 1, j - 1) - checked(u, i - 1, j + 1) +
            checked(u, i - 1, j - 1)) /
           (4 * h0 * h1);
}

double d1_onesided(const Field& u, int axis, int i, int j, int dir) {
    double h = u.g.ax[axis].dx * dir;
    auto v = [&](int s) {
        return axis == 0 ? checked(u, i + s * dir, j) : checked(u, i, j + s * dir);
    };
    return (-3 * v(0) + 4 * v(1) - v(2)) / (2 * h);
}

// ---------------------------------------------------------------------------
// MetricChart construction

void MetricChart::finish_tables() {
    std::size_t sz = grid.storage_size();
    sigma_inv_tab.resize(sz);
    sqrtdet_tab.resize(sz);
    gamma_tab[0].resize(sz);
    gamma_tab[1].resize(sz);
    for (std::size_t p = 0; p < sz; ++p) {
        sigma_inv_tab[p] = sigma_tab[p].inverse(dim);
        sqrtdet_tab[p] = std::sqrt(sigma_tab[p].det(dim));
        const Sym2& si = sigma_inv_tab[p];
        // Gamma^k_ij = 1/2 sigma^{kl} (d_i sig_jl + d_j sig_il - d_l sig_ij)
        for (int k = 0; k < dim; ++k) {
            Sym2 gk;
            auto entry = [&](int i, int j) {
                double s = 0;
                for (int l = 0; l < dim; ++l) {
                    double t = dsig_tab[i][p](j, l) + dsig_tab[j][p](i, l) -
                               dsig_tab[l][p](i, j);
                    s += 0.5 * si(k, l) * t;
                }
                return s;
            };
            gk.s00 = entry(0, 0);
            if (dim == 2) {
                gk.s01 = entry(0, 1);
                gk.s11 = entry(1, 1);
            }
            gamma_tab[k][p] = gk;
        }
    }
}

void MetricChart::build_tables(const std::function<Sym2(double, double)>& sig,
                               const std::function<Sym2(double, double, int)>& dsig) {
    std::size_t sz = grid.storage_size();
    sigma_tab.resize(sz);
    dsig_tab[0].resize(sz);
    dsig_tab[1].resize(sz);
    for (int i = -grid.pad(0); i < grid.n0() + grid.pad(0); ++i)
        for (int j = -grid.pad(1); j < grid.n1() + grid.pad(1); ++j) {
            std::size_t p = grid.flat(i, j);
            double x = grid.coord(0, i), y = grid.coord(1, j);
            sigma_tab[p] = sig(x, y);
            dsig_tab[0][p] = dsig(x, y, 0);
            dsig_tab[1][p] = dsig(x, y, 1);
        }
    finish_tables();
}

void MetricChart::build_tables_fd(const std::function<Sym2(double, double)>& sig) {
    std::size_t sz = grid.storage_size();
    sigma_tab.resize(sz);
    dsig_tab[0].assign(sz, Sym2{});
    dsig_tab[1].assign(sz, Sym2{});
    for (int i = -grid.pad(0); i < grid.n0() + grid.pad(0); ++i)
        for (int j = -grid.pad(1); j < grid.n1() + grid.pad(1); ++j)
            sigma_tab[grid.flat(i, j)] = sig(grid.coord(0, i), grid.coord(1, j));

    deriv_margin = 1; // 4th-order stencil reaches 2 from the node, pad is 1
    auto inr = [&](int idx, int axis) {
        if (grid.ax[axis].periodic) return true;
        return idx - 2 >= -grid.pad(axis) && idx + 2 < grid.ax[axis].n + grid.pad(axis);
    };
    for (int i = 0; i < grid.n0(); ++i)
        for (int j = 0; j < grid.n1(); ++j) {
            for (int k = 0; k < dim; ++k) {
                bool ok = (k == 0) ? inr(i, 0) : inr(j, 1);
                if (!ok) continue;
                double h = grid.ax[k].dx;
                auto at = [&](int s) -> const Sym2& {
                    return sigma_tab[k == 0 ? grid.flat(i + s, j) : grid.flat(i, j + s)];
                };
                Sym2 d;
                d.s00 = (-at(2).s00 + 8 * at(1).s00 - 8 * at(-1).s00 + at(-2).s00) / (12 * h);
                d.s01 = (-at(2).s01 + 8 * at(1).s01 - 8 * at(-1).s01 + at(-2).s01) / (12 * h);
                d.s11 = (-at(2).s11 + 8 * at(1).s11 - 8 * at(-1).s11 + at(-2).s11) / (12 * h);
                dsig_tab[k][grid.flat(i, j)] = d;
            }
        }
    finish_tables();
}

MetricChart MetricChart::flat_interval(double a, double b, int n) {
    MetricChart c;
    c.dim = 1;
    c.kind = ChartKind::flat;
    c.grid = Grid::make1d(a, (b - a) / (n - 1), n);
    c.build_tables([](double, double) { return Sym2{1, 0, 1}; },
                   [](double, double, int) { return Sym2{}; });
    return c;
}

MetricChart MetricChart::flat_cartesian(const Grid& g) {
    MetricChart c;
    c.dim = g.dim;
    c.kind = ChartKind::flat;
    c.grid = g;
    c.build_tables([](double, double) { return Sym2{1, 0, 1}; },
                   [](double, double, int) { return Sym2{}; });
    return c;
}

MetricChart MetricChart::flat_polar(const Grid& g) {
    MetricChart c;
    c.dim = 2;
    c.kind = ChartKind::flat_polar;
    c.grid = g;
    c.build_tables([](double r, double) { return Sym2{1, 0, r * r}; },
                   [](double r, double, int k) {
                       return k == 0 ? Sym2{0, 0, 2 * r} : Sym2{};
                   });
    return c;
}

MetricChart MetricChart::round_sphere(double radius, const Grid& g) {
    MetricChart c;
    c.dim = g.dim;
    c.kind = ChartKind::round_sphere;
    c.grid = g;
    double a2 = radius * radius;
    if (g.dim == 1) {
        c.build_tables([a2](double, double) { return Sym2{a2, 0, a2}; },
                       [](double, double, int) { return Sym2{}; });
        return c;
    }
    c.build_tables(
        [a2](double th, double) {
            double s = std::sin(th);
            return Sym2{a2, 0, a2 * s * s};
        },
        [a2](double th, double, int k) {
            if (k != 0) return Sym2{};
            return Sym2{0, 0, a2 * 2 * std::sin(th) * std::cos(th)};
        });
    return c;
}

MetricChart MetricChart::starshaped_pullback(const Grid& g, const RadiusFn& R) {
    MetricChart c;
    c.dim = 2;
    c.kind = ChartKind::starshaped_pullback;
    c.grid = g;
    c.radius = R;
    // Pullback of the flat metric under (s, th) -> s R(th) (cos th, sin th).
    c.build_tables(
        [R](double s, double th) {
            double r = R.r(th), rp = R.dr(th);
            return Sym2{r * r, s * r * rp, s * s * (r * r + rp * rp)};
        },
        [R](double s, double th, int k) {
            double r = R.r(th), rp = R.dr(th), rpp = R.ddr(th);
            if (k == 0) return Sym2{0, r * rp, 2 * s * (r * r + rp * rp)};
            return Sym2{2 * r * rp, s * (rp * rp + r * rpp),
                        s * s * (2 * r * rp + 2 * rp * rpp)};
        });
    return c;
}

MetricChart MetricChart::warped(std::function<double(double)> rho,
                                std::function<double(double)> drho, const Grid& sphere_grid) {
    MetricChart c = round_sphere(1.0, sphere_grid);
    c.kind = ChartKind::warped;
    c.rho = std::move(rho);
    c.drho = std::move(drho);
    return c;
}

MetricChart MetricChart::tabulated(const Grid& g,
                                   const std::function<Sym2(double, double)>& sample) {
    MetricChart c;
    c.dim = g.dim;
    c.kind = ChartKind::tabulated;
    c.grid = g;
    c.build_tables_fd(sample);
    return c;
}

// ---------------------------------------------------------------------------
// Covariant derivatives

Sym2 covariant_hessian(const MetricChart& chart, const Field& u, int i, int j) {
    double uk[2] = {d1(u, 0, i, j), 0};
    if (chart.dim == 2) uk[1] = d1(u, 1, i, j);
    Sym2 h;
    auto gamma = [&](int k, int a, int b) { return chart.christoffel(k, i, j)(a, b); };
    h.s00 = d2(u, 0, i, j);
    for (int k = 0; k < chart.dim; ++k) h.s00 -= gamma(k, 0, 0) * uk[k];
    if (chart.dim == 2) {
        h.s01 = dcross(u, i, j);
        h.s11 = d2(u, 1, i, j);
        for (int k = 0; k < 2; ++k) {
            h.s01 -= gamma(k, 0, 1) * uk[k];
            h.s11 -= gamma(k, 1, 1) * uk[k];
        }
    }
    return h;
}

// ---------------------------------------------------------------------------
// Curvature

CurvatureData compute_curvature(const MetricChart& chart) {
    CurvatureData cd;
    cd.g = &chart.grid;
    std::size_t sz = chart.grid.storage_size();
    cd.riem.assign(sz, {});
    cd.ricci.assign(sz, Sym2{});
    cd.valid.assign(sz, 0);
    if (chart.dim == 1) {
        for (int i = 0; i < chart.grid.n0(); ++i) cd.valid[chart.grid.flat(i, 0)] = 1;
        return cd;
    }
    const Grid& g = chart.grid;
    int mg = chart.deriv_margin; // Gamma valid within this margin of owned region
    auto gamma_ok = [&](int i, int j) {
        int lo0 = mg == 0 ? -g.pad(0) : mg, hi0 = mg == 0 ? g.n0() + g.pad(0) : g.n0() - mg;
        int lo1 = mg == 0 ? -g.pad(1) : mg, hi1 = mg == 0 ? g.n1() + g.pad(1) : g.n1() - mg;
        bool a0 = g.ax[0].periodic || (i >= lo0 && i < hi0);
        bool a1 = g.ax[1].periodic || (j >= lo1 && j < hi1);
        return a0 && a1;
    };
    for (int i = 0; i < g.n0(); ++i)
        for (int j = 0; j < g.n1(); ++j) {
            bool ok = true;
            for (int s = -2; s <= 2 && ok; ++s)
                ok = gamma_ok(i + s, j) && gamma_ok(i, j + s);
            if (!ok) continue;
            std::size_t p = g.flat(i, j);
            // dGamma[a][k](b,c) = d_a Gamma^k_{bc}, 4th-order centered
            Sym2 dGamma[2][2];
            for (int a = 0; a < 2; ++a) {
                double h = g.ax[a].dx;
                auto at = [&](int s, int k) -> const Sym2& {
                    return chart.gamma_tab[k][a == 0 ? g.flat(i + s, j) : g.flat(i, j + s)];
                };
                for (int k = 0; k < 2; ++k) {
                    Sym2 d;
                    d.s00 = (-at(2, k).s00 + 8 * at(1, k).s00 - 8 * at(-1, k).s00 +
                             at(-2, k).s00) / (12 * h);
                    d.s01 = (-at(2, k).s01 + 8 * at(1, k).s01 - 8 * at(-1, k).s01 +
                             at(-2, k).s01) / (12 * h);
                    d.s11 = (-at(2, k).s11 + 8 * at(1, k).s11 - 8 * at(-1, k).s11 +
                             at(-2, k).s11) / (12 * h);
                    dGamma[a][k] = d;
                }
            }
            auto gam = [&](int k, int a, int b) { return chart.gamma_tab[k][p](a, b); };
            // R^l_{abc}
            double Rup[2][2][2][2];
            for (int l = 0; l < 2; ++l)
                for (int a = 0; a < 2; ++a)
                    for (int b = 0; b < 2; ++b)
                        for (int c = 0; c < 2; ++c) {
                            double v = dGamma[a][l](b, c) - dGamma[b][l](a, c);
                            for (int m = 0; m < 2; ++m)
                                v += gam(l, a, m) * gam(m, b, c) - gam(l, b, m) * gam(m, a, c);
                            Rup[l][a][b][c] = v;
                        }
            const Sym2& sig = chart.sigma_tab[p];
            auto& out = cd.riem[p];
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b)
                    for (int c = 0; c < 2; ++c)
                        for (int d = 0; d < 2; ++d) {
                            double v = 0;
                            for (int m = 0; m < 2; ++m) v += sig(d, m) * Rup[m][a][b][c];
                            out[((a * 2 + b) * 2 + c) * 2 + d] = v;
                        }
            Sym2 ric;
            ric.s00 = Rup[0][0][0][0] + Rup[1][1][0][0];
            ric.s01 = Rup[0][0][0][1] + Rup[1][1][0][1];
            ric.s11 = Rup[0][0][1][1] + Rup[1][1][1][1];
            cd.ricci[p] = ric;
            cd.valid[p] = 1;
        }
    return cd;
}

double ricci(const MetricChart& chart, const CurvatureData& curv, int i, int j,
             const std::array<double, 2>& X, const std::array<double, 2>& Y) {
    if (chart.dim == 1) return 0.0;
    std::size_t p = chart.grid.flat(i, j);
    if (!curv.valid[p]) throw StencilTooNarrow("curvature not available at node");
    const Sym2& r = curv.ricci[p];
    double s = 0;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) s += r(a, b) * X[a] * Y[b];
    return s;
}

double commutation_residual(const MetricChart& chart, const VecField& w) {
    const Grid& g = chart.grid;
    for (int a = 0; a < chart.dim; ++a)
        if (!g.ax[a].periodic && g.ax[a].n < 5)
            throw StencilTooNarrow("need at least 5 nodes per axis");
    if (chart.dim == 1) {
        // No curvature and partials commute exactly in the symmetric stencils.
        return 0.0;
    }
    CurvatureData curv = compute_curvature(chart);
    int m = chart.deriv_margin + 2;
    auto inside = [&](int i, int j, int mm) {
        bool a0 = g.ax[0].periodic || (i >= mm && i < g.n0() - mm);
        bool a1 = g.ax[1].periodic || (j >= mm && j < g.n1() - mm);
        return a0 && a1;
    };
    // A[i][j] = d_j w_i - Gamma^l_{ji} w_l over nodes at margin m-1
    std::array<std::array<Field, 2>, 2> A{{{Field(g), Field(g)}, {Field(g), Field(g)}}};
    for (int i = 0; i < g.n0(); ++i)
        for (int j = 0; j < g.n1(); ++j) {
            if (!inside(i, j, m - 1)) continue;
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) {
                    double v = d1(w.c[a], b, i, j);
                    for (int l = 0; l < 2; ++l)
                        v -= chart.christoffel(l, i, j)(b, a) * w.c[l].at(i, j);
                    A[a][b].at(i, j) = v;
                }
        }
    double worst = 0;
    for (int i = 0; i < g.n0(); ++i)
        for (int j = 0; j < g.n1(); ++j) {
            if (!inside(i, j, m)) continue;
            std::size_t p = g.flat(i, j);
            if (!curv.valid[p]) continue;
            const Sym2& si = chart.sigma_inv_tab[p];
            double wup[2];
            for (int a = 0; a < 2; ++a)
                wup[a] = si(a, 0) * w.c[0].at(i, j) + si(a, 1) * w.c[1].at(i, j);
            // w_ijk = d_k A_ij - Gamma^l_{ki} A_lj - Gamma^l_{kj} A_il
            auto third = [&](int a, int b, int k) {
                double v = d1(A[a][b], k, i, j);
                for (int l = 0; l < 2; ++l) {
                    v -= chart.christoffel(l, i, j)(k, a) * A[l][b].at(i, j);
                    v -= chart.christoffel(l, i, j)(k, b) * A[a][l].at(i, j);
                }
                return v;
            };
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b)
                    for (int k = 0; k < 2; ++k) {
                        if (b == k) continue;
                        double res = third(a, b, k) - third(a, k, b);
                        for (int q = 0; q < 2; ++q)
                            res += curv.riemann(k, b, a, q, i, j) * wup[q];
                        worst = std::max(worst, std::abs(res));
                    }
        }
    return worst;
}

double warped_area(const MetricChart& chart, const std::function<double(double)>& rho,
                   const Field& u) {
    const Grid& g = chart.grid;
    double total = 0;
    for (int i = 0; i < g.n0(); ++i)
        for (int j = 0; j < g.n1(); ++j) {
            double uk[2] = {0, 0};
            for (int a = 0; a < chart.dim; ++a) {
                int idx = a == 0 ? i : j, n = g.ax[a].n;
                if (g.ax[a].periodic || (idx > 0 && idx < n - 1))
                    uk[a] = d1(u, a, i, j);
                else
                    uk[a] = d1_onesided(u, a, i, j, idx == 0 ? 1 : -1);
            }
            const Sym2& si = chart.sigma_inv(i, j);
            double du2 = si.s00 * uk[0] * uk[0];
            if (chart.dim == 2) du2 += 2 * si.s01 * uk[0] * uk[1] + si.s11 * uk[1] * uk[1];
            double rr = rho(u.at(i, j));
            if (rr <= 0) throw NonpositiveProfile("rho(u) <= 0 at a node");
            double cell = g.ax[0].dx * (chart.dim == 2 ? g.ax[1].dx : 1.0);
            total += std::sqrt(1 + du2 / (rr * rr)) * std::pow(rr, chart.dim) *
                     chart.sqrtdet(i, j) * cell;
        }
    return total;
}

} // namespace mcf
