#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mcf/chart.hpp"

using namespace mcf;

namespace {

constexpr double kPi = 3.14159265358979323846;

Grid sphere_grid(double lo, double hi, int nth, int nphi) {
    double h = (hi - lo) / (nth - 1);
    Axis th{lo, h, nth, false};
    Axis ph{0.0, 2 * kPi / nphi, nphi, true};
    return Grid::make2d(th, ph);
}

// Levi-Civita compatibility residual d_k sigma_ij - G^l_ki s_lj - G^l_kj s_il
double nabla_sigma_residual(const MetricChart& c) {
    const Grid& g = c.grid;
    double worst = 0;
    int m = c.deriv_margin;
    for (int i = m; i < g.n0() - m; ++i)
        for (int j = 0; j < g.n1(); ++j) {
            for (int k = 0; k < c.dim; ++k) {
                const Sym2& ds = c.dsig_tab[k][g.flat(i, j)];
                for (int a = 0; a < c.dim; ++a)
                    for (int b = 0; b < c.dim; ++b) {
                        double r = ds(a, b);
                        for (int l = 0; l < c.dim; ++l) {
                            r -= c.christoffel(l, i, j)(k, a) * c.sigma(i, j)(l, b);
                            r -= c.christoffel(l, i, j)(k, b) * c.sigma(i, j)(a, l);
                        }
                        worst = std::max(worst, std::fabs(r));
                    }
            }
        }
    return worst;
}

double inverse_residual(const MetricChart& c) {
    const Grid& g = c.grid;
    double worst = 0;
    for (int i = 0; i < g.n0(); ++i)
        for (int j = 0; j < g.n1(); ++j) {
            const Sym2& s = c.sigma(i, j);
            const Sym2& si = c.sigma_inv(i, j);
            for (int a = 0; a < c.dim; ++a)
                for (int b = 0; b < c.dim; ++b) {
                    double r = a == b ? -1.0 : 0.0;
                    for (int l = 0; l < c.dim; ++l) r += si(a, l) * s(l, b);
                    worst = std::max(worst, std::fabs(r));
                }
        }
    return worst;
}

} // namespace

TEST_CASE("flat chart metric is the identity exactly") {
    Grid g = Grid::make2d({0, 0.1, 11, false}, {0, 0.1, 11, false});
    auto c = MetricChart::flat_cartesian(g);
    for (int i = 0; i < 11; ++i)
        for (int j = 0; j < 11; ++j) {
            CHECK(c.sigma(i, j).s00 == 1.0);
            CHECK(c.sigma(i, j).s01 == 0.0);
            CHECK(c.sigma(i, j).s11 == 1.0);
        }
}

TEST_CASE("unit-sphere Christoffel symbols at theta = pi/3") {
    Grid g = sphere_grid(kPi / 3 - 0.04, kPi / 3 + 0.04, 5, 8);
    auto c = MetricChart::round_sphere(1.0, g);
    int i = 2; // node exactly at pi/3
    REQUIRE(g.coord(0, i) == doctest::Approx(kPi / 3).epsilon(1e-14));
    double th = kPi / 3;
    // Gamma^theta_{phi phi} = -sin cos; Gamma^phi_{theta phi} = cot
    CHECK(c.christoffel(0, i, 0)(1, 1) ==
          doctest::Approx(-std::sin(th) * std::cos(th)).epsilon(1e-12));
    CHECK(c.christoffel(0, i, 0)(1, 1) == doctest::Approx(-0.43301270189).epsilon(1e-9));
    CHECK(c.christoffel(1, i, 0)(0, 1) ==
          doctest::Approx(1.0 / std::tan(th)).epsilon(1e-12));
    CHECK(c.christoffel(1, i, 0)(0, 1) == doctest::Approx(0.57735026919).epsilon(1e-9));
}

TEST_CASE("sigma_inv * sigma = identity within 1e-12 on all chart kinds") {
    auto sph = MetricChart::round_sphere(1.3, sphere_grid(0.4, kPi - 0.4, 21, 16));
    CHECK(inverse_residual(sph) < 1e-12);

    Grid pg = Grid::make2d({0.5, 0.05, 11, false}, {0, 2 * kPi / 20, 20, true});
    CHECK(inverse_residual(MetricChart::flat_polar(pg)) < 1e-12);

    RadiusFn R{1.0, 0.2, 3};
    Grid sg = Grid::make2d({0.3, 0.05, 15, false}, {0, 2 * kPi / 24, 24, true});
    CHECK(inverse_residual(MetricChart::starshaped_pullback(sg, R)) < 1e-12);
}

TEST_CASE("Levi-Civita compatibility: nabla sigma = 0 within 1e-10") {
    auto sph = MetricChart::round_sphere(1.0, sphere_grid(0.4, kPi - 0.4, 21, 16));
    CHECK(nabla_sigma_residual(sph) < 1e-10);

    Grid pg = Grid::make2d({0.5, 0.05, 11, false}, {0, 2 * kPi / 20, 20, true});
    CHECK(nabla_sigma_residual(MetricChart::flat_polar(pg)) < 1e-10);

    RadiusFn R{1.0, 0.2, 3};
    Grid sg = Grid::make2d({0.3, 0.05, 15, false}, {0, 2 * kPi / 24, 24, true});
    CHECK(nabla_sigma_residual(MetricChart::starshaped_pullback(sg, R)) < 1e-10);
}

TEST_CASE("tabulated chart reproduces analytic polar Christoffels") {
    Grid pg = Grid::make2d({0.5, 0.02, 26, false}, {0, 2 * kPi / 40, 40, true});
    auto ana = MetricChart::flat_polar(pg);
    auto tab = MetricChart::tabulated(
        pg, [](double r, double) { return Sym2{1, 0, r * r}; });
    int m = tab.deriv_margin;
    double worst = 0;
    for (int i = m; i < pg.n0() - m; ++i)
        for (int j = 0; j < pg.n1(); ++j)
            for (int k = 0; k < 2; ++k)
                for (int a = 0; a < 2; ++a)
                    for (int b = a; b < 2; ++b)
                        worst = std::max(worst,
                                         std::fabs(tab.christoffel(k, i, j)(a, b) -
                                                   ana.christoffel(k, i, j)(a, b)));
    CHECK(worst < 1e-6); // centered FD of a quadratic-in-r metric
}

TEST_CASE("unit sphere Ricci equals (n-1) sigma and is positive") {
    double h = kPi / 200;
    int nth = int((kPi - 1.0) / h) + 1;
    auto c = MetricChart::round_sphere(1.0, sphere_grid(0.5, 0.5 + (nth - 1) * h, nth, 64));
    auto curv = compute_curvature(c);
    const Grid& g = c.grid;
    double worst = 0;
    for (int i = 0; i < g.n0(); ++i)
        for (int j = 0; j < g.n1(); ++j) {
            if (!curv.valid[g.flat(i, j)]) continue;
            double th = g.coord(0, i);
            double r00 = ricci(c, curv, i, j, {1, 0}, {1, 0});
            double r11 = ricci(c, curv, i, j, {0, 1}, {0, 1});
            CHECK(r00 > 0);
            CHECK(r11 > 0);
            worst = std::max(worst, std::fabs(r00 - 1.0));
            worst = std::max(worst, std::fabs(r11 - std::sin(th) * std::sin(th)));
        }
    CHECK(worst < 1e-4);
}

TEST_CASE("covector commutation residual") {
    SUBCASE("zero field: residual exactly 0") {
        auto c = MetricChart::round_sphere(1.0, sphere_grid(0.5, kPi - 0.5, 21, 16));
        VecField w(c.grid);
        CHECK(commutation_residual(c, w) == 0.0);
    }
    SUBCASE("flat chart: residual at FD-noise level") {
        Grid g = Grid::make2d({0, 0.05, 41, false}, {0, 0.05, 41, false});
        auto c = MetricChart::flat_cartesian(g);
        VecField w(g);
        for (int i = -1; i <= g.n0(); ++i)
            for (int j = -1; j <= g.n1(); ++j) {
                double x = g.coord(0, i), y = g.coord(1, j);
                w.c[0].at(i, j) = std::sin(x + 2 * y);
                w.c[1].at(i, j) = std::cos(2 * x - y);
            }
        w.c[0].ghosts_filled = w.c[1].ghosts_filled = true;
        CHECK(commutation_residual(c, w) < 1e-10);
    }
    SUBCASE("sphere, w = d(cos theta): halving h halves the residual or better") {
        auto resid = [](int nth) {
            auto c = MetricChart::round_sphere(1.0, sphere_grid(0.5, kPi - 0.5, nth, 32));
            const Grid& g = c.grid;
            VecField w(g);
            for (int i = -1; i <= g.n0(); ++i)
                for (int j = 0; j < g.n1(); ++j)
                    w.c[0].at(i, j) = -std::sin(g.coord(0, i));
            w.c[0].ghosts_filled = w.c[1].ghosts_filled = true;
            return commutation_residual(c, w);
        };
        double r1 = resid(41), r2 = resid(81);
        CHECK(r2 < r1 / 2.0);
    }
}

TEST_CASE("warped-product graph area") {
    SUBCASE("rho = 1 reduces to the plain graph area of a linear function") {
        Grid g = Grid::make2d({0, 0.05, 21, false}, {0, 0.05, 21, false});
        auto c = MetricChart::flat_cartesian(g);
        double al = 0.7, be = -0.4;
        Field u(g);
        for (int i = -1; i <= g.n0(); ++i)
            for (int j = -1; j <= g.n1(); ++j)
                u.at(i, j) = al * g.coord(0, i) + be * g.coord(1, j);
        u.ghosts_filled = true;
        double omega = std::sqrt(1 + al * al + be * be);
        double box = (21 * 0.05) * (21 * 0.05); // node-centered cells
        double a = warped_area(c, [](double) { return 1.0; }, u);
        CHECK(a == doctest::Approx(omega * box).epsilon(1e-12));
    }
    SUBCASE("rho(r) = r, u = 2 on the full sphere: 4 * 4pi") {
        int n = 128;
        double h = kPi / n;
        Grid g = Grid::make2d({h / 2, h, n, false}, {0, 2 * kPi / 128, 128, true});
        auto c = MetricChart::round_sphere(1.0, g);
        Field u(g, 2.0);
        u.ghosts_filled = true;
        double a = warped_area(c, [](double r) { return r; }, u);
        CHECK(std::fabs(a - 16 * kPi) / (16 * kPi) < 1e-3);
    }
    SUBCASE("rho(r) = r, u = 10 + 0.1 cos(theta): fine-quadrature oracle") {
        int n = 200;
        double h = kPi / n;
        Grid g = Grid::make2d({h / 2, h, n, false}, {0, 2 * kPi / 128, 128, true});
        auto c = MetricChart::round_sphere(1.0, g);
        Field u(g);
        for (int i = -1; i <= g.n0(); ++i)
            for (int j = 0; j < g.n1(); ++j)
                u.at(i, j) = 10 + 0.1 * std::cos(g.coord(0, i));
        u.ghosts_filled = true;
        double a = warped_area(c, [](double r) { return r; }, u);
        // independent 1d Simpson quadrature of the axisymmetric integrand
        auto f = [](double th) {
            double uu = 10 + 0.1 * std::cos(th);
            double ut = -0.1 * std::sin(th);
            return std::sqrt(1 + ut * ut / (uu * uu)) * uu * uu * std::sin(th);
        };
        int m = 20000;
        double dth = kPi / m, oracle = 0;
        for (int k = 0; k < m; ++k) {
            double a0 = k * dth, b0 = a0 + dth;
            oracle += dth / 6 * (f(a0) + 4 * f((a0 + b0) / 2) + f(b0));
        }
        oracle *= 2 * kPi;
        CHECK(std::fabs(a - oracle) / oracle < 1e-3);
    }
}

TEST_CASE("covariant Hessian of cos(theta) on the unit sphere") {
    Grid g = sphere_grid(0.5, kPi - 0.5, 41, 32);
    auto c = MetricChart::round_sphere(1.0, g);
    Field u(g);
    for (int i = -1; i <= g.n0(); ++i)
        for (int j = 0; j < g.n1(); ++j) u.at(i, j) = std::cos(g.coord(0, i));
    u.ghosts_filled = true;
    for (int i = 1; i < g.n0() - 1; i += 7)
        for (int j = 0; j < g.n1(); j += 5) {
            double th = g.coord(0, i);
            Sym2 hess = covariant_hessian(c, u, i, j);
            // centered stencils at h ~ 0.05: O(h^2) truncation
            CHECK(hess.s00 == doctest::Approx(-std::cos(th)).epsilon(1e-3));
            CHECK(hess.s11 ==
                  doctest::Approx(-std::cos(th) * std::sin(th) * std::sin(th))
                      .epsilon(1e-3));
            CHECK(std::fabs(hess.s01) < 1e-10);
        }
}
