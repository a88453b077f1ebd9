#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mcf/forcing.hpp"

using namespace mcf;

namespace {

// Slope bundle for a 1d flat chart state with covariant gradient ux.
SlopeInfo slope1d(double ux) {
    SlopeInfo s;
    s.uk_cov = {ux, 0};
    s.uk_con = {ux, 0};
    s.du2 = ux * ux;
    s.omega = std::sqrt(1 + s.du2);
    s.v = {ux / s.omega, 0};
    s.vM = s.v;
    return s;
}

// Slope bundle for general sigma and covariant components (2d).
SlopeInfo slope2d(const Sym2& sigma, double u1, double u2) {
    Sym2 si = sigma.inverse(2);
    SlopeInfo s;
    s.uk_cov = {u1, u2};
    s.uk_con = {si.s00 * u1 + si.s01 * u2, si.s01 * u1 + si.s11 * u2};
    s.du2 = s.uk_cov[0] * s.uk_con[0] + s.uk_cov[1] * s.uk_con[1];
    s.omega = std::sqrt(1 + s.du2);
    s.v = {s.uk_con[0] / s.omega, s.uk_con[1] / s.omega};
    s.vM = s.v;
    return s;
}

} // namespace

TEST_CASE("capillary forcing values: u = 2, |Du| = 2") {
    ForcingSpec f;
    f.kind = ForcingKind::capillary; // h(x,u) = u
    auto e = eval_forcing(f, {0.0, 0.0}, 2.0, slope1d(2.0), 1);
    CHECK(e.psi == doctest::Approx(2 * std::sqrt(5.0)).epsilon(1e-14));
    CHECK(e.psi_u == doctest::Approx(std::sqrt(5.0)).epsilon(1e-14));
}

TEST_CASE("capillary slope derivative: u = 2, u_x = 1 gives psi_{u_1} = sqrt(2)") {
    ForcingSpec f;
    f.kind = ForcingKind::capillary;
    auto e = eval_forcing(f, {0.0, 0.0}, 2.0, slope1d(1.0), 1);
    CHECK(e.psi_du[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("derivative bundle matches central differences of psi") {
    ForcingSpec f;
    f.kind = ForcingKind::capillary;
    f.a0 = 0.3;
    f.a1 = 0.7; // a(x) = 0.3 + 0.7 x^2, so psi_x is nontrivial
    Sym2 sigma{1.5, 0.2, 0.9};
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> un(-2.0, 2.0);
    double delta = 1e-6;
    auto psi_at = [&](double x0, double u, double u1, double u2) {
        return eval_forcing(f, {x0, 0.0}, u, slope2d(sigma, u1, u2), 2).psi;
    };
    for (int trial = 0; trial < 200; ++trial) {
        double x0 = un(rng), u = un(rng), u1 = un(rng), u2 = un(rng);
        auto e = eval_forcing(f, {x0, 0.0}, u, slope2d(sigma, u1, u2), 2);
        double fd_u = (psi_at(x0, u + delta, u1, u2) - psi_at(x0, u - delta, u1, u2)) /
                      (2 * delta);
        double fd_1 = (psi_at(x0, u, u1 + delta, u2) - psi_at(x0, u, u1 - delta, u2)) /
                      (2 * delta);
        double fd_2 = (psi_at(x0, u, u1, u2 + delta) - psi_at(x0, u, u1, u2 - delta)) /
                      (2 * delta);
        double fd_x = (psi_at(x0 + delta, u, u1, u2) - psi_at(x0 - delta, u, u1, u2)) /
                      (2 * delta);
        CHECK(e.psi_u == doctest::Approx(fd_u).epsilon(1e-7));
        // psi_{u_k} pairs with covariant components; FD perturbs u_k directly
        CHECK(e.psi_du[0] == doctest::Approx(fd_1).epsilon(1e-6));
        CHECK(e.psi_du[1] == doctest::Approx(fd_2).epsilon(1e-6));
        CHECK(e.psi_grad[0] == doctest::Approx(fd_x).epsilon(1e-6));
    }
}

TEST_CASE("gravity floor: capillary psi_u >= 1 pointwise") {
    ForcingSpec f;
    f.kind = ForcingKind::capillary;
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> un(-5.0, 5.0);
    for (int trial = 0; trial < 1000; ++trial) {
        auto e = eval_forcing(f, {un(rng), 0.0}, un(rng), slope1d(un(rng)), 1);
        CHECK(e.psi_u >= f.gravity_floor());
    }
}

TEST_CASE("energy-identity capability flags") {
    ForcingSpec f;
    CHECK(f.has_energy_identity()); // zero
    f.kind = ForcingKind::capillary;
    CHECK(f.has_energy_identity());
    CHECK(f.primitive(0.0, 3.0) == doctest::Approx(4.5)); // u^2/2
    f.kind = ForcingKind::linear;
    CHECK(!f.has_energy_identity());
    f.kind = ForcingKind::constant;
    CHECK(!f.has_energy_identity());
}

TEST_CASE("admissibility margins") {
    auto chart = MetricChart::flat_interval(0, 1, 41);
    Field u(chart.grid);
    for (int i = -1; i <= chart.grid.n0(); ++i) {
        double x = chart.grid.coord(0, i);
        u.at(i) = std::sin(2 * x);
    }
    u.ghosts_filled = true;

    SUBCASE("zero forcing: C_min = 0 exactly") {
        ForcingSpec f;
        auto r = admissibility_margin(f, chart, u);
        CHECK(r.c_min == 0.0);
        CHECK(!r.infeasible);
    }
    SUBCASE("constant forcing c = 5: all four margins are satisfied at C = 0") {
        ForcingSpec f;
        f.kind = ForcingKind::constant;
        f.c = 5.0;
        auto r = admissibility_margin(f, chart, u);
        CHECK(r.c_min == 0.0);
    }
    SUBCASE("constant forcing c = -5: the structure margin binds at 5") {
        ForcingSpec f;
        f.kind = ForcingKind::constant;
        f.c = -5.0;
        auto r = admissibility_margin(f, chart, u);
        CHECK(r.c_structure == doctest::Approx(5.0));
        CHECK(r.c_min == doctest::Approx(5.0));
    }
    SUBCASE("capillary on a bounded state: finite, refinement-stable C_min") {
        ForcingSpec f;
        f.kind = ForcingKind::capillary;
        auto margin_at = [&](int n) {
            auto c = MetricChart::flat_interval(0, 1, n);
            Field v(c.grid);
            for (int i = -1; i <= c.grid.n0(); ++i)
                v.at(i) = 3 * std::sin(2 * c.grid.coord(0, i));
            v.ghosts_filled = true;
            return admissibility_margin(f, c, v).c_min;
        };
        double c1 = margin_at(41), c2 = margin_at(81);
        CHECK(std::isfinite(c1));
        CHECK(c1 > 0.0);
        CHECK(std::fabs(c1 - c2) / c2 < 0.05); // grid-refinement stability
    }
}
