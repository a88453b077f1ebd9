#pragma once
#include <array>
#include <functional>
#include <vector>

#include "mcf/grid.hpp"

namespace mcf {

enum class ChartKind { flat, flat_polar, round_sphere, warped, starshaped_pullback, tabulated };

// Radius function family for star-shaped boundary pullback charts:
// R(theta) = c0 + c1*cos(m*theta).
struct RadiusFn {
    double c0 = 1.0;
    double c1 = 0.0;
    int m = 0;
    double r(double th) const { return c0 + c1 * std::cos(m * th); }
    double dr(double th) const { return -c1 * m * std::sin(m * th); }
    double ddr(double th) const { return -c1 * m * m * std::cos(m * th); }
};

// A single coordinate chart with precomputed metric tables: sigma, its
// inverse, sqrt(det sigma), coordinate derivatives of sigma and the
// Levi-Civita Christoffel symbols, all sampled on the padded grid.
class MetricChart {
  public:
    int dim = 1;
    ChartKind kind = ChartKind::flat;
    Grid grid;

    // Tables over padded storage (ghost ring included for analytic kinds).
    std::vector<Sym2> sigma_tab, sigma_inv_tab;
    std::vector<double> sqrtdet_tab;
    std::array<std::vector<Sym2>, 2> dsig_tab;  // d_k sigma_ij
    std::array<std::vector<Sym2>, 2> gamma_tab; // Gamma^k_ij, symmetric in (i,j)

    // Nodes closer than this to a non-periodic edge have no valid
    // dsigma/Gamma entries (tabulated kind uses finite differences).
    int deriv_margin = 0;

    // Warped product profile (kind == warped): rho and rho'.
    std::function<double(double)> rho, drho;
    RadiusFn radius; // kind == starshaped_pullback

    const Sym2& sigma(int i, int j = 0) const { return sigma_tab[grid.flat(i, j)]; }
    const Sym2& sigma_inv(int i, int j = 0) const { return sigma_inv_tab[grid.flat(i, j)]; }
    double sqrtdet(int i, int j = 0) const { return sqrtdet_tab[grid.flat(i, j)]; }
    // Gamma^k_ij at a node.
    const Sym2& christoffel(int k, int i, int j = 0) const {
        return gamma_tab[k][grid.flat(i, j)];
    }

    static MetricChart flat_interval(double a, double b, int n);
    static MetricChart flat_cartesian(const Grid& g);
    static MetricChart flat_polar(const Grid& g);                  // coords (r, theta)
    static MetricChart round_sphere(double radius, const Grid& g); // coords (theta, azimuth)
    static MetricChart starshaped_pullback(const Grid& g, const RadiusFn& R); // coords (s, theta)
    static MetricChart warped(std::function<double(double)> rho,
                              std::function<double(double)> drho, const Grid& sphere_grid);
    static MetricChart tabulated(const Grid& g, const std::function<Sym2(double, double)>& sample);

  private:
    void build_tables(const std::function<Sym2(double, double)>& sig,
                      const std::function<Sym2(double, double, int)>& dsig);
    void build_tables_fd(const std::function<Sym2(double, double)>& sig);
    void finish_tables(); // inverse, sqrtdet, christoffel from sigma/dsigma
};

// Riemann/Ricci tables. Convention: riem stores the lowered tensor
// R_{abcd} = sigma_{dm} R^m_{abc} with
//   R^l_{abc} = d_a Gamma^l_{bc} - d_b Gamma^l_{ac}
//             + Gamma^l_{am} Gamma^m_{bc} - Gamma^l_{bm} Gamma^m_{ac}
// and Ric_{bc} = R^a_{abc}. This sign is calibrated so that the unit
// round sphere has Ric = (n-1) sigma (positive). The commuting formula
// for a covector reads w_ijk - w_ikj = -R_{kjip} w^p in this convention.
struct CurvatureData {
    const Grid* g = nullptr;
    std::vector<std::array<double, 16>> riem; // index (a*8 + b*4 + c*2 + d) for dim 2
    std::vector<Sym2> ricci;
    std::vector<char> valid;
    double riemann(int a, int b, int c, int d, int i, int j = 0) const {
        return riem[g->flat(i, j)][((a * 2 + b) * 2 + c) * 2 + d];
    }
};

CurvatureData compute_curvature(const MetricChart& chart);

// Ric(X, Y) at a node from precomputed curvature.
double ricci(const MetricChart& chart, const CurvatureData& curv, int i, int j,
             const std::array<double, 2>& X, const std::array<double, 2>& Y);

// Centered stencils. Throw MissingGhost when the stencil leaves the
// owned region and ghosts are not filled.
double d1(const Field& u, int axis, int i, int j = 0);
double d2(const Field& u, int axis, int i, int j = 0);
double dcross(const Field& u, int i, int j);
// One-sided 2nd-order first derivative pointing into the grid.
double d1_onesided(const Field& u, int axis, int i, int j, int dir);

// Covariant Hessian u_ij = dd u - Gamma^k_ij u_k at one node.
Sym2 covariant_hessian(const MetricChart& chart, const Field& u, int i, int j = 0);

// Max over interior nodes and index triples of
// |w_ijk - w_ikj + R_{kjip} w^p| for a covector field w.
double commutation_residual(const MetricChart& chart, const VecField& w);

// Area of the graph of u over the chart's grid box in the warped product
// dr^2 + rho^2(r) sigma: integral of sqrt(1 + |Du|^2/rho^2(u)) rho^n(u) dvol.
double warped_area(const MetricChart& chart, const std::function<double(double)>& rho,
                   const Field& u);

} // namespace mcf
