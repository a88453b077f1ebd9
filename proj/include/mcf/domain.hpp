#pragma once
#include "mcf/graph.hpp"

namespace mcf {

enum class ShapeKind { interval, disk, annulus, polar_starshaped };

// Ambient geometry for the 2d shapes. For `sphere` the radial coordinate is
// the polar (geodesic) angle from the pole of a unit round sphere, so disk(R)
// is a geodesic cap of radius R < pi.
enum class Ambient { flat, sphere };

struct ShapeSpec {
    ShapeKind kind = ShapeKind::interval;
    Ambient ambient = Ambient::flat;
    double a = 0.0, b = 1.0;   // interval
    double R = 1.0;            // disk
    double r0 = 0.5, r1 = 1.0; // annulus
    RadiusFn radius;           // polar_starshaped (flat ambient only)
};

// Contact-angle family. 2d boundaries use phi(theta) = c0 + c1*cos(m*theta);
// the interval carries one value per endpoint.
struct PhiSpec {
    double c0 = 0.0, c1 = 0.0;
    int m = 0;
    double left = 0.0, right = 0.0;

    double at_theta(double th) const { return c0 + c1 * std::cos(m * th); }
    double dtheta(double th) const { return -c1 * m * std::sin(m * th); }
};

struct BoundaryNode {
    int i = 0, j = 0;               // grid indices
    int side = 1;                   // 0: low radial end, 1: high radial end
    std::array<double, 2> x{};      // chart coordinates
    std::array<double, 2> gamma{};  // interior unit normal, contravariant
    std::array<double, 2> T{};      // unit tangent, contravariant (0 in 1d)
    double k = 0;                   // boundary curvature, <grad_T T, gamma>
    double phi = 0;
    double phi_T = 0;
};

struct DomainMesh {
    ShapeSpec shape;
    PhiSpec phi;
    MetricChart chart;
    std::vector<BoundaryNode> boundary;
    std::vector<double> bweight; // boundary line-element weight, parallel to `boundary`

    Field dist;    // capped boundary distance d(x)
    VecField dgrad; // d_k covector of the capped distance
    Field phi_ext; // phi carried inland along theta columns (eta diagnostic)
    Field weight;  // volume quadrature weight per owned node

    double phi0 = 0;     // max |phi| over the boundary
    double inradius = 0; // max of the raw boundary distance
    double d_cap = 0;
    bool has_pole = false;          // disk/starshaped: across-pole ghost row
    bool low_boundary = false;      // row i = 0 is a boundary component
    bool high_boundary = false;     // row i = n0-1 is a boundary component

    int n0() const { return chart.grid.n0(); }
    int n1() const { return chart.grid.n1(); }
};

// u_gamma solving u_gamma = phi * sqrt(1 + u_T^2 + u_gamma^2) in closed form.
double contact_closure(double u_T, double phi);

// ntheta = 0 picks an even count matching the radial spacing at the boundary.
DomainMesh build_mesh(const ShapeSpec& shape, double h, const PhiSpec& phi, int ntheta = 0);

// Fill the ghost layer of u: contact-angle closure at boundary rows and the
// across-pole identification for disk/starshaped meshes.
void apply_bc(const DomainMesh& mesh, Field& u);

// max over boundary nodes of |u_gamma - phi*omega| (ghosts must be filled).
double boundary_residual(const DomainMesh& mesh, const Field& u);

struct ConvexityReport {
    bool holds = false;
    double margin = 0;
    int argmin = 0; // index into mesh.boundary
};

// Margin of k >= |phi_T|/sqrt(1-phi^2) + delta0 over the boundary (2d only).
ConvexityReport convexity_condition(const DomainMesh& mesh, double delta0);

// Quadrature helpers over the stored weights.
double integrate(const DomainMesh& mesh, const Field& f);
double boundary_integrate(const DomainMesh& mesh, const std::vector<double>& vals);

} // namespace mcf
