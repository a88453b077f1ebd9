#include "mcf/domain.hpp"

#include <algorithm>
#include <cmath>

namespace mcf {

namespace {

constexpr double kPi = 3.14159265358979323846;

// C2 ramp used to flatten d(x) past d_cap: p(0)=0, p'(0)=1, p''(0)=0,
// p(1)=1/2, p'(1)=p''(1)=0, and p' stays in [0,1].
double ramp(double s) { return s - s * s * s + 0.5 * s * s * s * s; }
double dramp(double s) {
    double t = 1 - s;
    return t * t * (1 + 2 * s);
}

// Capped distance value and the chain-rule factor for its gradient.
std::pair<double, double> cap_dist(double d, double dc) {
    if (d <= dc) return {d, 1.0};
    double s = (d - dc) / dc;
    if (s >= 1.0) return {1.5 * dc, 0.0};
    return {dc + dc * ramp(s), dramp(s)};
}

int pick_ntheta(double boundary_len_per_rad, double h, int override_n) {
    if (override_n > 0) {
        if (override_n < 4 || override_n % 2 != 0)
            throw DegenerateShape("ntheta must be even and at least 4");
        return override_n;
    }
    int half = std::max(4, (int)std::ceil(kPi * boundary_len_per_rad / h));
    return 2 * half;
}

// Frames along one boundary ring (2d meshes; the ring is a radial level set).
void ring_frames(DomainMesh& m, int i, int side) {
    const Grid& g = m.chart.grid;
    int n1 = g.n1();
    double hth = g.ax[1].dx;
    std::size_t base = m.boundary.size();
    for (int j = 0; j < n1; ++j) {
        const Sym2& si = m.chart.sigma_inv(i, j);
        const Sym2& sg = m.chart.sigma(i, j);
        double th = g.coord(1, j);
        BoundaryNode bn;
        bn.i = i;
        bn.j = j;
        bn.side = side;
        bn.x = {g.coord(0, i), th};
        bn.T = {0.0, 1.0 / std::sqrt(sg.s11)};
        // interior normal: normalized raise of the covector sgn*(1,0)
        double sgn = side == 0 ? 1.0 : -1.0;
        double nrm = std::sqrt(si.s00);
        bn.gamma = {sgn * si.s00 / nrm, sgn * si.s01 / nrm};
        bn.phi = m.phi.at_theta(th);
        bn.phi_T = bn.T[1] * m.phi.dtheta(th);
        m.boundary.push_back(bn);
        m.bweight.push_back(std::sqrt(sg.s11) * hth);
    }
    // k = <grad_T T, gamma> with d_theta T^k taken along the ring
    for (int j = 0; j < n1; ++j) {
        const BoundaryNode& bn = m.boundary[base + j];
        const BoundaryNode& bp = m.boundary[base + (j + 1) % n1];
        const BoundaryNode& bm = m.boundary[base + (j + n1 - 1) % n1];
        double Tth = bn.T[1];
        double cdot[2];
        for (int a = 0; a < 2; ++a) {
            cdot[a] = Tth * (bp.T[a] - bm.T[a]) / (2 * hth) +
                      Tth * Tth * m.chart.christoffel(a, i, j)(1, 1);
        }
        const Sym2& sg = m.chart.sigma(i, j);
        double k = 0;
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) k += sg(a, b) * cdot[a] * bn.gamma[b];
        m.boundary[base + j].k = k;
    }
}

void check_phi0(DomainMesh& m) {
    double p0 = 0;
    for (const BoundaryNode& bn : m.boundary) p0 = std::max(p0, std::abs(bn.phi));
    if (p0 >= 1.0 - 1e-6)
        throw ContactAngleTooSteep("max|phi| must stay below 1 (got " + std::to_string(p0) + ")");
    m.phi0 = p0;
}

// Raw distance to the star-shaped boundary curve R(theta)(cos,sin) from a
// physical point p, plus the physical unit inward gradient.
struct DistResult {
    double d;
    std::array<double, 2> grad;
};

DistResult star_distance(const RadiusFn& R, const std::array<double, 2>& p) {
    auto curve = [&](double t) -> std::array<double, 2> {
        double r = R.r(t);
        return {r * std::cos(t), r * std::sin(t)};
    };
    auto f = [&](double t) {
        auto b = curve(t);
        double dx = p[0] - b[0], dy = p[1] - b[1];
        return dx * dx + dy * dy;
    };
    const int M = 1024;
    double best = 0, fbest = f(0);
    for (int k = 1; k < M; ++k) {
        double t = 2 * kPi * k / M;
        double v = f(t);
        if (v < fbest) {
            fbest = v;
            best = t;
        }
    }
    double lo = best - 2 * kPi / M, hi = best + 2 * kPi / M;
    for (int it = 0; it < 80; ++it) {
        double t1 = lo + (hi - lo) / 3, t2 = hi - (hi - lo) / 3;
        if (f(t1) < f(t2))
            hi = t2;
        else
            lo = t1;
    }
    double t = 0.5 * (lo + hi);
    auto b = curve(t);
    double dx = p[0] - b[0], dy = p[1] - b[1];
    double d = std::sqrt(dx * dx + dy * dy);
    DistResult out;
    out.d = d;
    if (d > 1e-10) {
        out.grad = {dx / d, dy / d};
    } else {
        // on the curve: inward normal of the (counterclockwise) boundary
        double r = R.r(t), rp = R.dr(t);
        double tx = rp * std::cos(t) - r * std::sin(t);
        double ty = rp * std::sin(t) + r * std::cos(t);
        double n = std::sqrt(tx * tx + ty * ty);
        out.grad = {-ty / n, tx / n};
    }
    return out;
}

} // namespace

double contact_closure(double u_T, double phi) {
    double f2 = phi * phi;
    double mag = std::sqrt(f2 * (1 + u_T * u_T) / (1 - f2));
    return phi < 0 ? -mag : mag;
}

DomainMesh build_mesh(const ShapeSpec& shape, double h, const PhiSpec& phi, int ntheta) {
    if (h <= 0) throw DegenerateShape("grid spacing must be positive");
    DomainMesh m;
    m.shape = shape;
    m.phi = phi;

    if (shape.kind == ShapeKind::interval) {
        if (shape.b <= shape.a) throw DegenerateShape("interval needs a < b");
        int n = std::max(5, (int)std::lround((shape.b - shape.a) / h) + 1);
        m.chart = MetricChart::flat_interval(shape.a, shape.b, n);
        m.low_boundary = m.high_boundary = true;
        BoundaryNode lo;
        lo.i = 0;
        lo.side = 0;
        lo.x = {shape.a, 0};
        lo.gamma = {1, 0};
        lo.phi = phi.left;
        BoundaryNode hi;
        hi.i = n - 1;
        hi.side = 1;
        hi.x = {shape.b, 0};
        hi.gamma = {-1, 0};
        hi.phi = phi.right;
        m.boundary = {lo, hi};
        m.bweight = {1.0, 1.0}; // 0-dimensional boundary: counting measure
        m.inradius = 0.5 * (shape.b - shape.a);
    } else if (shape.kind == ShapeKind::disk) {
        if (shape.R <= 0) throw DegenerateShape("disk radius must be positive");
        bool sph = shape.ambient == Ambient::sphere;
        if (sph && shape.R >= kPi - 1e-6)
            throw DegenerateShape("spherical cap radius must stay below pi");
        int nr = std::max(3, (int)std::lround(shape.R / h + 0.5));
        double hr = shape.R / (nr - 0.5); // staggered: r_i = (i+1/2)hr, last exactly R
        double len = sph ? std::sin(shape.R) : shape.R;
        int nth = pick_ntheta(len, hr, ntheta);
        Grid g = Grid::make2d({hr / 2, hr, nr, false}, {0, 2 * kPi / nth, nth, true});
        m.chart = sph ? MetricChart::round_sphere(1.0, g) : MetricChart::flat_polar(g);
        m.has_pole = true;
        m.high_boundary = true;
        ring_frames(m, nr - 1, 1);
        m.inradius = shape.R;
    } else if (shape.kind == ShapeKind::annulus) {
        bool sph = shape.ambient == Ambient::sphere;
        if (shape.r0 <= 0 || shape.r1 <= shape.r0)
            throw DegenerateShape("annulus needs 0 < r0 < r1");
        if (sph && shape.r1 >= kPi - 1e-6)
            throw DegenerateShape("spherical annulus must stay below pi");
        int nr = std::max(3, (int)std::lround((shape.r1 - shape.r0) / h) + 1);
        double hr = (shape.r1 - shape.r0) / (nr - 1);
        double len = sph ? std::max(std::sin(shape.r0), std::sin(shape.r1)) : shape.r1;
        int nth = pick_ntheta(len, hr, ntheta);
        Grid g = Grid::make2d({shape.r0, hr, nr, false}, {0, 2 * kPi / nth, nth, true});
        m.chart = sph ? MetricChart::round_sphere(1.0, g) : MetricChart::flat_polar(g);
        m.low_boundary = m.high_boundary = true;
        ring_frames(m, 0, 0);
        ring_frames(m, nr - 1, 1);
        m.inradius = 0.5 * (shape.r1 - shape.r0);
    } else { // polar_starshaped
        if (shape.ambient != Ambient::flat)
            throw DegenerateShape("star-shaped domains are flat-plane only");
        const RadiusFn& R = shape.radius;
        double rmin = R.c0 - std::abs(R.c1);
        if (rmin <= 0) throw DegenerateShape("radius function must stay positive");
        int ns = std::max(3, (int)std::lround(R.c0 / h + 0.5));
        double hs = 1.0 / (ns - 0.5); // s_i = (i+1/2)hs, boundary at s = 1
        double lmax = 0;
        for (int k = 0; k < 720; ++k) {
            double t = 2 * kPi * k / 720;
            lmax = std::max(lmax, std::hypot(R.r(t), R.dr(t)));
        }
        int nth = pick_ntheta(lmax, h, ntheta);
        Grid g = Grid::make2d({hs / 2, hs, ns, false}, {0, 2 * kPi / nth, nth, true});
        m.chart = MetricChart::starshaped_pullback(g, R);
        m.has_pole = true;
        m.high_boundary = true;
        ring_frames(m, ns - 1, 1);
    }
    check_phi0(m);

    const Grid& g = m.chart.grid;
    m.dist = Field(g);
    m.dgrad = VecField(g);
    m.phi_ext = Field(g);
    m.weight = Field(g);

    // Raw boundary distance and its chart covector gradient.
    Field raw(g);
    VecField rawg(g);
    for (int i = 0; i < g.n0(); ++i)
        for (int j = 0; j < g.n1(); ++j) {
            double r = g.coord(0, i);
            switch (m.shape.kind) {
                case ShapeKind::interval: {
                    double dl = r - shape.a, dr = shape.b - r;
                    raw.at(i, j) = std::min(dl, dr);
                    rawg.c[0].at(i, j) = dl <= dr ? 1.0 : -1.0;
                    break;
                }
                case ShapeKind::disk:
                    raw.at(i, j) = shape.R - r;
                    rawg.c[0].at(i, j) = -1.0;
                    break;
                case ShapeKind::annulus: {
                    double dl = r - shape.r0, dr = shape.r1 - r;
                    raw.at(i, j) = std::min(dl, dr);
                    rawg.c[0].at(i, j) = dl <= dr ? 1.0 : -1.0;
                    break;
                }
                case ShapeKind::polar_starshaped: {
                    double th = g.coord(1, j);
                    double rr = shape.radius.r(th);
                    std::array<double, 2> p{r * rr * std::cos(th), r * rr * std::sin(th)};
                    DistResult dr = star_distance(shape.radius, p);
                    raw.at(i, j) = dr.d;
                    // chart covector d_k = grad_phys . dX/d(s,theta)
                    double rp = shape.radius.dr(th);
                    double cs = std::cos(th), sn = std::sin(th);
                    double Xs[2] = {rr * cs, rr * sn};
                    double Xt[2] = {r * (rp * cs - rr * sn), r * (rp * sn + rr * cs)};
                    rawg.c[0].at(i, j) = dr.grad[0] * Xs[0] + dr.grad[1] * Xs[1];
                    rawg.c[1].at(i, j) = dr.grad[0] * Xt[0] + dr.grad[1] * Xt[1];
                    break;
                }
            }
        }
    if (m.shape.kind == ShapeKind::polar_starshaped) {
        m.inradius = 0;
        for (int i = 0; i < g.n0(); ++i)
            for (int j = 0; j < g.n1(); ++j) m.inradius = std::max(m.inradius, raw.at(i, j));
    }
    m.d_cap = m.inradius / 3.0;
    for (int i = 0; i < g.n0(); ++i)
        for (int j = 0; j < g.n1(); ++j) {
            auto [d, chain] = cap_dist(raw.at(i, j), m.d_cap);
            m.dist.at(i, j) = d;
            for (int a = 0; a < m.chart.dim; ++a)
                m.dgrad.c[a].at(i, j) = chain * rawg.c[a].at(i, j);
        }

    // phi extended inland (used by the eta diagnostic only).
    for (int i = 0; i < g.n0(); ++i)
        for (int j = 0; j < g.n1(); ++j) {
            if (m.chart.dim == 1) {
                double x = g.coord(0, i);
                m.phi_ext.at(i, j) =
                    x < 0.5 * (shape.a + shape.b) ? phi.left : phi.right;
            } else {
                m.phi_ext.at(i, j) = phi.at_theta(g.coord(1, j));
            }
        }

    // Volume quadrature weights: sqrt(det sigma) times the cell size; the
    // staggered innermost cell of disk/starshaped meshes has full width, all
    // non-staggered ends get half cells.
    for (int i = 0; i < g.n0(); ++i) {
        double dr = g.ax[0].dx;
        bool half_lo = i == 0 && !m.has_pole;
        bool half_hi = i == g.n0() - 1;
        double wr = dr * ((half_lo || half_hi) ? 0.5 : 1.0);
        double dth = m.chart.dim == 2 ? g.ax[1].dx : 1.0;
        for (int j = 0; j < g.n1(); ++j)
            m.weight.at(i, j) = m.chart.sqrtdet(i, j) * wr * dth;
    }
    return m;
}

void apply_bc(const DomainMesh& m, Field& u) {
    const Grid& g = m.chart.grid;
    double hr = g.ax[0].dx;
    if (m.chart.dim == 1) {
        int n = g.n0();
        double ugl = contact_closure(0.0, m.phi.left);   // gamma = +d_x at a
        double ugr = contact_closure(0.0, m.phi.right);  // gamma = -d_x at b
        u.at(-1, 0) = u.at(1, 0) - 2 * hr * ugl;
        u.at(n, 0) = u.at(n - 2, 0) - 2 * hr * ugr;
        u.ghosts_filled = true;
        return;
    }
    int n0 = g.n0(), n1 = g.n1();
    double hth = g.ax[1].dx;
    for (const BoundaryNode& bn : m.boundary) {
        int i = bn.i, j = bn.j;
        double uth = (u.at(i, j + 1) - u.at(i, j - 1)) / (2 * hth);
        double ug = contact_closure(bn.T[1] * uth, bn.phi);
        double us = (ug - bn.gamma[1] * uth) / bn.gamma[0];
        if (bn.side == 1)
            u.at(n0, j) = u.at(n0 - 2, j) + 2 * hr * us;
        else
            u.at(-1, j) = u.at(1, j) - 2 * hr * us;
    }
    if (m.has_pole) {
        int half = n1 / 2;
        if (m.shape.kind == ShapeKind::polar_starshaped) {
            // crossing the pole lands on the opposite ray at a different s;
            // quadratic interpolation along that ray
            double s0 = g.coord(0, 0), s1 = g.coord(0, 1), s2 = g.coord(0, 2);
            for (int j = 0; j < n1; ++j) {
                double th = g.coord(1, j);
                double sp = (hr / 2) * m.shape.radius.r(th) / m.shape.radius.r(th + kPi);
                double w0 = (sp - s1) * (sp - s2) / ((s0 - s1) * (s0 - s2));
                double w1 = (sp - s0) * (sp - s2) / ((s1 - s0) * (s1 - s2));
                double w2 = (sp - s0) * (sp - s1) / ((s2 - s0) * (s2 - s1));
                u.at(-1, j) =
                    w0 * u.at(0, j + half) + w1 * u.at(1, j + half) + w2 * u.at(2, j + half);
            }
        } else {
            for (int j = 0; j < n1; ++j) u.at(-1, j) = u.at(0, j + half);
        }
    }
    u.ghosts_filled = true;
}

double boundary_residual(const DomainMesh& m, const Field& u) {
    double worst = 0;
    for (const BoundaryNode& bn : m.boundary) {
        SlopeInfo s = slope_and_normal(m.chart, u, bn.i, bn.j);
        double ug = 0;
        for (int a = 0; a < m.chart.dim; ++a) ug += bn.gamma[a] * s.uk_cov[a];
        worst = std::max(worst, std::abs(ug - bn.phi * s.omega));
    }
    return worst;
}

ConvexityReport convexity_condition(const DomainMesh& m, double delta0) {
    if (m.chart.dim != 2)
        throw WrongDimension("convexity condition is defined for 2d domains only");
    ConvexityReport rep;
    bool first = true;
    for (std::size_t idx = 0; idx < m.boundary.size(); ++idx) {
        const BoundaryNode& bn = m.boundary[idx];
        double v = bn.k - std::abs(bn.phi_T) / std::sqrt(1 - bn.phi * bn.phi) - delta0;
        if (first || v < rep.margin) {
            rep.margin = v;
            rep.argmin = (int)idx;
            first = false;
        }
    }
    rep.holds = rep.margin >= 0;
    return rep;
}

double integrate(const DomainMesh& m, const Field& f) {
    double s = 0;
    for (int i = 0; i < m.n0(); ++i)
        for (int j = 0; j < m.n1(); ++j) s += m.weight.at(i, j) * f.at(i, j);
    return s;
}

double boundary_integrate(const DomainMesh& m, const std::vector<double>& vals) {
    double s = 0;
    for (std::size_t k = 0; k < m.boundary.size(); ++k) s += m.bweight[k] * vals[k];
    return s;
}

} // namespace mcf
