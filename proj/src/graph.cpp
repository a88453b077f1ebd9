#include "mcf/graph.hpp"

#include <cmath>

namespace mcf {

SlopeInfo slope_and_normal(const MetricChart& chart, const Field& u, int i, int j) {
    SlopeInfo s;
    s.uk_cov[0] = d1(u, 0, i, j);
    if (chart.dim == 2) s.uk_cov[1] = d1(u, 1, i, j);
    const Sym2& si = chart.sigma_inv(i, j);
    for (int a = 0; a < chart.dim; ++a) {
        s.uk_con[a] = 0;
        for (int b = 0; b < chart.dim; ++b) s.uk_con[a] += si(a, b) * s.uk_cov[b];
    }
    s.du2 = 0;
    for (int a = 0; a < chart.dim; ++a) s.du2 += s.uk_con[a] * s.uk_cov[a];
    s.omega = std::sqrt(1.0 + s.du2);
    for (int a = 0; a < chart.dim; ++a) s.v[a] = s.vM[a] = s.uk_con[a] / s.omega;
    return s;
}

Sym2 graph_inverse_metric(const Sym2& sigma_inv, const std::array<double, 2>& uk_con,
                          double omega, int dim) {
    double w2 = omega * omega;
    Sym2 g;
    g.s00 = sigma_inv.s00 - uk_con[0] * uk_con[0] / w2;
    if (dim == 2) {
        g.s01 = sigma_inv.s01 - uk_con[0] * uk_con[1] / w2;
        g.s11 = sigma_inv.s11 - uk_con[1] * uk_con[1] / w2;
    }
    return g;
}

GraphQuantities compute_graph(const MetricChart& chart, const Field& u) {
    const Grid& g = chart.grid;
    GraphQuantities q{Field(g), VecField(g), VecField(g), VecField(g),
                      SymField(g), SymField(g), Field(g), Field(g)};
    for (int i = 0; i < g.n0(); ++i)
        for (int j = 0; j < g.n1(); ++j) {
            SlopeInfo s = slope_and_normal(chart, u, i, j);
            Sym2 hess = covariant_hessian(chart, u, i, j);
            Sym2 gi = graph_inverse_metric(chart.sigma_inv(i, j), s.uk_con, s.omega, chart.dim);
            q.omega.at(i, j) = s.omega;
            for (int a = 0; a < chart.dim; ++a) {
                q.grad_cov.c[a].at(i, j) = s.uk_cov[a];
                q.grad_con.c[a].at(i, j) = s.uk_con[a];
                q.v.c[a].at(i, j) = s.v[a];
            }
            q.ginv.c[0].at(i, j) = gi.s00;
            q.ginv.c[1].at(i, j) = gi.s01;
            q.ginv.c[2].at(i, j) = gi.s11;
            q.hess.c[0].at(i, j) = hess.s00;
            q.hess.c[1].at(i, j) = hess.s01;
            q.hess.c[2].at(i, j) = hess.s11;
            double H = gi.s00 * hess.s00;
            if (chart.dim == 2) H += 2 * gi.s01 * hess.s01 + gi.s11 * hess.s11;
            q.H.at(i, j) = H / s.omega; // H = g^{ij} h_ij with h_ij = u_ij / omega
            // |A|^2 = g^{il} g^{kj} u_kl u_ij / omega^2
            double a2 = 0;
            for (int a = 0; a < chart.dim; ++a)
                for (int b = 0; b < chart.dim; ++b)
                    for (int c = 0; c < chart.dim; ++c)
                        for (int d = 0; d < chart.dim; ++d)
                            a2 += gi(a, c) * gi(b, d) * hess(a, b) * hess(c, d);
            q.A2.at(i, j) = a2 / (s.omega * s.omega);
        }
    return q;
}

Field mean_curvature_speed(const MetricChart& chart, const Field& u) {
    const Grid& g = chart.grid;
    Field out(g);
    for (int i = 0; i < g.n0(); ++i)
        for (int j = 0; j < g.n1(); ++j) {
            SlopeInfo s = slope_and_normal(chart, u, i, j);
            Sym2 hess = covariant_hessian(chart, u, i, j);
            Sym2 gi = graph_inverse_metric(chart.sigma_inv(i, j), s.uk_con, s.omega, chart.dim);
            double v = gi.s00 * hess.s00;
            if (chart.dim == 2) v += 2 * gi.s01 * hess.s01 + gi.s11 * hess.s11;
            out.at(i, j) = v;
        }
    return out;
}

Field divergence_form_speed(const MetricChart& chart, const Field& u) {
    const Grid& g = chart.grid;
    Field out(g);
    int dim = chart.dim;
    // Flux F^a = sqrtdet * sigma^{ab} u_b / omega at half points.
    auto half_flux = [&](int axis, int i, int j, int side) {
        // half point between (i,j) and its neighbor on +/- side of `axis`
        int i2 = i + (axis == 0 ? side : 0), j2 = j + (axis == 1 ? side : 0);
        double uk[2] = {0, 0};
        double h = g.ax[axis].dx;
        if (axis == 0)
            uk[0] = (u.at(std::max(i, i2), j) - u.at(std::min(i, i2), j)) / h * 1.0;
        else
            uk[1] = (u.at(i, std::max(j, j2)) - u.at(i, std::min(j, j2))) / h * 1.0;
        if (side < 0) {
            // direct difference already oriented low->high; nothing to flip
        }
        int other = 1 - axis;
        if (dim == 2) uk[other] = 0.5 * (d1(u, other, i, j) + d1(u, other, i2, j2));
        Sym2 si;
        {
            const Sym2& a = chart.sigma_inv(i, j);
            const Sym2& b = chart.sigma_inv(i2, j2);
            si = {0.5 * (a.s00 + b.s00), 0.5 * (a.s01 + b.s01), 0.5 * (a.s11 + b.s11)};
        }
        double sd = 0.5 * (chart.sqrtdet(i, j) + chart.sqrtdet(i2, j2));
        double du2 = 0;
        for (int a = 0; a < dim; ++a)
            for (int b = 0; b < dim; ++b) du2 += si(a, b) * uk[a] * uk[b];
        double omega = std::sqrt(1 + du2);
        double X = 0;
        for (int b = 0; b < dim; ++b) X += si(axis, b) * uk[b];
        return sd * X / omega;
    };
    for (int i = 1; i < g.n0() - 1; ++i) {
        int j0 = 0, j1 = g.n1();
        for (int j = j0; j < j1; ++j) {
            if (dim == 2 && !g.ax[1].periodic && (j < 1 || j >= g.n1() - 1)) continue;
            double div = (half_flux(0, i, j, +1) - half_flux(0, i, j, -1)) / g.ax[0].dx;
            if (dim == 2)
                div += (half_flux(1, i, j, +1) - half_flux(1, i, j, -1)) / g.ax[1].dx;
            div /= chart.sqrtdet(i, j);
            SlopeInfo s = slope_and_normal(chart, u, i, j);
            out.at(i, j) = s.omega * div;
        }
    }
    return out;
}

double norm2_cov2(const Sym2& sigma_inv, const Sym2& T, int dim) {
    double s = 0;
    for (int a = 0; a < dim; ++a)
        for (int b = 0; b < dim; ++b)
            for (int c = 0; c < dim; ++c)
                for (int d = 0; d < dim; ++d)
                    s += sigma_inv(a, c) * sigma_inv(b, d) * T(a, b) * T(c, d);
    return s;
}

double norm2_cov1(const Sym2& sigma_inv, const std::array<double, 2>& S, int dim) {
    double s = 0;
    for (int a = 0; a < dim; ++a)
        for (int b = 0; b < dim; ++b) s += sigma_inv(a, b) * S[a] * S[b];
    return s;
}

double norm2_con1(const Sym2& sigma, const std::array<double, 2>& X, int dim) {
    double s = 0;
    for (int a = 0; a < dim; ++a)
        for (int b = 0; b < dim; ++b) s += sigma(a, b) * X[a] * X[b];
    return s;
}

} // namespace mcf
