#include "mcf/forcing.hpp"

#include <algorithm>
#include <cmath>

namespace mcf {

ForcingEval eval_forcing(const ForcingSpec& spec, const std::array<double, 2>& x, double u,
                         const SlopeInfo& slope, int dim) {
    ForcingEval e;
    switch (spec.kind) {
        case ForcingKind::zero:
            break;
        case ForcingKind::constant:
            e.psi = spec.c;
            break;
        case ForcingKind::linear:
            e.psi = spec.eps * u;
            e.psi_u = spec.eps;
            break;
        case ForcingKind::capillary: {
            double hv = spec.h(x[0], u);
            e.psi = hv * slope.omega;
            e.psi_u = spec.h_u() * slope.omega;
            e.psi_grad[0] = -spec.da_dx0(x[0]) * slope.omega;
            for (int k = 0; k < dim; ++k) e.psi_du[k] = hv * slope.uk_con[k] / slope.omega;
            break;
        }
    }
    return e;
}

AdmissibilityReport admissibility_margin(const ForcingSpec& spec, const MetricChart& chart,
                                         const Field& u) {
    AdmissibilityReport r;
    const Grid& g = chart.grid;
    double min_psi_u = 0, min_structure = 0, max_grad = 0, max_xpsi = 0;
    bool first = true;
    for (int i = 0; i < g.n0(); ++i)
        for (int j = 0; j < g.n1(); ++j) {
            SlopeInfo s = slope_and_normal(chart, u, i, j);
            std::array<double, 2> x{g.coord(0, i), g.coord(1, j)};
            ForcingEval e = eval_forcing(spec, x, u.at(i, j), s, chart.dim);
            double structure = e.psi;
            for (int k = 0; k < chart.dim; ++k) structure -= e.psi_du[k] * s.uk_cov[k];
            double grad2 = norm2_cov1(chart.sigma_inv(i, j), e.psi_grad, chart.dim) /
                           (s.omega * s.omega);
            double xpsi2 = norm2_con1(chart.sigma(i, j), e.psi_du, chart.dim);
            if (first) {
                min_psi_u = e.psi_u;
                min_structure = structure;
                first = false;
            } else {
                min_psi_u = std::min(min_psi_u, e.psi_u);
                min_structure = std::min(min_structure, structure);
            }
            max_grad = std::max(max_grad, grad2);
            max_xpsi = std::max(max_xpsi, xpsi2);
        }
    r.c_psi_u = std::max(0.0, -min_psi_u);
    r.c_structure = std::max(0.0, -min_structure);
    r.c_grad = max_grad;
    r.c_xpsi = max_xpsi;
    r.c_min = std::max({r.c_psi_u, r.c_structure, r.c_grad, r.c_xpsi});
    r.infeasible = !std::isfinite(r.c_min);
    return r;
}

} // namespace mcf
