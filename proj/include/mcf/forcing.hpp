#pragma once
#include "mcf/graph.hpp"

namespace mcf {

enum class ForcingKind { zero, capillary, linear, constant };

// Built-in forcing family. The capillary kind uses h(x,u) = u - a(x) with
// a(x) = a0 + a1 * x0^2 (x0 = first chart coordinate), so h_u = 1 and the
// gravity floor h0 = 1. linear is psi = eps*u, constant is psi = c.
struct ForcingSpec {
    ForcingKind kind = ForcingKind::zero;
    double eps = 1.0; // linear
    double c = 0.0;   // constant
    double a0 = 0.0, a1 = 0.0;

    double a(double x0) const { return a0 + a1 * x0 * x0; }
    double da_dx0(double x0) const { return 2 * a1 * x0; }
    double h(double x0, double u) const { return u - a(x0); }
    double h_u() const { return 1.0; }
    double gravity_floor() const {
        switch (kind) {
            case ForcingKind::capillary: return 1.0;
            case ForcingKind::linear: return eps;
            default: return 0.0;
        }
    }
    // g(x,u) = int h du, used by the energy ledger (capillary kinds).
    double primitive(double x0, double u) const {
        switch (kind) {
            case ForcingKind::capillary: return 0.5 * u * u - a(x0) * u;
            default: return 0.0;
        }
    }
    bool has_energy_identity() const {
        return kind == ForcingKind::zero || kind == ForcingKind::capillary;
    }
};

struct ForcingEval {
    double psi = 0;
    double psi_u = 0;
    std::array<double, 2> psi_grad{}; // psi_k, covector
    std::array<double, 2> psi_du{};   // psi_{u_k}, vector components
};

ForcingEval eval_forcing(const ForcingSpec& spec, const std::array<double, 2>& x, double u,
                         const SlopeInfo& slope, int dim);

struct AdmissibilityReport {
    double c_psi_u = 0;      // from psi_u >= -C
    double c_structure = 0;  // from psi - psi_{u_k} u_k >= -C
    double c_grad = 0;       // from sigma^{kl} psi_k psi_l <= C omega^2
    double c_xpsi = 0;       // from sigma_{kl} psi_{u_k} psi_{u_l} <= C
    double c_min = 0;        // max of the four
    bool infeasible = false;
};

// Smallest admissible constant for the current discrete state.
AdmissibilityReport admissibility_margin(const ForcingSpec& spec, const MetricChart& chart,
                                         const Field& u);

} // namespace mcf
