#pragma once
#include "mcf/flow.hpp"

namespace mcf {

struct EllipticConfig {
    double tol = 0;        // 0: 1e-9 on 1d grids, 1e-7 on 2d grids
    double flow_tol = 1e-6; // hand-off point from pseudo-time to Newton
    double t_end = 200;    // pseudo-time budget
    int max_newton = 40;
    FlowConfig flow;
};

struct EllipticSolution {
    Field u;
    double residual_pde = 0; // max |g^{ij} u_ij - psi|
    double residual_bc = 0;  // max |u_gamma - phi omega|
    int newton_iters = 0;
    bool used_flow = false;
};

double elliptic_tol(const EllipticConfig& cfg, const DomainMesh& mesh);

// Steady solve of g^{ij} u_ij = psi with the contact-angle closure:
// pseudo-time flow into Newton's basin, then damped Newton on the discrete
// residual. Throws NoConvergence when neither stage reaches tolerance.
EllipticSolution solve_capillary(const DomainMesh& mesh, const ForcingSpec& forcing,
                                 const Field& u0, const EllipticConfig& cfg);

// Newton refinement alone, from a caller-supplied start.
EllipticSolution newton_refine(const DomainMesh& mesh, const ForcingSpec& forcing,
                               const Field& start, double tol, int max_iters);

// max-norm gap between the solutions reached from two seeds.
double uniqueness_probe(const DomainMesh& mesh, const ForcingSpec& forcing, const Field& seed1,
                        const Field& seed2, const EllipticConfig& cfg);

// C = -(boundary integral of phi) / (integral of 1/omega) for the profile u_inf.
double translating_speed(const DomainMesh& mesh, const Field& u_inf);

struct EpsilonStep {
    double eps = 0;
    double eu_min = 0, eu_max = 0;  // extrema of eps * u_eps
    double eu_abs_max = 0;
    double eu_osc = 0;              // spatial oscillation of eps * u_eps
    double profile_shift = 0;       // max |(u - mean u) - previous profile|
    double residual_pde = 0;
};

struct EpsilonPathResult {
    std::vector<EpsilonStep> steps;
    double C_estimate = 0; // area mean of eps*u at the smallest eps
    Field profile;         // u_eps minus its mean at the smallest eps
};

// Regularized path g^{ij} u_ij = eps*u over a decreasing eps sequence with
// warm starts; eps*u_eps tends to the translating speed.
EpsilonPathResult epsilon_path(const DomainMesh& mesh, const std::vector<double>& eps_seq,
                               const EllipticConfig& cfg);

} // namespace mcf
