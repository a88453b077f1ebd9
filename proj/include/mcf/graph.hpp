#pragma once
#include "mcf/chart.hpp"

namespace mcf {

// Pointwise graph data at one node.
struct SlopeInfo {
    double omega = 1.0;
    double du2 = 0.0;                   // |Du|^2
    std::array<double, 2> uk_cov{};     // u_k
    std::array<double, 2> uk_con{};     // u^k = sigma^{kl} u_l
    std::array<double, 2> v{};          // v^k = u^k / omega
    std::array<double, 2> vM{};         // horizontal normal components (same as v)
};

// All graph-of-u quantities over the owned nodes.
struct GraphQuantities {
    Field omega;
    VecField grad_cov, grad_con, v;
    SymField ginv; // g^{ij} = sigma^{ij} - u^i u^j / omega^2
    SymField hess; // covariant u_ij
    Field H, A2;
};

SlopeInfo slope_and_normal(const MetricChart& chart, const Field& u, int i, int j = 0);

// g^{ij} from the inverse metric and the contravariant gradient.
Sym2 graph_inverse_metric(const Sym2& sigma_inv, const std::array<double, 2>& uk_con,
                          double omega, int dim);

GraphQuantities compute_graph(const MetricChart& chart, const Field& u);

// Mean curvature speed g^{ij}(Du) u_{ij} at every owned node (u needs ghosts).
Field mean_curvature_speed(const MetricChart& chart, const Field& u);

// Independent divergence-form evaluation omega * div(Du/omega), used only for
// cross-validation; valid on strictly interior owned nodes (others left 0).
Field divergence_form_speed(const MetricChart& chart, const Field& u);

// Tensor norms in the sigma inner product.
double norm2_cov2(const Sym2& sigma_inv, const Sym2& T, int dim);   // (0,2) tensor
double norm2_cov1(const Sym2& sigma_inv, const std::array<double, 2>& S, int dim);
double norm2_con1(const Sym2& sigma, const std::array<double, 2>& X, int dim);

} // namespace mcf
