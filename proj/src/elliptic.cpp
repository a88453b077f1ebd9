#include "mcf/elliptic.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>

namespace mcf {

namespace {

// Column grouping for finite-difference Jacobians. Two columns may share a
// group only when no residual row depends on both; the dependency footprint
// is the stencil box widened by the ghost closure, plus the across-pole
// band on disk/star-shaped meshes.
struct Coloring {
    std::vector<std::vector<int>> rows_of_col; // candidate rows per column
    std::vector<int> color;
    int ncolors = 0;
};

Coloring build_coloring(const DomainMesh& mesh) {
    const Grid& g = mesh.chart.grid;
    int n0 = g.n0(), n1 = g.n1();
    int N = n0 * n1;
    bool per = g.ax[1].periodic;
    Coloring col;
    col.rows_of_col.resize(N);
    auto wrap = [&](int j) { return ((j % n1) + n1) % n1; };
    for (int i = 0; i < n0; ++i)
        for (int j = 0; j < n1; ++j) {
            std::vector<int>& rows = col.rows_of_col[i * n1 + j];
            for (int di = -2; di <= 2; ++di) {
                int ii = i + di;
                if (ii < 0 || ii >= n0) continue;
                for (int dj = -2; dj <= 2; ++dj) {
                    int jj = j + dj;
                    if (per)
                        jj = wrap(jj);
                    else if (g.dim == 2 && (jj < 0 || jj >= n1))
                        continue;
                    if (g.dim == 1) jj = 0;
                    rows.push_back(ii * n1 + jj);
                }
            }
            if (mesh.has_pole && i <= 2) {
                int half = n1 / 2;
                for (int dj = -2; dj <= 2; ++dj)
                    rows.push_back(wrap(j - half + dj)); // row index with i = 0
            }
            std::sort(rows.begin(), rows.end());
            rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
        }
    col.color.assign(N, -1);
    std::vector<std::vector<int>> row_colors(N);
    std::vector<char> forbidden;
    for (int c = 0; c < N; ++c) {
        forbidden.assign(col.ncolors + 1, 0);
        for (int r : col.rows_of_col[c])
            for (int used : row_colors[r])
                if (used < (int)forbidden.size()) forbidden[used] = 1;
        int pick = 0;
        while (pick < (int)forbidden.size() && forbidden[pick]) ++pick;
        col.color[c] = pick;
        col.ncolors = std::max(col.ncolors, pick + 1);
        for (int r : col.rows_of_col[c]) row_colors[r].push_back(pick);
    }
    return col;
}

Field residual(const DomainMesh& mesh, const ForcingSpec& forcing, const Field& u) {
    Field uu = u;
    apply_bc(mesh, uu);
    return flow_rhs(mesh, forcing, uu);
}

double max_abs(const Field& f, const DomainMesh& mesh) {
    double m = 0;
    for (int i = 0; i < mesh.n0(); ++i)
        for (int j = 0; j < mesh.n1(); ++j) m = std::max(m, std::abs(f.at(i, j)));
    return m;
}

double mesh_mean(const DomainMesh& mesh, const Field& f) {
    double num = 0, den = 0;
    for (int i = 0; i < mesh.n0(); ++i)
        for (int j = 0; j < mesh.n1(); ++j) {
            num += mesh.weight.at(i, j) * f.at(i, j);
            den += mesh.weight.at(i, j);
        }
    return num / den;
}

} // namespace

double elliptic_tol(const EllipticConfig& cfg, const DomainMesh& mesh) {
    if (cfg.tol > 0) return cfg.tol;
    return mesh.chart.dim == 1 ? 1e-9 : 1e-7;
}

EllipticSolution newton_refine(const DomainMesh& mesh, const ForcingSpec& forcing,
                               const Field& start, double tol, int max_iters) {
    const Grid& g = mesh.chart.grid;
    int n1 = g.n1();
    int N = g.n0() * n1;
    Coloring col = build_coloring(mesh);

    EllipticSolution sol;
    sol.u = start;
    Field F = residual(mesh, forcing, sol.u);
    double fnorm = max_abs(F, mesh);

    Eigen::SparseMatrix<double> J(N, N);
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    std::vector<Eigen::Triplet<double>> trip;

    for (int it = 0; it < max_iters && fnorm > tol; ++it) {
        trip.clear();
        for (int c = 0; c < col.ncolors; ++c) {
            Field up = sol.u;
            std::vector<int> cols;
            for (int p = 0; p < N; ++p)
                if (col.color[p] == c) {
                    up.at(p / n1, p % n1) += 1e-7 * (1 + std::abs(up.at(p / n1, p % n1)));
                    cols.push_back(p);
                }
            Field Fp = residual(mesh, forcing, up);
            for (int p : cols) {
                double delta = up.at(p / n1, p % n1) - sol.u.at(p / n1, p % n1);
                for (int r : col.rows_of_col[p]) {
                    double d = (Fp.at(r / n1, r % n1) - F.at(r / n1, r % n1)) / delta;
                    if (d != 0) trip.emplace_back(r, p, d);
                }
            }
        }
        // F(u + c) = F(u) - psi_u c exactly (the curvature part is shift
        // invariant), so the true row sums are -psi_u. Enforcing them on the
        // diagonal removes the finite-difference error from the constant
        // mode, which otherwise gets amplified like 1/eps on the
        // regularization path.
        {
            std::vector<double> rowsum(N, 0.0);
            for (const auto& tr : trip) rowsum[tr.row()] += tr.value();
            Field uu = sol.u;
            apply_bc(mesh, uu);
            for (int i = 0; i < g.n0(); ++i)
                for (int j = 0; j < n1; ++j) {
                    SlopeInfo s = slope_and_normal(mesh.chart, uu, i, j);
                    std::array<double, 2> x{g.coord(0, i),
                                            g.dim == 2 ? g.coord(1, j) : 0.0};
                    ForcingEval fe = eval_forcing(forcing, x, uu.at(i, j), s, g.dim);
                    int r = i * n1 + j;
                    trip.emplace_back(r, r, -fe.psi_u - rowsum[r]);
                }
        }
        J.setFromTriplets(trip.begin(), trip.end());
        lu.compute(J);
        if (lu.info() != Eigen::Success)
            throw NoConvergence("Newton Jacobian factorization failed");
        Eigen::VectorXd rhs(N);
        for (int p = 0; p < N; ++p) rhs[p] = -F.at(p / n1, p % n1);
        Eigen::VectorXd du = lu.solve(rhs);

        // Armijo damping on the residual max norm
        double s = 1.0;
        bool accepted = false;
        for (int half = 0; half <= 20; ++half, s *= 0.5) {
            Field cand = sol.u;
            for (int p = 0; p < N; ++p) cand.at(p / n1, p % n1) += s * du[p];
            cand.ghosts_filled = false;
            Field Fc = residual(mesh, forcing, cand);
            double fn = max_abs(Fc, mesh);
            if (fn <= (1 - 1e-4 * s) * fnorm) {
                sol.u = cand;
                F = Fc;
                fnorm = fn;
                accepted = true;
                break;
            }
        }
        sol.newton_iters = it + 1;
        if (!accepted)
            throw NoConvergence("Newton line search stalled at residual " +
                                std::to_string(fnorm));
    }
    sol.residual_pde = fnorm;
    Field uu = sol.u;
    apply_bc(mesh, uu);
    sol.residual_bc = boundary_residual(mesh, uu);
    if (fnorm > tol)
        throw NoConvergence("Newton did not reach tolerance, residual " +
                            std::to_string(fnorm));
    return sol;
}

EllipticSolution solve_capillary(const DomainMesh& mesh, const ForcingSpec& forcing,
                                 const Field& u0, const EllipticConfig& cfg) {
    double tol = elliptic_tol(cfg, mesh);
    FlowConfig fc = cfg.flow;
    fc.t_end = cfg.t_end;
    fc.tol_steady = cfg.flow_tol;
    fc.tol_trans = 0; // never report a translator from the pseudo-time stage
    FlowResult fr = run_flow(mesh, forcing, u0, fc);
    if (fr.verdict == Verdict::rejected)
        throw NoConvergence("pseudo-time stage rejected: " + fr.note);
    EllipticSolution sol = newton_refine(mesh, forcing, fr.u, tol, cfg.max_newton);
    sol.used_flow = true;
    return sol;
}

double uniqueness_probe(const DomainMesh& mesh, const ForcingSpec& forcing, const Field& seed1,
                        const Field& seed2, const EllipticConfig& cfg) {
    EllipticSolution a = solve_capillary(mesh, forcing, seed1, cfg);
    EllipticSolution b = solve_capillary(mesh, forcing, seed2, cfg);
    double gap = 0;
    for (int i = 0; i < mesh.n0(); ++i)
        for (int j = 0; j < mesh.n1(); ++j)
            gap = std::max(gap, std::abs(a.u.at(i, j) - b.u.at(i, j)));
    return gap;
}

double translating_speed(const DomainMesh& mesh, const Field& u_inf) {
    Field uu = u_inf;
    apply_bc(mesh, uu);
    double num = 0;
    for (std::size_t k = 0; k < mesh.boundary.size(); ++k)
        num += mesh.bweight[k] * mesh.boundary[k].phi;
    double den = 0;
    for (int i = 0; i < mesh.n0(); ++i)
        for (int j = 0; j < mesh.n1(); ++j) {
            SlopeInfo s = slope_and_normal(mesh.chart, uu, i, j);
            den += mesh.weight.at(i, j) / s.omega;
        }
    return -num / den;
}

EpsilonPathResult epsilon_path(const DomainMesh& mesh, const std::vector<double>& eps_seq,
                               const EllipticConfig& cfg) {
    EpsilonPathResult out;
    double tol = elliptic_tol(cfg, mesh);
    Field u(mesh.chart.grid);
    Field prev_profile(mesh.chart.grid);
    bool have_prev = false;
    double prev_eps = 0;
    for (double eps : eps_seq) {
        ForcingSpec f;
        f.kind = ForcingKind::linear;
        f.eps = eps;
        EllipticSolution sol;
        if (!have_prev) {
            sol = solve_capillary(mesh, f, u, cfg);
        } else {
            // warm start: eps*u stays near the limiting speed, so rescale
            Field guess = u;
            for (int i = 0; i < mesh.n0(); ++i)
                for (int j = 0; j < mesh.n1(); ++j) guess.at(i, j) *= prev_eps / eps;
            guess.ghosts_filled = false;
            try {
                sol = newton_refine(mesh, f, guess, tol, cfg.max_newton);
            } catch (const NoConvergence&) {
                sol = solve_capillary(mesh, f, guess, cfg);
            }
        }
        u = sol.u;
        EpsilonStep st;
        st.eps = eps;
        st.residual_pde = sol.residual_pde;
        bool first = true;
        for (int i = 0; i < mesh.n0(); ++i)
            for (int j = 0; j < mesh.n1(); ++j) {
                double v = eps * u.at(i, j);
                if (first) {
                    st.eu_min = st.eu_max = v;
                    first = false;
                } else {
                    st.eu_min = std::min(st.eu_min, v);
                    st.eu_max = std::max(st.eu_max, v);
                }
            }
        st.eu_osc = st.eu_max - st.eu_min;
        st.eu_abs_max = std::max(std::abs(st.eu_min), std::abs(st.eu_max));
        double mean = mesh_mean(mesh, u);
        Field prof(mesh.chart.grid);
        double shift = 0;
        for (int i = 0; i < mesh.n0(); ++i)
            for (int j = 0; j < mesh.n1(); ++j) {
                prof.at(i, j) = u.at(i, j) - mean;
                if (have_prev)
                    shift = std::max(shift, std::abs(prof.at(i, j) - prev_profile.at(i, j)));
            }
        st.profile_shift = shift;
        out.steps.push_back(st);
        prev_profile = prof;
        have_prev = true;
        prev_eps = eps;
    }
    if (have_prev) {
        out.profile = prev_profile;
        Field eu(mesh.chart.grid);
        for (int i = 0; i < mesh.n0(); ++i)
            for (int j = 0; j < mesh.n1(); ++j) eu.at(i, j) = prev_eps * u.at(i, j);
        out.C_estimate = mesh_mean(mesh, eu);
    }
    return out;
}

} // namespace mcf
