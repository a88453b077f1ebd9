#pragma once
#include <functional>
#include <string>

#include "mcf/domain.hpp"
#include "mcf/forcing.hpp"

namespace mcf {

struct FlowConfig {
    double cfl = 0.4;
    double dt_override = 0;  // 0: derive from stable_dt
    double t_end = 10.0;
    double tol_steady = 1e-10;
    double tol_trans = 1e-8;
    int record_every = 0;    // 0: every step in 1d, every 10 steps in 2d
    int window = 50;         // consecutive records required for a verdict
    double blowup = 1e6;     // guard on |u| and omega
    double chi0 = -1;        // <0: auto, max(0, -min psi_u) seen so far
    double eta_N = 1.0, eta_K = 1.0;
    bool use_filter = true;  // azimuthal stability filter on pole meshes
};

struct MonitorRecord {
    double t = 0, dt = 0;
    double u_min = 0, u_max = 0;
    double ut_max = 0, ut_decay = 0;
    double omega_max = 1, U_t = 0;
    double eta_omega_max = 0;
    int eta_argmax_on_boundary = 0;
    double energy_lhs = 0, energy_rhs = 0;
};

struct MonitorSeries {
    std::vector<MonitorRecord> rec;
};

enum class Verdict { constant, steady, translator, timeout, rejected };

const char* verdict_name(Verdict v);

struct FlowResult {
    Field u;
    double t = 0;
    long steps = 0;
    double dt = 0;
    Verdict verdict = Verdict::timeout;
    double limit_value = 0;   // verdict == constant: the limit constant
    double speed = 0;         // verdict == translator: spatial mean of u_t
    double ut_max_final = 0;
    MonitorSeries monitors;
    std::string note;         // failure detail for rejected runs
};

// Side products of one right-hand-side sweep.
struct RhsStats {
    double min_psi_u = 0;
    double omega_max = 1;
    double dissipation = 0; // integral of u_t^2 / omega
};

// u_t = g^{ij} u_ij - psi at every owned node; ghosts of u must be filled.
Field flow_rhs(const DomainMesh& mesh, const ForcingSpec& forcing, const Field& u,
               RhsStats* stats = nullptr);

// Largest explicit-Euler step the mesh admits at unit graph stiffness, with
// the azimuthal symbol capped at the accuracy cutoff on pole meshes.
double stable_dt(const DomainMesh& mesh, double cfl, bool use_filter = true);

// One explicit Euler step; throws StepRejected on the blowup guard.
void flow_step(const DomainMesh& mesh, const ForcingSpec& forcing, Field& u, double dt,
               double blowup);

// snapshot_times must be sorted ascending; the callback sees the state the
// first time t reaches each entry.
using SnapshotFn = std::function<void(double t, const Field& u)>;
FlowResult run_flow(const DomainMesh& mesh, const ForcingSpec& forcing, const Field& u0,
                    const FlowConfig& cfg, const std::vector<double>& snapshot_times = {},
                    const SnapshotFn& snap = {});

// CSV emission (column layout documented in the README).
void write_monitors_csv(const MonitorSeries& s, const std::string& path);
void write_snapshot_csv(const DomainMesh& mesh, const Field& u, const std::string& path);

} // namespace mcf
