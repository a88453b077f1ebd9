#pragma once
#include <string>

#include "mcf/elliptic.hpp"

namespace mcf {

enum class ExperimentKind {
    mt1_constant,
    mt2_capillary,
    mt3_translator,
    glt_longtime,
    identity_suite,
    custom
};

const char* experiment_name(ExperimentKind k);
ExperimentKind experiment_from_name(const std::string& s); // throws ValidationError

struct U0Spec {
    // bowl: value + amplitude * rfrac^2; with amplitude matched to the
    // contact slope it gives initial data compatible with the angle BC
    enum class Kind { constant, cos_mode, bowl, random_smooth } kind = Kind::constant;
    double value = 0;     // constant offset
    double amplitude = 0; // cos/random amplitude
    int mode = 1;         // cos: number of half waves across the radius
    long seed = -1;       // random_smooth; must be set explicitly
};

struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::custom;
    ShapeSpec shape;
    double h = 0.02;
    int ntheta = 0;
    PhiSpec phi;
    ForcingSpec forcing;
    U0Spec u0;
    FlowConfig stepping;
    EllipticConfig elliptic;
    std::vector<double> eps_seq;   // translator regularization path
    double delta0 = 0.5;           // convexity margin parameter
    double tol_final = 1e-8;       // final-oscillation assertion for mt1-type runs
    std::vector<double> snapshot_times;
    std::string output = "out";
};

// Preset configs keyed to the experiment battery.
ExperimentConfig preset(ExperimentKind kind);

ExperimentConfig load_config(const std::string& path); // ParseError / ValidationError
ExperimentConfig parse_config(const std::string& text, const std::string& origin);
std::string config_to_json(const ExperimentConfig& cfg); // fully resolved echo

// Initial datum over the mesh (random_smooth: seeded cubic in the ambient
// plane coordinates, deterministic per seed).
Field make_u0(const DomainMesh& mesh, const U0Spec& spec);

struct ExperimentOutcome {
    int exit_code = 0; // 0 pass, 1 assertion failure, 3 numerical failure
    std::string output_dir;
    std::string summary_json;
};

// Resolves the output directory (MCFLOW_OUT_ROOT prefixes it when set),
// writes resolved_config.json, monitors.csv, snapshots and summary.json.
ExperimentOutcome run_experiment(const ExperimentConfig& cfg);

// Stepping-free geometry/graph property battery; returns a JSON report.
ExperimentOutcome run_identity_suite(const std::string& output_dir);

} // namespace mcf
