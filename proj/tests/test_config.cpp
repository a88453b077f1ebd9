#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mcf/config.hpp"

using namespace mcf;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("mcflow_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int counter() {
        static int c = 0;
        return c++;
    }
};

} // namespace

TEST_CASE("experiment names round-trip") {
    for (auto k : {ExperimentKind::mt1_constant, ExperimentKind::mt2_capillary,
                   ExperimentKind::mt3_translator, ExperimentKind::glt_longtime,
                   ExperimentKind::identity_suite, ExperimentKind::custom})
        CHECK(experiment_from_name(experiment_name(k)) == k);
    CHECK_THROWS_AS(experiment_from_name("nope"), ValidationError);
}

TEST_CASE("presets resolve to documented defaults") {
    auto c = preset(ExperimentKind::mt1_constant);
    CHECK(c.shape.kind == ShapeKind::interval);
    CHECK(c.h == doctest::Approx(0.005)); // 201 nodes on (0,1)
    CHECK(c.u0.kind == U0Spec::Kind::cos_mode);
    CHECK(c.stepping.tol_steady == doctest::Approx(1e-10));

    auto t = preset(ExperimentKind::mt3_translator);
    CHECK(t.shape.kind == ShapeKind::disk);
    CHECK(t.phi.c0 == doctest::Approx(0.3));
    REQUIRE(t.eps_seq.size() == 9);
    CHECK(t.eps_seq.front() == doctest::Approx(1.0));
    CHECK(t.eps_seq.back() == doctest::Approx(1.0 / 256));
    CHECK(t.delta0 == doctest::Approx(0.5));
}

TEST_CASE("config round-trip: parse(emit(cfg)) = cfg") {
    for (auto k : {ExperimentKind::mt1_constant, ExperimentKind::mt2_capillary,
                   ExperimentKind::mt3_translator, ExperimentKind::glt_longtime}) {
        auto c = preset(k);
        std::string once = config_to_json(c);
        auto back = parse_config(once, "roundtrip");
        CHECK(config_to_json(back) == once);
    }
}

TEST_CASE("minimal preset file resolves all defaults") {
    TempDir tmp;
    fs::path f = tmp.path / "run.json";
    std::ofstream(f) << "{\"experiment\": \"mt1_constant\"}\n";
    auto c = load_config(f.string());
    CHECK(c.experiment == ExperimentKind::mt1_constant);
    CHECK(c.h == doctest::Approx(0.005));
    CHECK(c.stepping.t_end == doctest::Approx(20.0));
}

TEST_CASE("config errors") {
    SUBCASE("malformed text: ParseError") {
        CHECK_THROWS_AS(parse_config("{not json", "inline"), ParseError);
    }
    SUBCASE("unknown key: ValidationError") {
        CHECK_THROWS_AS(parse_config("{\"experiment\": \"custom\", \"typo\": 1}", "inline"),
                        ValidationError);
    }
    SUBCASE("contact angle at 1: ContactAngleTooSteep") {
        std::string text = "{\"experiment\": \"mt2_capillary\", \"phi\": {\"c0\": 1.0}}";
        CHECK_THROWS_AS(parse_config(text, "inline"), ContactAngleTooSteep);
    }
    SUBCASE("nonpositive h: ValidationError") {
        CHECK_THROWS_AS(parse_config("{\"experiment\": \"custom\", \"h\": -0.1}", "inline"),
                        ValidationError);
    }
    SUBCASE("random u0 without a seed: ValidationError") {
        std::string text =
            "{\"experiment\": \"custom\", \"u0\": {\"kind\": \"random_smooth\"}}";
        CHECK_THROWS_AS(parse_config(text, "inline"), ValidationError);
    }
}

TEST_CASE("random initial data is deterministic per seed") {
    ShapeSpec sh;
    sh.kind = ShapeKind::disk;
    PhiSpec phi;
    DomainMesh m = build_mesh(sh, 0.2, phi);
    U0Spec s;
    s.kind = U0Spec::Kind::random_smooth;
    s.amplitude = 0.3;
    s.seed = 7;
    Field a = make_u0(m, s);
    Field b = make_u0(m, s);
    s.seed = 8;
    Field c = make_u0(m, s);
    bool identical = true, differs = false;
    for (int i = 0; i < m.n0(); ++i)
        for (int j = 0; j < m.n1(); ++j) {
            identical = identical && a.at(i, j) == b.at(i, j);
            differs = differs || a.at(i, j) != c.at(i, j);
        }
    CHECK(identical);
    CHECK(differs);
}

TEST_CASE("bowl initial data matches the contact slope on the disk") {
    ShapeSpec sh;
    sh.kind = ShapeKind::disk;
    PhiSpec phi;
    phi.c0 = 0.3;
    DomainMesh m = build_mesh(sh, 0.1, phi);
    U0Spec s;
    s.kind = U0Spec::Kind::bowl;
    s.amplitude = -0.5 * 0.3 / std::sqrt(1 - 0.09);
    Field u = make_u0(m, s);
    apply_bc(m, u);
    // compatible data: the ghost closure is already satisfied by the parabola
    CHECK(boundary_residual(m, u) < 1e-12);
}

TEST_CASE("run_experiment emits the documented artifacts deterministically") {
    TempDir tmp;
    setenv("MCFLOW_OUT_ROOT", tmp.path.c_str(), 1);
    ExperimentConfig c = preset(ExperimentKind::custom);
    c.shape.kind = ShapeKind::interval;
    c.h = 0.02;
    c.u0.kind = U0Spec::Kind::cos_mode;
    c.u0.amplitude = 0.5;
    c.stepping.t_end = 0.2;
    c.stepping.tol_steady = 0;
    c.snapshot_times = {0.1};
    c.output = "runA";
    auto r1 = run_experiment(c);
    CHECK(r1.exit_code == 0);
    fs::path d1 = r1.output_dir;
    for (const char* name : {"resolved_config.json", "monitors.csv", "summary.json",
                             "snapshot_final.csv", "snapshot_t0.1.csv"})
        CHECK(fs::exists(d1 / name));
    // monitors column layout
    std::string head = slurp(d1 / "monitors.csv").substr(0, 200);
    CHECK(head.rfind("t,dt,u_min,u_max,ut_max,ut_decay,omega_max,U_t,eta_omega_max,"
                     "eta_argmax_on_boundary,energy_lhs,energy_rhs",
                     0) == 0);
    // bit-identical rerun
    c.output = "runB";
    auto r2 = run_experiment(c);
    CHECK(slurp(d1 / "monitors.csv") == slurp(fs::path(r2.output_dir) / "monitors.csv"));
    CHECK(slurp(d1 / "snapshot_final.csv") ==
          slurp(fs::path(r2.output_dir) / "snapshot_final.csv"));
    unsetenv("MCFLOW_OUT_ROOT");
}

TEST_CASE("identity suite passes and reports every check") {
    TempDir tmp;
    auto out = run_identity_suite((tmp.path / "identity").string());
    CHECK(out.exit_code == 0);
    for (const char* name : {"commutation_order", "sphere_ricci", "divergence_form_order",
                             "cauchy_bounds", "parder_g"}) {
        CAPTURE(name);
        CHECK(out.summary_json.find(name) != std::string::npos);
    }
}
