// python bindings: enough surface to drive experiments and poke the core
// operations from scripts and smoke tests.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mcf/config.hpp"

namespace py = pybind11;

PYBIND11_MODULE(_mcflow, m) {
    m.doc() = "graph curvature flow core";

    m.def("contact_closure", &mcf::contact_closure, py::arg("u_T"), py::arg("phi"),
          "boundary slope u_gamma solving u_gamma = phi * omega");

    m.def("preset_json", [](const std::string& name) {
        return mcf::config_to_json(mcf::preset(mcf::experiment_from_name(name)));
    });

    m.def("stable_dt", [](const std::string& config_json) {
        mcf::ExperimentConfig cfg = mcf::parse_config(config_json, "<python>");
        mcf::DomainMesh mesh = mcf::build_mesh(cfg.shape, cfg.h, cfg.phi, cfg.ntheta);
        return mcf::stable_dt(mesh, cfg.stepping.cfl, cfg.stepping.use_filter);
    });

    m.def("run_experiment", [](const std::string& config_json) {
        mcf::ExperimentConfig cfg = mcf::parse_config(config_json, "<python>");
        mcf::ExperimentOutcome out = mcf::run_experiment(cfg);
        py::dict d;
        d["exit_code"] = out.exit_code;
        d["output_dir"] = out.output_dir;
        d["summary_json"] = out.summary_json;
        return d;
    });

    m.def("run_identity_suite", [](const std::string& outdir) {
        mcf::ExperimentOutcome out = mcf::run_identity_suite(outdir);
        py::dict d;
        d["exit_code"] = out.exit_code;
        d["output_dir"] = out.output_dir;
        d["summary_json"] = out.summary_json;
        return d;
    });

    py::register_exception<mcf::ValidationError>(m, "ValidationError");
    py::register_exception<mcf::ParseError>(m, "ConfigParseError");
}
