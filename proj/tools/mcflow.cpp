// mcflow: run configured experiments from the command line.
//
// exit codes: 0 pass, 1 assertion failure, 2 config error, 3 numerical failure
#include <CLI11.hpp>

#include <iostream>

#include "mcf/config.hpp"

int main(int argc, char** argv) {
    CLI::App app{"graph curvature flow driver"};
    app.require_subcommand(1);

    std::string config_path;
    CLI::App* run = app.add_subcommand("run", "run an experiment from a JSON config");
    run->add_option("config", config_path, "path to the config file")->required();

    std::string suite_name;
    CLI::App* suite = app.add_subcommand("suite", "run a named preset end to end");
    suite->add_option("name", suite_name, "preset name (mt1_constant, mt2_capillary, ...)")
        ->required();

    CLI::App* check = app.add_subcommand("check", "run the stepping-free identity battery");

    CLI11_PARSE(app, argc, argv);

    try {
        mcf::ExperimentConfig cfg;
        if (run->parsed()) {
            cfg = mcf::load_config(config_path);
        } else if (suite->parsed()) {
            cfg = mcf::preset(mcf::experiment_from_name(suite_name));
        } else if (check->parsed()) {
            mcf::ExperimentOutcome out = mcf::run_identity_suite("identity");
            std::cout << out.summary_json;
            return out.exit_code;
        }
        mcf::ExperimentOutcome out = mcf::run_experiment(cfg);
        std::cout << out.summary_json;
        std::cerr << "artifacts: " << out.output_dir << "\n";
        return out.exit_code;
    } catch (const mcf::ParseError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const mcf::ValidationError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const mcf::Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}
