// contdyn: run matrix continuity-dynamics scenarios from JSON configs.
//
//   contdyn run <config>       one scenario, CSV written to output_path
//   contdyn sweep <config>     one CSV per value of the config's sweep section
//   contdyn validate <config>  parse and validate only
//
// Exit codes: 0 ok, 1 validation error, 2 numeric event (with --strict), 3 I/O error.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "contdyn/scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitNumeric = 2;
constexpr int kExitIo = 3;

void print_config_error(const contdyn::ConfigError& e) {
    std::cerr << "error: " << e.what();
    if (!e.field().empty())
        std::cerr << " [field: " << e.field() << "]";
    std::cerr << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Continuity dynamics of time-dependent matrices"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::string> output_dir;
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
    bool strict = false;

    app.add_option("--output-dir", output_dir, "Directory for output files (overrides output_path's directory)");
    app.add_option("--threads", threads, "Worker threads for sweeps (0 = hardware concurrency)");
    app.add_option("--seed", seed, "Override the config seed");
    app.add_flag("--strict", strict, "Exit with code 2 when a numeric event occurs");

    auto* run = app.add_subcommand("run", "Run a scenario");
    auto* sweep = app.add_subcommand("sweep", "Run the config's parameter sweep");
    auto* validate = app.add_subcommand("validate", "Validate a config without running it");
    for (auto* sub : {run, sweep, validate})
        sub->fallthrough()->add_option("config", config_path, "Scenario config (JSON)")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        const contdyn::ScenarioConfig config = contdyn::load_config(config_path);

        if (validate->parsed()) {
            std::cout << "ok: " << contdyn::to_string(config.scenario) << ", "
                      << config.n_steps << " steps on [" << config.t0 << ", " << config.tf << "]";
            if (config.sweep)
                std::cout << ", sweep over " << config.sweep->parameter << " ("
                          << config.sweep->values.size() << " values)";
            std::cout << "\n";
            return kExitOk;
        }

        contdyn::RunOptions options;
        options.output_dir = output_dir;
        options.seed = seed;
        options.threads = threads;

        contdyn::RunRecord record;
        if (sweep->parsed()) {
            if (!config.sweep) {
                std::cerr << "error: config has no sweep section [field: sweep]\n";
                return kExitValidation;
            }
            record = contdyn::run_sweep(config, options);
        } else {
            record = contdyn::run_scenario(config, options);
        }
        std::cout << contdyn::to_json(record).dump(2) << "\n";
        if (strict && record.has_numeric_event())
            return kExitNumeric;
        return kExitOk;
    } catch (const contdyn::ConfigError& e) {
        print_config_error(e);
        return kExitValidation;
    } catch (const contdyn::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const contdyn::ParameterError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const contdyn::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
}
