// topopt: run, sweep and oracle commands over an INI configuration.
//
// Exit status: 0 converged, 2 not converged, 1 error.

#include "topopt/config.hpp"
#include "topopt/scenario.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

namespace {

std::vector<std::string> split_csv(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
    }
    return out;
}

int report(const topopt::ScenarioResult& r) {
    if (r.status == topopt::ExitStatus::error) std::cerr << "error: " << r.error << '\n';
    return static_cast<int>(r.status);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Level-set topology optimization with a no-enclosed-cavity constraint"};
    app.require_subcommand(1);

    std::string config_path;
    std::string output;
    int max_iters = -1;
    int snapshot_every = -1;
    bool quiet = false;

    auto* run = app.add_subcommand("run", "Run the scenario described by the config");
    run->add_option("--config", config_path, "Configuration file")->required()->check(CLI::ExistingFile);
    run->add_option("--output", output, "Output directory (overrides scenario.output)");
    run->add_option("--max-iters", max_iters, "Iteration cap (overrides optimizer.max_iterations)")
        ->check(CLI::NonNegativeNumber);
    run->add_option("--snapshot-every", snapshot_every, "Write a VTK design every N iterations (0: final only)")
        ->check(CLI::NonNegativeNumber);
    run->add_flag("--quiet", quiet, "No per-iteration progress");

    std::string param;
    std::string values;
    auto* sweep = app.add_subcommand("sweep", "Run the config once per value of one parameter");
    sweep->add_option("--config", config_path, "Configuration file")->required()->check(CLI::ExistingFile);
    sweep->add_option("--param", param, "Parameter as section.key, e.g. cavity.a_p")->required();
    sweep->add_option("--values", values, "Comma separated values")->required();
    sweep->add_option("--output", output, "Output directory (overrides scenario.output)");
    sweep->add_option("--max-iters", max_iters, "Iteration cap")->check(CLI::NonNegativeNumber);
    sweep->add_flag("--quiet", quiet, "No per-iteration progress");

    auto* oracle = app.add_subcommand("oracle", "Flood-fill void analysis of the config's geometry");
    oracle->add_option("--config", config_path, "Configuration file")->required()->check(CLI::ExistingFile);
    oracle->add_option("--output", output, "Output directory (overrides scenario.output)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        topopt::RunConfig config = topopt::load_config(config_path);
        if (!output.empty()) config.output_dir = output;
        topopt::ScenarioOptions options;
        options.log = quiet ? nullptr : &std::cout;
        options.max_iterations = max_iters;
        options.snapshot_every = snapshot_every;

        if (*run) return report(topopt::run_scenario(config, options));

        if (*oracle) {
            config.kind = topopt::ScenarioKind::oracle_check;
            config.validate();
            return report(topopt::run_scenario(config, options));
        }

        const auto list = split_csv(values);
        const int threads = topopt::worker_threads();
        const auto results = topopt::run_sweep(config, param, list, threads, options);
        for (std::size_t i = 0; i < results.size(); ++i) {
            if (results[i].status == topopt::ExitStatus::error)
                std::cerr << "error (" << param << "=" << list[i] << "): " << results[i].error << '\n';
        }
        return static_cast<int>(topopt::combined_status(results));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
