// germlab: command-line runner for the germ geometry scenarios.
//
//   germlab run <scenario.cfg | catalog-name> [--seed N] [--out report.json] [--csv dir]
//   germlab catalog
//
// Exit codes: 0 expected verdict matched (or none expected), 1 mismatch,
// 2 inconclusive, 3 error.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "germlab/experiments.hpp"

using namespace germlab;

int main(int argc, char** argv) {
    CLI::App app{"germ geometry laboratory"};
    app.require_subcommand(1);

    std::string scenario_arg;
    std::string out_path;
    std::string csv_dir;
    uint64_t seed_override = 0;
    bool has_seed = false;

    auto* run = app.add_subcommand("run", "run a scenario config file or catalog entry");
    run->add_option("scenario", scenario_arg, "scenario .cfg path or catalog name")
        ->required();
    run->add_option("--seed", seed_override, "override the scenario seed")
        ->each([&](const std::string&) { has_seed = true; });
    run->add_option("--out", out_path, "write the JSON report here");
    run->add_option("--csv", csv_dir, "dump sampled clouds as CSV into this directory");

    auto* catalog = app.add_subcommand("catalog", "list built-in scenarios");

    CLI11_PARSE(app, argc, argv);

    if (catalog->parsed()) {
        for (const auto& name : catalog_names()) std::cout << name << "\n";
        return 0;
    }

    try {
        Scenario scenario;
        if (std::filesystem::exists(scenario_arg)) {
            std::ifstream is(scenario_arg);
            std::stringstream buf;
            buf << is.rdbuf();
            scenario = parse_scenario_config(buf.str());
        } else {
            scenario = catalog_scenario(scenario_arg);
        }
        if (has_seed) scenario.seed = seed_override;

        RunOptions opts;
        opts.csv_dir = csv_dir;
        const RunResult result = run_scenario(scenario, opts);
        const std::string text = result.report.dump(2);
        if (!out_path.empty()) {
            std::ofstream os(out_path);
            os << text << "\n";
        }
        std::cout << text << "\n";
        return result.exit_code;
    } catch (const Error& e) {
        std::cerr << "error (" << e.code_name() << "): " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
