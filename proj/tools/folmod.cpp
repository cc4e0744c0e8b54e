// folmod: p-modulus of foliations on 2-D Riemannian charts.
//
//   folmod <modulus|variation|critical|pair|identity|sweep>
//          --config FILE [--out FILE] [--format json|csv] [--grid NxM] [--tol T]
//
// Prints a JSON report to stdout. --out writes a sidecar file (CSV by
// default: sweep rows for the sweep command, the checks table otherwise).
// FOLMOD_THREADS caps internal parallelism; FOLMOD_TIMING=1 adds wall-clock
// timing to the report (off by default so reports are byte-reproducible).
//
// Exit codes: 0 all checks pass, 2 numeric check failed, 3 config/schema
// error, 4 solver non-convergence, 1 unexpected failure.

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "folmod/report.hpp"
#include "folmod/scenario.hpp"

namespace {

folmod::GridSpec parse_grid_arg(const std::string& text) {
    const auto sep = text.find_first_of("xX");
    if (sep == std::string::npos)
        throw folmod::ConfigError("--grid expects NxM, e.g. 128x128");
    try {
        const int nu = std::stoi(text.substr(0, sep));
        const int nv = std::stoi(text.substr(sep + 1));
        if (nu < 2 || nv < 2) throw folmod::ConfigError("--grid must be at least 2x2");
        return {nu, nv};
    } catch (const std::invalid_argument&) {
        throw folmod::ConfigError("--grid expects NxM, e.g. 128x128");
    }
}

void apply_tol_override(folmod::Scenario& sc, const std::string& command, double tol) {
    if (command == "modulus")
        sc.tol.modulus_gap = tol;
    else if (command == "variation")
        sc.tol.variation_gap = tol;
    else if (command == "critical")
        sc.tol.criticality = tol;
    else if (command == "pair")
        sc.tol.pair_residual = tol;
    else if (command == "identity")
        sc.tol.identity = tol;
}

int run(const std::string& command, const std::string& config_path, const std::string& out_path,
        const std::string& format, const std::string& grid_arg, double tol_arg, bool has_tol) {
    folmod::Scenario sc = folmod::load_scenario_file(config_path);
    if (!grid_arg.empty()) sc.grid = parse_grid_arg(grid_arg);
    if (has_tol) apply_tol_override(sc, command, tol_arg);

    folmod::RunResult result = folmod::run_command(command, sc);
    std::cout << result.report.dump(2) << "\n";

    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) throw folmod::ConfigError("cannot write output file '" + out_path + "'");
        if (format == "csv")
            out << result.csv;
        else
            out << result.report.dump(2) << "\n";
    }
    return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"p-modulus of foliations on 2-D Riemannian charts"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    std::string format = "csv";
    std::string grid_arg;
    double tol_arg = 0.0;
    bool has_tol = false;

    const std::vector<std::string> commands = {"modulus", "variation", "critical",
                                               "pair",    "identity",  "sweep"};
    for (const std::string& name : commands) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "scenario JSON file")->required();
        sub->add_option("--out", out_path, "sidecar output file");
        sub->add_option("--format", format, "sidecar format: json|csv")
            ->check(CLI::IsMember({"json", "csv"}));
        sub->add_option("--grid", grid_arg, "override grid, NxM");
        sub->add_option("--tol", tol_arg, "override the command's primary threshold")
            ->each([&](const std::string&) { has_tol = true; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 3;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        return run(command, config_path, out_path, format, grid_arg, tol_arg, has_tol);
    } catch (const folmod::ConfigError& e) {
        std::cout << folmod::json{{"error", e.what()}, {"exit_code", 3}}.dump(2) << "\n";
        return 3;
    } catch (const folmod::Error& e) {
        std::cout << folmod::json{{"error", e.what()}, {"exit_code", 1}}.dump(2) << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cout << folmod::json{{"error", e.what()}, {"exit_code", 1}}.dump(2) << "\n";
        return 1;
    }
}
