#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "balpot/errors.hpp"
#include "balpot/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Weighted equilibrium measures by partial balayage on a uniform grid"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    int levels = 3;
    std::string rhos;

    auto* solve = app.add_subcommand("solve", "solve one configuration and write fields and report.json");
    solve->add_option("--config", config_path, "JSON run configuration")->required();
    solve->add_option("--out", out_dir, "output directory (default: output_dir from the config)");

    auto* converge = app.add_subcommand("converge", "grid refinement study against the closed-form reference");
    converge->add_option("--config", config_path, "JSON run configuration")->required();
    converge->add_option("--levels", levels, "number of grids n, 2n, 4n, ...")->check(CLI::PositiveNumber);
    converge->add_option("--out", out_dir, "output directory (default: output_dir from the config)");

    auto* sweep = app.add_subcommand("rho-sweep", "solve at several extension radii on one grid");
    sweep->add_option("--config", config_path, "JSON run configuration")->required();
    sweep->add_option("--rhos", rhos, "comma-separated radii")->required();
    sweep->add_option("--out", out_dir, "output directory (default: output_dir from the config)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : balpot::exit_config;
    }

    balpot::RunConfig config;
    std::vector<double> radii;
    try {
        config = balpot::load_config(config_path);
        if (sweep->parsed()) radii = balpot::parse_rho_list(rhos);
    } catch (const balpot::Error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return balpot::exit_config;
    }
    const std::filesystem::path out = out_dir.empty() ? config.output_dir : out_dir;

    if (solve->parsed()) return balpot::run_solve(config, out, std::cerr);
    if (converge->parsed()) return balpot::run_convergence(config, levels, out, std::cerr);
    return balpot::run_rho_sweep(config, radii, out, std::cerr);
}
