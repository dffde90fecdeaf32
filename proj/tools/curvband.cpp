// Command-line front end: curvband <geometry|gauge-check|spectrum|evolve> --config FILE

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "curvband/cli.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"Charged particle on a surface of revolution: geometry, gauge, spectra, evolution"};

    std::string command;
    std::string config_path;
    std::string output;
    std::string mode;
    std::vector<int> m_list;
    std::size_t n_points = 0;
    double dt = 0.0;
    std::size_t steps = 0;

    app.add_option("command", command, "geometry | gauge-check | spectrum | evolve")
        ->required()
        ->check(CLI::IsMember({"geometry", "gauge-check", "spectrum", "evolve"}));
    app.add_option("--config", config_path, "run configuration file")->required();
    auto* output_opt = app.add_option("--output", output, "output directory (output_path)");
    auto* mode_opt = app.add_option("--mode", mode, "as-written | hermitian-corrected (mode)")
                         ->check(CLI::IsMember({"as-written", "hermitian-corrected"}));
    auto* m_opt = app.add_option("--m", m_list, "azimuthal indices, comma separated (m_list)")->delimiter(',');
    auto* n_opt = app.add_option("--n-points", n_points, "radial grid points (grid.n_points)");
    auto* dt_opt = app.add_option("--dt", dt, "time step (dt)");
    auto* steps_opt = app.add_option("--steps", steps, "number of time steps (steps)");

    CLI11_PARSE(app, argc, argv);

    try {
        curvband::RunConfig config = curvband::load_config(config_path);
        if (*output_opt) config.output_path = output;
        if (*mode_opt) config.mode = curvband::parse_mode(mode);
        if (*m_opt) config.m_list = m_list;
        if (*n_opt) config.n_points = n_points;
        if (*dt_opt) config.dt = dt;
        if (*steps_opt) config.steps = steps;
        curvband::validate(config);

        const auto result = curvband::run_command(config, curvband::parse_command(command));
        std::cout << result.summary;
        if (result.exit_code != 0) std::cerr << "error: " << result.error << '\n';
        return result.exit_code;
    } catch (const curvband::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
