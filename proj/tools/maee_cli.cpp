#include <CLI11.hpp>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "maee/harness.hpp"

namespace {

void print_rows(const std::vector<maee::ResultRow>& rows, const std::string& format,
                const std::string& out_path) {
    if (!out_path.empty()) {
        maee::emit_results(rows, format, out_path);
        std::cerr << "wrote " << rows.size() << " rows to " << out_path << "\n";
        return;
    }
    if (format == "json") std::cout << nlohmann::json(rows).dump(2) << "\n";
    else std::cout << maee::results_to_csv(rows);
}

int run_motor_curves(const std::string& out_path) {
    const maee::MotorParams m = maee::MotorParams::am2224();
    std::string csv = "omega_rad_s,torque_nm,linear_speed_m_s,power_w\n";
    const int samples = 553;
    for (int i = 0; i < samples; ++i) {
        const double omega = m.omega_max * i / (samples - 1);
        const double v = omega * m.lead_radius;
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g,%.9g\n", omega,
                      maee::pull_out_torque(m, omega), v, maee::motor_power(m, v));
        csv += buf;
    }
    if (out_path.empty()) {
        std::cout << csv;
    } else {
        std::ofstream out(out_path);
        if (!out) {
            std::cerr << "cannot open " << out_path << "\n";
            return 1;
        }
        out << csv;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Movable-antenna energy-efficiency simulator"};
    app.require_subcommand(1);

    std::string config_path, out_path, format = "csv", scale = "desk", figure_name;
    std::uint64_t seed = 0;
    int realizations = 0, threads = 0;
    bool seed_set = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--out", out_path, "output file (stdout if omitted)");
        cmd->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
        cmd->add_option("--seed", seed, "master seed override")->each([&](const std::string&) {
            seed_set = true;
        });
        cmd->add_option("--realizations", realizations, "realization count override");
        cmd->add_option("--threads", threads, "worker thread count");
    };

    CLI::App* run = app.add_subcommand("run", "run an experiment from a config file");
    run->add_option("--config", config_path, "experiment config path")->required();
    add_common(run);

    CLI::App* figure = app.add_subcommand("figure", "run a preset figure sweep");
    figure->add_option("name", figure_name, "fig5..fig13")->required();
    figure->add_option("--scale", scale, "desk or full")->check(CLI::IsMember({"desk", "full"}));
    add_common(figure);

    CLI::App* motor = app.add_subcommand("motor-curves", "emit torque/power curves as CSV");
    motor->add_option("--out", out_path, "output file (stdout if omitted)");

    CLI::App* selftest = app.add_subcommand("selftest", "run a quick end-to-end sanity check");
    add_common(selftest);

    CLI11_PARSE(app, argc, argv);

    try {
        if (motor->parsed()) return run_motor_curves(out_path);

        maee::ExperimentConfig cfg;
        if (run->parsed()) {
            cfg = maee::load_experiment(config_path);
        } else if (figure->parsed()) {
            cfg = maee::figure_config(figure_name, scale, seed_set ? seed : 1);
        } else { // selftest: tiny single-user sweep
            cfg.scenario.num_users = 1;
            cfg.schemes = {maee::Scheme::Proposed, maee::Scheme::FPA};
            cfg.axis = maee::SweepAxis::ArrayLengthOverLambda;
            cfg.sweep_values = {4, 6};
            cfg.realizations = 5;
            cfg.grid_step_multiplier = 4.0;
        }
        if (seed_set) cfg.master_seed = seed;
        if (realizations > 0) cfg.realizations = realizations;
        if (threads > 0) cfg.threads = threads;
        if (run->parsed() && !out_path.empty()) cfg.out_path = out_path;
        if (run->parsed() && format != "csv") cfg.format = format;

        const std::vector<maee::ResultRow> rows = maee::run_experiment(cfg);
        if (selftest->parsed()) {
            for (const maee::ResultRow& r : rows)
                if (r.failures > 0 || !(r.ee_mean > 0.0)) {
                    std::cerr << "selftest: failure in row " << r.scheme << "@" << r.sweep_value
                              << "\n";
                    return 1;
                }
            std::cerr << "selftest passed (" << rows.size() << " rows)\n";
        }
        print_rows(rows, run->parsed() ? cfg.format : format,
                   run->parsed() ? cfg.out_path : out_path);
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
