#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "pctsim/report.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

struct CliOptions {
    std::string config_path;
    std::string out_dir = "out";
    std::string plots = "off";
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::size_t trials = 0;
    std::size_t threads = 0;
    bool threads_set = false;
    bool desk_scale = false;
};

pctsim::ExperimentSpec load_spec(const CliOptions& opt) {
    using namespace pctsim;
    ExperimentSpec spec;
    if (!opt.config_path.empty()) {
        std::ifstream f(opt.config_path);
        if (!f) {
            std::cerr << "error: cannot open config file '" << opt.config_path << "'\n";
            std::exit(kExitIo);
        }
        json doc;
        try {
            f >> doc;
        } catch (const json::parse_error& e) {
            std::cerr << "config parse error: " << e.what() << "\n";
            std::exit(kExitConfig);
        }
        spec = spec_from_json(doc, opt.desk_scale ? std::optional<bool>(true) : std::nullopt);
    } else {
        spec = desk_scale_spec();
    }
    if (opt.seed_set) spec.base_seed = opt.seed;
    if (opt.trials > 0) spec.n_trials = opt.trials;
    if (opt.threads_set) spec.threads = opt.threads;
    return spec;
}

void print_summary(const pctsim::RunReport& report) {
    using namespace pctsim;
    std::cout << to_string(report.kind) << " [" << to_string(report.codec) << "] seed "
              << report.base_seed << "\n";
    for (const auto& p : report.points) {
        std::cout << "  point " << p.point_value << ": pooled BER " << p.pooled_ber << ", Q "
                  << p.pooled_q_db << " dB";
        if (p.pooled_censored) std::cout << " (censored: no errors observed)";
        std::cout << "\n";
    }
    if (report.optimum_power_dbm)
        std::cout << "  optimum launch power: " << *report.optimum_power_dbm << " dBm\n";
    if (report.q_opt_db) std::cout << "  no-PDL baseline Q: " << *report.q_opt_db << " dB\n";
    for (std::size_t i = 0; i < report.delta_q_db.size(); ++i)
        std::cout << "  dQ(theta=" << report.points[i].point_value << " deg) = "
                  << report.delta_q_db[i] << " dB\n";
    if (report.outage)
        std::cout << "  outage Pr[Q < " << report.q_threshold_db << " dB] = "
                  << report.outage->probability << "  [" << report.outage->wilson_low << ", "
                  << report.outage->wilson_high << "] (95% Wilson)\n";
    if (report.cumulated_pdl_rms_db > 0.0)
        std::cout << "  cumulated PDL rms: " << report.cumulated_pdl_rms_db << " dB\n";
    if (!report.notes.empty()) std::cout << "  note: " << report.notes << "\n";
    std::cout << "  wall time: " << report.wall_seconds << " s\n";
}

}  // namespace

int main(int argc, char** argv) {
    using namespace pctsim;
    CLI::App app{"CO-OFDM superchannel simulator with phase-conjugate twin codecs"};
    app.require_subcommand(1);
    app.fallthrough();

    CliOptions opt;
    app.add_option("--config", opt.config_path, "JSON experiment configuration");
    app.add_option("--out", opt.out_dir, "output directory")->capture_default_str();
    app.add_option("--plots", opt.plots, "write SVG plots: on|off")
        ->check(CLI::IsMember({"on", "off"}))
        ->capture_default_str();
    auto* seed_opt = app.add_option("--seed", opt.seed, "base seed");
    auto* trials_opt = app.add_option("--trials", opt.trials, "Monte Carlo trials / seeds per point");
    auto* threads_opt = app.add_option("--threads", opt.threads, "worker threads (0 = hardware)");
    app.add_flag("--desk-scale", opt.desk_scale, "force the desk-scale preset as the base config");

    auto* cmd_run = app.add_subcommand("run", "run the configured experiment once");
    auto* cmd_power = app.add_subcommand("sweep-power", "Q-factor vs launch power");
    auto* cmd_theta = app.add_subcommand("sweep-theta", "Q penalty vs aligned-PDL angle");
    auto* cmd_mc = app.add_subcommand("monte-carlo", "statistical-PDL Monte Carlo");
    auto* cmd_dump = app.add_subcommand("dump-constellation", "write the coded constellation LUT");

    CLI11_PARSE(app, argc, argv);
    opt.seed_set = seed_opt->count() > 0;
    opt.threads_set = threads_opt->count() > 0;
    (void)trials_opt;

    try {
        if (cmd_dump->parsed()) {
            std::filesystem::create_directories(opt.out_dir);
            const auto path = std::filesystem::path(opt.out_dir) / "constellation.csv";
            std::ofstream f(path);
            if (!f) {
                std::cerr << "error: cannot write " << path << "\n";
                return kExitIo;
            }
            CodedConstellation::standard().dump_csv(f);
            std::cout << "wrote " << path.string() << "\n";
            return kExitOk;
        }

        ExperimentSpec spec = load_spec(opt);

        RunReport report;
        if (cmd_power->parsed()) {
            if (spec.sweep_powers_dbm.empty())
                spec.sweep_powers_dbm = {-8, -7, -6, -5, -4, -3, -2, -1, 0, 1, 2};
            report = sweep_launch_power(spec, spec.sweep_powers_dbm);
        } else if (cmd_theta->parsed()) {
            if (spec.sweep_thetas_deg.empty()) spec.sweep_thetas_deg = {0, 15, 30, 45};
            report = sweep_theta(spec, spec.sweep_thetas_deg);
        } else if (cmd_mc->parsed()) {
            report = monte_carlo_statistical(spec);
        } else if (cmd_run->parsed()) {
            switch (spec.kind) {
                case ExperimentKind::power_sweep:
                    report = sweep_launch_power(spec, spec.sweep_powers_dbm);
                    break;
                case ExperimentKind::theta_sweep:
                    report = sweep_theta(spec, spec.sweep_thetas_deg);
                    break;
                case ExperimentKind::pdl_sweep:
                    report = sweep_pdl(spec, spec.sweep_pdl_db);
                    break;
                case ExperimentKind::monte_carlo:
                    report = monte_carlo_statistical(spec);
                    break;
                case ExperimentKind::single:
                    report = run_single(spec);
                    break;
            }
        }

        EmitOptions emit;
        emit.plots = opt.plots == "on";
        emit.prefix = to_string(report.kind);
        const auto files = emit_report(report, spec, opt.out_dir, emit);
        print_summary(report);
        for (const auto& f : files) std::cout << "wrote " << f << "\n";
        return kExitOk;
    } catch (const ConfigError& e) {
        std::cerr << "configuration error:\n";
        for (const auto& d : e.details) std::cerr << "  - " << d << "\n";
        return kExitConfig;
    } catch (const std::system_error& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
}
