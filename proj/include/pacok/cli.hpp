#pragma once

// Command-line front end. Every subcommand reproduces one experiment:
//
//   run         --config F           integrate to equilibrium, energy CSV + snapshots
//   converge    --eps-over-h E       temporal convergence table
//   sweep-gamma --gammas ... --seeds bubble counts and power-law fit
//   forces      --config F           equilibrium force balance along y = 0
//   stability   [--config F]         stabilizer lower bounds
//
// Exit codes: 0 ok, 1 configuration or I/O failure, 2 energy increase while
// stability enforcement is on, 64 usage error.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "pacok/analysis.hpp"
#include "pacok/config.hpp"
#include "pacok/csv.hpp"
#include "pacok/snapshot.hpp"
#include "pacok/solver.hpp"

namespace pacok::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_failure = 1;
inline constexpr int exit_energy_increase = 2;
inline constexpr int exit_usage = 64;

inline constexpr const char* usage_text =
    "usage: pacok <command> [options]\n"
    "commands:\n"
    "  run --config FILE [--output-dir DIR]\n"
    "  converge --eps-over-h {5|10|20} [--N 512] [--tau-bench 1e-5] [--T 0.1] [--output-dir DIR]\n"
    "  sweep-gamma --gammas 200,500,2000,5000,20000 --seeds 5 [--N 512] [--output-dir DIR]\n"
    "  forces --config FILE [--output-dir DIR]\n"
    "  stability [--config FILE]\n";

inline Field initial_field(const RunConfig& cfg) {
    switch (cfg.ic) {
    case InitialCondition::disc:
        return ic_disc_indicator(cfg.grid, cfg.model.omega);
    case InitialCondition::tanh_disc:
        return ic_tanh_disc(cfg.grid, cfg.model.omega, cfg.model.eps, cfg.r_shift);
    case InitialCondition::block_random:
        return ic_block_random(cfg.grid, cfg.ic_ratio, cfg.seed);
    case InitialCondition::file:
        return read_snapshot(cfg.ic_file, cfg.grid);
    }
    throw ConfigError("unhandled initial condition");
}

inline std::filesystem::path prepare_output(const std::string& dir) {
    std::filesystem::path p(dir);
    std::filesystem::create_directories(p);
    return p;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    return out;
}

inline std::string snapshot_name(long step) {
    std::ostringstream os;
    os << "snap_" << std::setw(8) << std::setfill('0') << step << ".bin";
    return os.str();
}

struct SimulationOutcome {
    RunResult result;
    SolverParams params;  ///< after stabilizer adjustment
};

/// Shared by `run` and `forces`: integrate, stream the energy log, write snapshots.
inline SimulationOutcome simulate(const RunConfig& cfg, const std::filesystem::path& dir, bool snapshots,
                                  std::ostream& out, std::ostream& err) {
    for (const auto& w : cfg.warnings) err << "warning: " << w << '\n';
    Solver solver(cfg.grid, cfg.model, cfg.solver);
    for (const auto& n : solver.notes()) err << "note: " << n << '\n';

    const Field phi0 = initial_field(cfg);
    std::ofstream log_file = open_output(dir / "energy.csv");
    EnergyLog log(log_file);
    log.append(StepReport{0, 0.0, solver.energy(phi0), 0.0, false});
    if (snapshots) write_snapshot(phi0, dir / snapshot_name(0));

    RunResult r = solver.run(phi0, [&](const StepReport& rep, const Field& phi) {
        log.append(rep);
        if (snapshots && cfg.snapshot_stride > 0 && rep.step % cfg.snapshot_stride == 0)
            write_snapshot(phi, dir / snapshot_name(rep.step));
    });
    write_snapshot(r.phi, dir / "final.bin");
    for (const auto& w : r.warnings) err << "warning: " << w << '\n';

    const EnergyBreakdown& e = r.reports.empty() ? r.initial_energy : r.reports.back().energy;
    out << "steps " << r.steps << (r.converged ? " (converged)" : " (step limit reached)") << '\n'
        << "final energy " << format_real(e.total) << '\n'
        << "volume residual " << format_real(e.volume_residual) << '\n';
    return {std::move(r), solver.params()};
}

inline int status_of(const SimulationOutcome& o) {
    return (o.params.enforce_stability && !o.result.warnings.empty()) ? exit_energy_increase : exit_ok;
}

inline int cmd_run(const std::string& config_path, const std::string& output_dir, std::ostream& out,
                   std::ostream& err) {
    RunConfig cfg = load_config(config_path);
    if (!output_dir.empty()) cfg.output_dir = output_dir;
    const auto dir = prepare_output(cfg.output_dir);
    return status_of(simulate(cfg, dir, true, out, err));
}

inline int cmd_forces(const std::string& config_path, const std::string& output_dir, std::ostream& out,
                      std::ostream& err) {
    RunConfig cfg = load_config(config_path);
    if (!output_dir.empty()) cfg.output_dir = output_dir;
    const auto dir = prepare_output(cfg.output_dir);
    const SimulationOutcome o = simulate(cfg, dir, false, out, err);

    const Forces f = forces(o.result.phi, cfg.model);
    const Field total = f.sum();
    const auto phi_row = cross_section(o.result.phi, 0.0);
    const auto t_row = cross_section(f.tension, 0.0);
    const auto n_row = cross_section(f.nonlocal, 0.0);
    const auto v_row = cross_section(f.volume, 0.0);
    const auto s_row = cross_section(total, 0.0);
    std::ofstream csv = open_output(dir / "forces.csv");
    csv << "x,phi,tension,nonlocal,volume,sum\n";
    for (std::size_t i = 0; i < phi_row.size(); ++i)
        csv << format_real(phi_row[i].coordinate) << ',' << format_real(phi_row[i].value) << ','
            << format_real(t_row[i].value) << ',' << format_real(n_row[i].value) << ','
            << format_real(v_row[i].value) << ',' << format_real(s_row[i].value) << '\n';

    const TanhDeviation dev = tanh_profile_deviation(o.result.phi, cfg.model.eps);
    out << "force balance |sum|_inf " << format_real(spectral::norm_linf(total)) << '\n'
        << "far-field deviation " << format_real(dev.far_field_dev) << '\n'
        << "tanh fit error " << format_real(dev.fit_err) << " at r* = " << format_real(dev.interface_radius) << '\n';
    if (dev.not_radial) err << "warning: NotRadial: angular deviation " << dev.angular_dev << '\n';
    return status_of(o);
}

struct ConvergeOptions {
    double eps_over_h = 20;
    int N = 512;
    double gamma = 100;
    double tau_bench = 1e-5;
    double T = 0.1;
    double first_tau = 0.1;
    int count = 7;
    bool enforce_stability = false;
    std::string output_dir = "out";
};

inline int cmd_converge(const ConvergeOptions& o, std::ostream& out) {
    const GridSpec g = GridSpec::square(o.N);
    ModelParams p;
    p.eps = o.eps_over_h * g.hx();
    p.gamma = o.gamma;
    SolverParams s;
    s.enforce_stability = o.enforce_stability;
    s.tau = o.tau_bench;
    const auto rows = convergence_study(ic_tanh_disc(g, p.omega, p.eps), p, s, halving_taus(o.first_tau, o.count),
                                        o.tau_bench, o.T);

    const auto dir = prepare_output(o.output_dir);
    std::ofstream csv = open_output(dir / "convergence.csv");
    csv << "tau,error,rate\n";
    out << std::setw(12) << "tau" << std::setw(16) << "error" << std::setw(16) << "rel. error" << std::setw(10)
        << "rate" << '\n';
    for (const auto& r : rows) {
        csv << format_real(r.tau) << ',' << format_real(r.error) << ',' << (r.rate ? format_real(*r.rate) : "")
            << '\n';
        out << std::setw(12) << r.tau << std::setw(16) << r.error << std::setw(16) << r.relative_error
            << std::setw(10) << (r.rate ? std::to_string(*r.rate) : std::string("--")) << '\n';
    }
    return exit_ok;
}

struct SweepOptions {
    std::vector<double> gammas{200, 500, 2000, 5000, 20000};
    int seeds = 5;
    int N = 512;
    double eps_over_h = 10;
    double tau = 5e-3;
    int ratio = 16;
    long max_steps = 200000;
    double threshold = 0.5;
    bool enforce_stability = false;
    std::string output_dir = "out";
};

inline int cmd_sweep(const SweepOptions& o, std::ostream& out) {
    SweepSettings s;
    s.grid = GridSpec::square(o.N);
    s.model.eps = o.eps_over_h * s.grid.hx();
    s.solver.tau = o.tau;
    s.solver.max_steps = o.max_steps;
    s.solver.enforce_stability = o.enforce_stability;
    s.solver.report_stride = std::max(1L, o.max_steps);
    s.ratio = o.ratio;
    s.seeds.clear();
    for (int k = 1; k <= o.seeds; ++k) s.seeds.push_back(static_cast<std::uint64_t>(k));
    s.threshold = o.threshold;
    s.workers = worker_count();

    const auto [counts, runs] = bubble_sweep(o.gammas, s);
    const auto dir = prepare_output(o.output_dir);
    std::ofstream csv = open_output(dir / "bubbles.csv");
    csv << "gamma,seed,count\n";
    for (const auto& r : runs) csv << format_real(r.gamma) << ',' << r.seed << ',' << r.count << '\n';

    std::vector<std::pair<double, double>> points;
    for (const auto& c : counts) {
        out << "gamma " << c.gamma << ": count " << c.count << " over " << c.runs << " runs";
        if (c.disagreement) out << " (replicates disagree)";
        out << '\n';
        if (c.count > 0) points.emplace_back(c.gamma, c.count);
    }
    for (const auto& r : runs)
        if (!r.converged) out << "note: gamma " << r.gamma << " seed " << r.seed << " hit the step limit\n";
    if (points.size() >= 2) {
        const PowerLawFit fit = fit_power_law(points);
        out << "exponent " << format_real(fit.exponent) << '\n' << "prefactor " << format_real(fit.prefactor) << '\n';
    }
    return exit_ok;
}

inline RunConfig stability_defaults() { return parse_config("eps_over_h = 20\ngamma = 100\ntau = 1e-3\n"); }

inline int cmd_stability(const std::string& config_path, std::ostream& out) {
    const RunConfig cfg = config_path.empty() ? stability_defaults() : load_config(config_path);
    const StabilityConstants c = stability_constants(cfg.model, cfg.grid);
    const bool kappa_ok = cfg.solver.kappa_h >= c.kappa_min;
    const bool beta_ok = cfg.solver.beta_h >= c.beta_min;
    out << "inv_laplacian_bound " << format_real(c.inv_laplacian_bound) << '\n'
        << "kappa_min " << format_real(c.kappa_min) << '\n'
        << "beta_min " << format_real(c.beta_min) << '\n'
        << "kappa_h " << format_real(cfg.solver.kappa_h) << (kappa_ok ? " satisfied" : " violated") << '\n'
        << "beta_h " << format_real(cfg.solver.beta_h) << (beta_ok ? " satisfied" : " violated") << '\n';
    return exit_ok;
}

inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    static const std::vector<std::string> commands{"run", "converge", "sweep-gamma", "forces", "stability"};
    if (argc < 2 || std::find(commands.begin(), commands.end(), std::string(argv[1])) == commands.end()) {
        err << usage_text;
        return exit_usage;
    }

    CLI::App app{"Penalised Allen-Cahn-Ohta-Kawasaki simulator", "pacok"};
    app.require_subcommand(1);

    std::string config_path, output_dir;
    auto* run = app.add_subcommand("run", "integrate a configuration to equilibrium");
    run->add_option("--config", config_path, "configuration file")->required();
    run->add_option("--output-dir", output_dir, "override output_dir");

    auto* forces_cmd = app.add_subcommand("forces", "equilibrium forces along y = 0");
    forces_cmd->add_option("--config", config_path, "configuration file")->required();
    forces_cmd->add_option("--output-dir", output_dir, "override output_dir");

    ConvergeOptions conv;
    auto* converge = app.add_subcommand("converge", "temporal convergence study");
    converge->add_option("--eps-over-h", conv.eps_over_h, "interface width in grid spacings")
        ->required()
        ->check(CLI::IsMember({5.0, 10.0, 20.0}));
    converge->add_option("--N", conv.N, "grid points per side");
    converge->add_option("--gamma", conv.gamma, "long-range strength");
    converge->add_option("--tau-bench", conv.tau_bench, "benchmark step");
    converge->add_option("--T", conv.T, "final time");
    converge->add_option("--first-tau", conv.first_tau, "largest tested step");
    converge->add_option("--count", conv.count, "number of halved steps");
    converge->add_flag("--enforce-stability", conv.enforce_stability, "raise stabilizers to the proven minimum");
    converge->add_option("--output-dir", conv.output_dir, "output directory");

    SweepOptions sweep;
    auto* sweep_cmd = app.add_subcommand("sweep-gamma", "bubble count versus gamma");
    sweep_cmd->add_option("--gammas", sweep.gammas, "comma-separated gamma values")->delimiter(',');
    sweep_cmd->add_option("--seeds", sweep.seeds, "replicates per gamma")->check(CLI::PositiveNumber);
    sweep_cmd->add_option("--N", sweep.N, "grid points per side");
    sweep_cmd->add_option("--eps-over-h", sweep.eps_over_h, "interface width in grid spacings");
    sweep_cmd->add_option("--tau", sweep.tau, "time step");
    sweep_cmd->add_option("--ratio", sweep.ratio, "coarse block size of the random start");
    sweep_cmd->add_option("--max-steps", sweep.max_steps, "step limit per run");
    sweep_cmd->add_option("--threshold", sweep.threshold, "bubble level set");
    sweep_cmd->add_flag("--enforce-stability", sweep.enforce_stability, "raise stabilizers to the proven minimum");
    sweep_cmd->add_option("--output-dir", sweep.output_dir, "output directory");

    auto* stability = app.add_subcommand("stability", "stabilizer lower bounds");
    stability->add_option("--config", config_path, "configuration file (defaults to the disc experiment)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        if (*run) return cmd_run(config_path, output_dir, out, err);
        if (*forces_cmd) return cmd_forces(config_path, output_dir, out, err);
        if (*converge) return cmd_converge(conv, out);
        if (*sweep_cmd) return cmd_sweep(sweep, out);
        if (*stability) return cmd_stability(config_path, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_failure;
    }
    return exit_usage;
}

}  // namespace pacok::cli
