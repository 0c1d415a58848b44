#pragma once

// Command-line front end.  Exit codes: 0 success, 1 verification failure,
// 2 input/config error, 3 numerical failure.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "config.hpp"
#include "master.hpp"
#include "protocol.hpp"
#include "rwa.hpp"
#include "serialize.hpp"
#include "svg.hpp"

namespace paraosc {

namespace cli_detail {

inline std::filesystem::path resolve(const std::filesystem::path& out_dir,
                                     const std::string& file) {
    const std::filesystem::path p(file);
    return p.is_absolute() ? p : out_dir / p;
}

inline std::string stem_suffix(const std::string& file, const std::string& suffix) {
    const std::filesystem::path p(file);
    std::filesystem::path q = p.parent_path() / (p.stem().string() + suffix);
    q += p.extension();
    return q.string();
}

inline void sample_p_up(Trajectory& tr, int shots, std::uint64_t seed) {
    SampleRng rng(seed);
    for (double& p : tr.p_up) {
        const double exact = std::clamp(p, 0.0, 1.0);
        p = static_cast<double>(rng.binomial(shots, exact)) / shots;
    }
}

inline PlotSeries p_up_series(const Trajectory& tr, const std::string& name) {
    return PlotSeries{name, tr.times, tr.p_up};
}

}  // namespace cli_detail

inline int cmd_simulate(const RunConfig& cfg_in, const std::filesystem::path& out_dir,
                        bool strict, bool quiet) {
    namespace fs = std::filesystem;
    const auto t_start = std::chrono::steady_clock::now();
    RunConfig cfg = cfg_in;

    const std::vector<double> times = cfg.times_seconds();
    HamiltonianSpec hs;
    hs.form = HamiltonianForm::para_driven;
    hs.model = cfg.model;
    hs.coupling = cfg.coupling();
    const Operator H = build_hamiltonian(cfg.space, hs);
    const StateVector psi0 = initial_state(cfg);

    EvolveOptions opt;
    opt.model = cfg.model;
    opt.max_step = cfg.max_step;
    opt.strict_leakage = strict;
    opt.record_snapshots = cfg.outputs.snapshots;

    Json report;
    std::vector<std::string> files;
    std::vector<std::string> warnings;
    double max_leakage = 0.0;

    Trajectory traj = evolve_unitary(H, psi0, times, cfg.method, opt);
    if (cfg.sampling.enabled)
        cli_detail::sample_p_up(traj, cfg.sampling.shots, cfg.sampling.seed);
    max_leakage = std::max(max_leakage, traj.max_leakage);
    warnings.insert(warnings.end(), traj.warnings.begin(), traj.warnings.end());

    const fs::path csv_path = cli_detail::resolve(out_dir, cfg.outputs.csv);
    write_text_atomic(csv_path, to_csv(traj));
    files.push_back(csv_path.string());

    if (!cfg.outputs.json.empty()) {
        const fs::path json_path = cli_detail::resolve(out_dir, cfg.outputs.json);
        write_text_atomic(json_path, to_json(traj, cfg.outputs.snapshots).dump(2) + "\n");
        files.push_back(json_path.string());
    }

    Trajectory traj_hi, traj_lo;
    if (cfg.envelope) {
        EvolveOptions eopt = opt;
        eopt.record_snapshots = false;
        std::tie(traj_hi, traj_lo) =
            anisotropy_envelope(cfg.space, cfg.model, psi0, times, cfg.envelope->first,
                                cfg.envelope->second, cfg.method, eopt);
        const fs::path hi_path =
            cli_detail::resolve(out_dir, cli_detail::stem_suffix(cfg.outputs.csv, "_gplus"));
        const fs::path lo_path =
            cli_detail::resolve(out_dir, cli_detail::stem_suffix(cfg.outputs.csv, "_gminus"));
        write_text_atomic(hi_path, to_csv(traj_hi));
        write_text_atomic(lo_path, to_csv(traj_lo));
        files.push_back(hi_path.string());
        files.push_back(lo_path.string());
        max_leakage = std::max({max_leakage, traj_hi.max_leakage, traj_lo.max_leakage});
    }

    if (cfg.noise.enabled) {
        EvolveOptions nopt = opt;
        nopt.record_snapshots = false;
        Trajectory noisy =
            evolve_master(H, DensityMatrix::from_state(psi0), times, cfg.noise, nopt);
        const fs::path noisy_path =
            cli_detail::resolve(out_dir, cli_detail::stem_suffix(cfg.outputs.csv, "_noisy"));
        write_text_atomic(noisy_path, to_csv(noisy));
        files.push_back(noisy_path.string());
        max_leakage = std::max(max_leakage, noisy.max_leakage);
        warnings.insert(warnings.end(), noisy.warnings.begin(), noisy.warnings.end());
    }

    if (!cfg.outputs.svg.empty()) {
        std::vector<PlotSeries> series;
        PlotOptions popt;
        popt.title = std::string(to_string(cfg.model.kind)) + " p=" +
                     std::to_string(cfg.model.order);
        popt.x_label = cfg.grid.dimensionless ? "g t" : "t / s";
        popt.y_label = "P_up";
        popt.unit_y = true;
        const std::vector<double>& axis = cfg.grid.values;
        if (cfg.envelope) {
            series.push_back(PlotSeries{"P_up g+", axis, traj_hi.p_up});
            series.push_back(PlotSeries{"P_up g-", axis, traj_lo.p_up});
            popt.band_first_two = true;
        }
        series.push_back(PlotSeries{"P_up", axis, traj.p_up});
        const fs::path svg_path = cli_detail::resolve(out_dir, cfg.outputs.svg);
        write_text_atomic(svg_path, render_svg(series, popt));
        files.push_back(svg_path.string());
    }

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    report["config"] = config_to_json(cfg);
    report["files"] = files;
    report["wall_time_s"] = wall;
    report["max_leakage"] = max_leakage;
    report["warnings"] = warnings;
    const fs::path report_path = out_dir / "report.json";
    write_text_atomic(report_path, report.dump(2) + "\n");
    if (!quiet) std::cout << report.dump(2) << std::endl;
    return 0;
}

inline int cmd_verify(ParaKind kind, int order, int d_x, int d_y, ParaBranch branch,
                      const std::string& json_out, double corruption, bool quiet) {
    const ParaModel model = make_model(kind, order, branch);
    if (d_x <= 0 || d_y <= 0) {
        // room for the full ladder (para-Fermi) or a useful guarded ladder
        const int d = kind == ParaKind::para_fermi ? order / 2 + 3 : std::max(8, order / 2 + 6);
        if (d_x <= 0) d_x = d;
        if (d_y <= 0) d_y = d;
    }
    VerifyOptions vopt;
    vopt.corruption = corruption;
    const RelationReport rep = verify_relations(make_space(d_x, d_y), model, vopt);

    if (!json_out.empty())
        write_text_atomic(json_out, to_json(rep).dump(2) + "\n");
    if (!quiet) {
        for (const RelationCheck& c : rep.checks)
            std::cout << (c.pass ? "pass" : "FAIL") << "  " << c.name
                      << "  residual=" << fmt_g17(c.residual) << '\n';
        std::cout << (rep.all_pass ? "all identities hold" : "verification failed")
                  << std::endl;
    }
    if (!rep.all_pass) {
        std::cerr << "verification failed:";
        for (const RelationCheck& c : rep.checks)
            if (!c.pass) std::cerr << ' ' << c.name;
        std::cerr << std::endl;
        return 1;
    }
    return 0;
}

inline int cmd_prep(Mode mode, int n, double omega01, int trunc, const std::string& json_out,
                    bool quiet) {
    const int target_levels = trunc > 0 ? trunc : n + 4;
    const int spectator_levels = 4;
    const SpaceSpec space = mode == Mode::x ? make_space(target_levels, spectator_levels)
                                            : make_space(spectator_levels, target_levels);
    const PrepPlan plan = plan_fock_prep(mode, n, omega01);
    const StateVector start = basis_state(space, Spin::down, 0, 0);
    const SequenceResult res = simulate_sequence_detailed(space, plan, start);
    const StateVector target = mode == Mode::x ? basis_state(space, Spin::down, n, 0)
                                               : basis_state(space, Spin::down, 0, n);
    const double fid = fidelity(res.final_state, target);

    Json j = to_json(plan);
    j["fidelity"] = fid;
    j["step_fidelities"] = res.waypoint_fidelities;
    j["warnings"] = res.warnings;
    if (!json_out.empty())
        write_text_atomic(json_out, j.dump(2) + "\n");
    if (!quiet) std::cout << j.dump(2) << std::endl;
    return 0;
}

inline int cmd_fit(const std::string& scan_csv, double omega01, double gamma, int n_max,
                   const std::string& json_out, bool quiet) {
    ReadoutScan scan = read_scan_csv(scan_csv);
    scan.omega01 = omega01;
    scan.gamma = gamma;
    const PopulationFit fit = fit_populations(scan, omega01, gamma, n_max);
    const Json j = to_json(fit);
    if (!json_out.empty())
        write_text_atomic(json_out, j.dump(2) + "\n");
    if (!quiet) std::cout << j.dump(2) << std::endl;
    return 0;
}

inline int cmd_plot(const std::vector<std::string>& inputs, const std::string& columns,
                    const std::string& svg_out, const std::string& title, bool quiet) {
    if (inputs.empty()) throw std::invalid_argument("plot: need at least one input CSV");

    std::vector<std::string> cols;
    {
        size_t start = 0;
        while (start <= columns.size()) {
            const size_t comma = columns.find(',', start);
            const std::string c = columns.substr(
                start, comma == std::string::npos ? std::string::npos : comma - start);
            if (!c.empty()) cols.push_back(c);
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (cols.empty()) throw std::invalid_argument("plot: no columns selected");
    }

    std::vector<PlotSeries> series;
    bool all_probability = true;
    for (size_t f = 0; f < inputs.size(); ++f) {
        const CsvTable table = read_csv(inputs[f]);
        if (table.rows.empty())
            throw std::invalid_argument("plot: no data rows in " + inputs[f]);
        if (table.column_index("t_s") < 0)
            throw std::invalid_argument("plot: missing column 't_s' in " + inputs[f]);
        const std::vector<double> t = table.column("t_s");
        for (const std::string& c : cols) {
            if (table.column_index(c) < 0)
                throw std::invalid_argument("plot: unknown column '" + c + "' in " + inputs[f]);
            std::string name = c;
            if (inputs.size() > 1) name += "[" + std::to_string(f) + "]";
            series.push_back(PlotSeries{name, t, table.column(c)});
            if (c.rfind("P_", 0) != 0) all_probability = false;
        }
    }

    PlotOptions popt;
    popt.title = title;
    popt.x_label = "t_s";
    popt.y_label = cols.size() == 1 ? cols[0] : "";
    popt.unit_y = all_probability;
    popt.band_first_two = inputs.size() == 2 && cols.size() == 1;
    write_text_atomic(svg_out, render_svg(series, popt));
    if (!quiet) std::cout << "wrote " << svg_out << std::endl;
    return 0;
}

inline int run_cli(int argc, const char* const* argv) {
    CLI::App app{"spin-boson para-oscillator simulator"};
    app.require_subcommand(1);

    // simulate
    std::string config_path, out_dir = ".";
    long long seed_override = -1;
    bool strict = false, quiet = false;
    CLI::App* sim = app.add_subcommand("simulate", "run a configured evolution");
    sim->add_option("--config", config_path, "run configuration JSON")->required();
    sim->add_option("--out", out_dir, "output directory");
    sim->add_option("--seed", seed_override, "override sampling seed");
    sim->add_flag("--strict", strict, "treat truncation leakage as an error");
    sim->add_flag("--quiet", quiet, "suppress stdout report");

    // verify
    std::string v_kind = "para_fermi", v_branch = "spin_down", v_json;
    int v_order = 2, v_dx = 0, v_dy = 0;
    double v_corrupt = 0.0;
    bool v_quiet = false;
    CLI::App* ver = app.add_subcommand("verify", "check the defining operator identities");
    ver->add_option("--kind", v_kind, "para_fermi|para_bose")->required();
    ver->add_option("--order", v_order, "even order p")->required();
    ver->add_option("--dx", v_dx, "Fock levels in x (default: fits the ladder)");
    ver->add_option("--dy", v_dy, "Fock levels in y (default: fits the ladder)");
    ver->add_option("--branch", v_branch, "spin_down|spin_up (para_bose vacuum branch)");
    ver->add_option("--json", v_json, "write the relation report JSON here");
    ver->add_flag("--quiet", v_quiet, "suppress per-identity lines");
    ver->add_option("--corrupt", v_corrupt, "")->group("");  // test hook, hidden

    // prep
    std::string p_mode = "x", p_json;
    int p_n = 0, p_trunc = 0;
    double p_omega01 = 0.0;
    bool p_quiet = false;
    CLI::App* prep = app.add_subcommand("prep", "plan and simulate Fock-state preparation");
    prep->add_option("--mode", p_mode, "x|y")->required();
    prep->add_option("--n", p_n, "target Fock level")->required();
    prep->add_option("--omega01", p_omega01, "base Rabi frequency, rad/s")->required();
    prep->add_option("--trunc", p_trunc, "Fock levels kept on the target mode");
    prep->add_option("--json", p_json, "write the pulse table JSON here");
    prep->add_flag("--quiet", p_quiet, "suppress stdout report");

    // fit
    std::string f_scan, f_json;
    double f_omega01 = 0.0, f_gamma = 0.0;
    int f_nmax = 5;
    bool f_quiet = false;
    CLI::App* fit = app.add_subcommand("fit", "fit Fock populations from a scan CSV");
    fit->add_option("--scan", f_scan, "scan CSV with columns t_s,P_up,shots")->required();
    fit->add_option("--omega01", f_omega01, "base Rabi frequency, rad/s")->required();
    fit->add_option("--gamma", f_gamma, "base decay rate, 1/s")->required();
    fit->add_option("--nmax", f_nmax, "highest Fock level fitted");
    fit->add_option("--json", f_json, "write the fit JSON here");
    fit->add_flag("--quiet", f_quiet, "suppress stdout report");

    // plot
    std::vector<std::string> pl_inputs;
    std::string pl_columns = "P_up", pl_out = "plot.svg", pl_title;
    bool pl_quiet = false;
    CLI::App* plot = app.add_subcommand("plot", "render trajectory/scan CSV to SVG");
    plot->add_option("--input", pl_inputs, "input CSV (repeat for a two-curve band)")
        ->required();
    plot->add_option("--columns", pl_columns, "comma-separated column names");
    plot->add_option("--out", pl_out, "output SVG path");
    plot->add_option("--title", pl_title, "plot title");
    plot->add_flag("--quiet", pl_quiet, "suppress stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (sim->parsed()) {
            std::ifstream in(config_path);
            if (!in) throw std::invalid_argument("cannot open config: " + config_path);
            Json doc;
            try {
                doc = Json::parse(in);
            } catch (const Json::parse_error& e) {
                throw std::invalid_argument("config is not valid JSON: " + std::string(e.what()));
            }
            RunConfig cfg = parse_run_config(doc);
            if (seed_override >= 0) cfg.sampling.seed = static_cast<std::uint64_t>(seed_override);
            return cmd_simulate(cfg, out_dir, strict, quiet);
        }
        if (ver->parsed()) {
            ParaKind kind;
            if (v_kind == "para_fermi" || v_kind == "pF") kind = ParaKind::para_fermi;
            else if (v_kind == "para_bose" || v_kind == "pB") kind = ParaKind::para_bose;
            else throw std::invalid_argument("verify: --kind must be para_fermi or para_bose");
            ParaBranch branch;
            if (v_branch == "spin_down") branch = ParaBranch::spin_down;
            else if (v_branch == "spin_up") branch = ParaBranch::spin_up;
            else throw std::invalid_argument("verify: --branch must be spin_down or spin_up");
            return cmd_verify(kind, v_order, v_dx, v_dy, branch, v_json, v_corrupt, v_quiet);
        }
        if (prep->parsed()) {
            Mode mode;
            if (p_mode == "x") mode = Mode::x;
            else if (p_mode == "y") mode = Mode::y;
            else throw std::invalid_argument("prep: --mode must be x or y");
            return cmd_prep(mode, p_n, p_omega01, p_trunc, p_json, p_quiet);
        }
        if (fit->parsed())
            return cmd_fit(f_scan, f_omega01, f_gamma, f_nmax, f_json, f_quiet);
        if (plot->parsed())
            return cmd_plot(pl_inputs, pl_columns, pl_out, pl_title, pl_quiet);
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 2;
    } catch (const std::runtime_error& e) {
        std::cerr << "numerical error: " << e.what() << std::endl;
        return 3;
    }
}

}  // namespace paraosc
