// Command-line surface: map synthesis/generation, single-point balance,
// drive-cycle evaluation, full sensitivity sweep, and report emission.
//
// Exit codes: 0 success, 2 validation error, 3 domain error, 4 numerical
// error.  All outputs are deterministic for identical inputs and config.

#include "run_config.hpp"

#include <exeng/sweep.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace {

using namespace exeng;
using exeng::detail::format_double;

EngineMaps make_engine_maps(const cli::RunConfig& rc, const std::string& maps_dir) {
    if (maps_dir.empty()) return synth_maps(rc.mdl.engine, rc.mdl.fuel, rc.synth);
    return load_maps(maps_dir + "/fuel_map.csv", maps_dir + "/texh_map.csv");
}

void check_t0(double t0_K) {
    if (t0_K < kT0Min_K || t0_K > kT0Max_K)
        throw ValidationError("--t0 " + format_double(t0_K) + " K outside [" +
                              format_double(kT0Min_K) + ", " + format_double(kT0Max_K) + "]");
}

void check_egr(double x_egr) {
    if (x_egr < 0.0 || x_egr > kEgrMax)
        throw ValidationError("--egr " + format_double(x_egr) + " outside [0, " +
                              format_double(kEgrMax) + "]");
}

void write_or_print(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw ValidationError("cannot write " + out_path);
    out << text;
    std::cout << "wrote " << out_path << "\n";
}

int cmd_synth_maps(const cli::RunConfig& rc, const std::string& out_dir) {
    const EngineMaps maps = synth_maps(rc.mdl.engine, rc.mdl.fuel, rc.synth);
    std::filesystem::create_directories(out_dir);
    const std::string fuel_csv = out_dir + "/fuel_map.csv";
    const std::string texh_csv = out_dir + "/texh_map.csv";
    save_maps(maps, fuel_csv, texh_csv);
    std::cout << "wrote " << fuel_csv << "\nwrote " << texh_csv << "\n";
    return 0;
}

int cmd_gen_maps(const cli::RunConfig& rc, const std::string& maps_dir,
                 const std::vector<double>& egr_list, const std::string& out_dir, unsigned jobs) {
    if (egr_list.empty()) throw ValidationError("gen-maps: --egr needs at least one rate");
    for (double x : egr_list) check_egr(x);
    const EngineMaps maps = make_engine_maps(rc, maps_dir);
    std::filesystem::create_directories(out_dir);
    for (double x : egr_list) {
        const MeanValueMaps mvm = generate_maps(rc.mdl, maps, x, rc.env, rc.intake, jobs);
        const std::string prefix = out_dir + "/mvm_egr" + format_double(x);
        save_mean_value_maps(mvm, prefix + "_pcyl.csv", prefix + "_tcyl.csv",
                             prefix + "_qwall.csv");
        std::cout << "wrote " << prefix << "_{pcyl,tcyl,qwall}.csv\n";
    }
    return 0;
}

int cmd_balance(const cli::RunConfig& rc, const std::string& maps_dir, double speed_rpm,
                double torque_Nm, double t0_K, double x_egr, unsigned jobs) {
    check_t0(t0_K);
    check_egr(x_egr);
    const EngineMaps maps = make_engine_maps(rc, maps_dir);
    ReferenceState env = rc.env;
    env.T0_K = t0_K;
    const MeanValueMaps mvm = generate_maps(rc.mdl, maps, x_egr, env, rc.intake, jobs);
    const OperatingPoint op{rpm_to_radps(speed_rpm), torque_Nm};
    const ExergyRates r =
        balance(op, x_egr, maps, mvm, rc.mdl.engine, rc.mdl.fuel, rc.mdl.props, env, rc.intake);
    const PercentBreakdown pct = percentages(scale_to_totals(r, 1.0));
    std::cout << "{\n"
              << "  \"speed_rpm\": " << format_double(speed_rpm) << ",\n"
              << "  \"torque_Nm\": " << format_double(torque_Nm) << ",\n"
              << "  \"T0_K\": " << format_double(t0_K) << ",\n"
              << "  \"x_egr\": " << format_double(x_egr) << ",\n"
              << "  \"rates_W\": " << to_json(r) << ",\n"
              << "  \"closure_W\": " << format_double(r.sum()) << ",\n"
              << "  \"percent\": " << to_json(pct) << "\n"
              << "}\n";
    return 0;
}

int cmd_cycle(const cli::RunConfig& rc, const std::string& maps_dir, const std::string& trace_path,
              double t0_K, double x_egr, const std::string& out_path, unsigned jobs) {
    check_t0(t0_K);
    check_egr(x_egr);
    const CycleTrace trace = load_cycle_trace(trace_path);
    const EngineMaps maps = make_engine_maps(rc, maps_dir);
    const SweepModels m{rc.mdl, maps, rc.env, rc.intake};
    const MeanValueMaps mvm = generate_maps(rc.mdl, maps, x_egr, rc.env, rc.intake, jobs);
    const CycleResult cr = evaluate_cycle(trace, t0_K, x_egr, m, mvm);
    const std::string text = "{\n  \"cycle\": \"" + trace.name + "\",\n  \"T0_K\": " +
                             format_double(t0_K) + ",\n  \"x_egr\": " + format_double(x_egr) +
                             ",\n  \"totals_J\": " + to_json(cr.totals) + ",\n  \"percent\": " +
                             to_json(cr.percent) + "\n}\n";
    write_or_print(text, out_path);
    return 0;
}

int cmd_sweep(const cli::RunConfig& rc, const std::string& maps_dir, const std::string& cycles_dir,
              const std::vector<double>& t0_list, const std::vector<double>& egr_list,
              const std::string& out_csv, const std::string& trends_path, unsigned jobs) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(cycles_dir))
        if (entry.is_regular_file() && entry.path().extension() == ".csv")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw ValidationError("sweep: no .csv cycles in " + cycles_dir);
    std::vector<CycleTrace> cycles;
    for (const auto& f : files) cycles.push_back(load_cycle_trace(f.string()));

    SweepGrid grid;
    grid.t0_K = t0_list;
    grid.x_egr = egr_list;
    const EngineMaps maps = make_engine_maps(rc, maps_dir);
    const SweepModels m{rc.mdl, maps, rc.env, rc.intake};
    const SweepResult r = run_sweep(cycles, grid, m, jobs);
    save_sweep_csv(r, out_csv);
    std::cout << "wrote " << out_csv << " (" << r.entries.size() << " cells, config "
              << r.config_hash << ")\n";

    if (grid.t0_K.size() >= 2 && grid.x_egr.size() >= 2)
        write_or_print(to_string(trend_report(r)), trends_path);

    // Cross-cycle spread at the nominal condition, reported when available.
    const bool has_nominal =
        std::count(grid.t0_K.begin(), grid.t0_K.end(), 293.15) &&
        std::count(grid.x_egr.begin(), grid.x_egr.end(), 0.2);
    if (cycles.size() >= 2 && has_nominal) {
        const CycleStats st = cycle_stats(r, 293.15, 0.2);
        std::cout << "cross-cycle spread at T0 = 293.15 K, x_EGR = 0.2 (n = " << st.n << "):\n";
        const PercentBreakdown& mean = st.mean;
        const PercentBreakdown& sd = st.sd;
        for (std::size_t k = 0; k < kTermNames.size(); ++k)
            std::cout << "  " << kTermNames[k] << ": mean " << format_double(term_percent(mean, k))
                      << ", sd " << format_double(term_percent(sd, k)) << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mean-value exergy analysis of a turbocharged diesel engine"};
    app.require_subcommand(1);

    std::string config_path;
    unsigned jobs = 0;
    unsigned seed = 0;
    app.add_option("--config", config_path, "JSON configuration file (defaults built in)")
        ->check(CLI::ExistingFile);
    app.add_option("--jobs", jobs, "worker threads, 0 = hardware concurrency");
    app.add_option("--seed", seed, "reserved; every command is fully deterministic");

    std::string out_dir = "out";
    std::string maps_dir;
    double speed_rpm = 1973.0, torque_Nm = 512.0, t0_K = 293.15, x_egr = 0.2;
    std::string trace_path, out_path, trends_path;
    std::string cycles_dir;
    std::vector<double> egr_list;
    std::vector<double> t0_list = {263.15, 273.15, 283.15, 293.15, 303.15, 313.15};
    std::vector<double> sweep_egr_list = {0.0, 0.1, 0.2, 0.3};
    std::string sweep_csv = "sweep.csv";

    CLI::App* synth = app.add_subcommand("synth-maps", "write synthetic fuel/T_exh calibration maps");
    synth->add_option("--out", out_dir, "output directory")->capture_default_str();

    CLI::App* gen = app.add_subcommand("gen-maps", "generate mean-value cylinder maps per EGR rate");
    gen->add_option("--egr", egr_list, "EGR rates")->required();
    gen->add_option("--maps", maps_dir, "directory with fuel_map.csv/texh_map.csv (default: synthesize)");
    gen->add_option("--out", out_dir, "output directory")->capture_default_str();

    CLI::App* bal = app.add_subcommand("balance", "eight-term exergy balance at one operating point");
    bal->add_option("--speed", speed_rpm, "engine speed [rpm]")->required();
    bal->add_option("--torque", torque_Nm, "engine torque [Nm]")->required();
    bal->add_option("--t0", t0_K, "reference temperature [K]")->capture_default_str();
    bal->add_option("--egr", x_egr, "EGR rate")->capture_default_str();
    bal->add_option("--maps", maps_dir, "directory with fuel_map.csv/texh_map.csv (default: synthesize)");

    CLI::App* cyc = app.add_subcommand("cycle", "integrated balance over one drive-cycle trace");
    cyc->add_option("--trace", trace_path, "trace CSV (t_s,omega_radps,torque_Nm)")
        ->required()
        ->check(CLI::ExistingFile);
    cyc->add_option("--t0", t0_K, "reference temperature [K]")->capture_default_str();
    cyc->add_option("--egr", x_egr, "EGR rate")->capture_default_str();
    cyc->add_option("--maps", maps_dir, "directory with fuel_map.csv/texh_map.csv (default: synthesize)");
    cyc->add_option("--out", out_path, "write the JSON report here instead of stdout");

    CLI::App* swp = app.add_subcommand("sweep", "full reference-condition study over a cycle set");
    swp->add_option("--cycles", cycles_dir, "directory of trace CSVs")
        ->required()
        ->check(CLI::ExistingDirectory);
    swp->add_option("--t0-list", t0_list, "reference temperatures [K]")->capture_default_str();
    swp->add_option("--egr-list", sweep_egr_list, "EGR rates")->capture_default_str();
    swp->add_option("--out", sweep_csv, "long-format result CSV")->capture_default_str();
    swp->add_option("--trends", trends_path, "write the trend report here instead of stdout");
    swp->add_option("--maps", maps_dir, "directory with fuel_map.csv/texh_map.csv (default: synthesize)");

    // accept the global options (--config/--jobs/--seed) after the subcommand too
    for (CLI::App* s : {synth, gen, bal, cyc, swp}) s->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        const cli::RunConfig rc =
            config_path.empty() ? cli::default_run_config() : cli::load_run_config(config_path);
        // --t0 falls back to the configured reference temperature when not given
        if (bal->count("--t0") == 0 && cyc->count("--t0") == 0) t0_K = rc.env.T0_K;
        if (synth->parsed()) return cmd_synth_maps(rc, out_dir);
        if (gen->parsed()) return cmd_gen_maps(rc, maps_dir, egr_list, out_dir, jobs);
        if (bal->parsed()) return cmd_balance(rc, maps_dir, speed_rpm, torque_Nm, t0_K, x_egr, jobs);
        if (cyc->parsed()) return cmd_cycle(rc, maps_dir, trace_path, t0_K, x_egr, out_path, jobs);
        if (swp->parsed())
            return cmd_sweep(rc, maps_dir, cycles_dir, t0_list, sweep_egr_list, sweep_csv,
                             trends_path, jobs);
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "domain error: " << e.what() << "\n";
        return 3;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
}
