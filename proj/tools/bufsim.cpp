// bufsim: command-line front end for trace synthesis, single-cell simulation,
// grid sweeps and histogram/report helpers.
//
// Exit codes: 0 success, 1 contract violation or malformed input, 2 I/O error.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "bufsim/errors.hpp"
#include "bufsim/experiment.hpp"
#include "bufsim/metrics.hpp"
#include "bufsim/queue_sim.hpp"
#include "bufsim/synth.hpp"
#include "bufsim/trace.hpp"

namespace {

using namespace bufsim;

constexpr int kExitContract = 1;
constexpr int kExitIo = 2;

std::vector<std::uint64_t> parse_counts(const std::vector<std::string>& in)
{
    std::vector<std::uint64_t> out;
    for (const auto& s : in) {
        out.push_back(parse_count(s));
    }
    return out;
}

struct SynthArgs {
    std::string out;
    std::string duration = "600";
    std::string seed = "1";
    std::string video_rate = "348k";
    std::string control_fraction = "0.6";
    std::string bg_load = "0";
};

void run_synth(const SynthArgs& a)
{
    SopcastModelParams params;
    params.video_rate_bps = parse_quantity(a.video_rate);
    params.control_fraction = parse_quantity(a.control_fraction);
    params.duration_s = parse_quantity(a.duration);
    params.seed = parse_count(a.seed);

    ExperimentSpec spec;
    spec.foreground = params;
    spec.duration_s = params.duration_s;
    const auto trace = build_cell_trace(spec, nullptr, parse_count(a.bg_load), params.seed);
    write_trace_file(trace, a.out);
    std::cerr << "wrote " << trace.size() << " packets to " << a.out << '\n';
}

struct SimulateArgs {
    std::string trace;
    std::string model;
    std::string bw;
    std::string policy;
    std::string bg_load = "0";
    std::string seed = "1";
    std::string duration = "600";
    std::optional<std::string> window_start;
    std::optional<std::string> window_end;
    std::string out;
    std::string summary_json;
    bool no_drain = false;
};

void run_simulate(const SimulateArgs& a)
{
    ExperimentSpec spec;
    spec.duration_s = parse_quantity(a.duration);
    std::optional<Trace> fg;
    if (!a.trace.empty()) {
        spec.foreground = a.trace;
        fg = parse_trace_file(a.trace);
    } else if (!a.model.empty() && a.model != "sopcast") {
        throw std::invalid_argument("unknown model '" + a.model + "' (expected sopcast)");
    }
    if (a.window_start || a.window_end) {
        auto w = spec.effective_window();
        if (a.window_start) {
            w.start_s = parse_quantity(*a.window_start);
        }
        if (a.window_end) {
            w.end_s = parse_quantity(*a.window_end);
        }
        spec.window = w;
    }

    GridCell cell;
    cell.bandwidth_bps = parse_count(a.bw);
    cell.policy = parse_policy(a.policy);
    cell.background_load_bps = parse_count(a.bg_load);
    cell.seed = parse_count(a.seed);
    spec.bandwidths_bps = {cell.bandwidth_bps};
    spec.policies = {cell.policy};
    spec.background_loads_bps = std::vector<std::uint64_t>{cell.background_load_bps};
    spec.seeds = {cell.seed};
    spec.validate();

    const auto trace =
        build_cell_trace(spec, fg ? &*fg : nullptr, cell.background_load_bps, cell.seed);
    SimOptions opts;
    opts.drain = !a.no_drain;
    const auto result = simulate(trace, cell.policy, LinkConfig{cell.bandwidth_bps}, opts);
    const auto summary = summarize(result, spec.effective_window());

    if (!a.out.empty()) {
        std::ofstream out(a.out, std::ios::binary);
        if (!out) {
            throw IoError(a.out, "cannot open for writing");
        }
        write_outcomes_csv(result, out);
        if (!out.flush()) {
            throw IoError(a.out, "write failed");
        }
    }
    if (!a.summary_json.empty()) {
        std::ofstream out(a.summary_json, std::ios::binary);
        if (!out) {
            throw IoError(a.summary_json, "cannot open for writing");
        }
        out << summary_to_json(summary) << '\n';
        if (!out.flush()) {
            throw IoError(a.summary_json, "write failed");
        }
    }
    std::cout << grid_csv_header() << grid_csv_rows(GridRow{cell, summary});
}

struct SweepArgs {
    std::string config;
    std::string out_dir;
    std::optional<std::string> duration;
    std::vector<std::string> seeds;
    std::vector<std::string> bandwidths;
    std::vector<std::string> policies;
    std::vector<std::string> bg_loads;
    unsigned threads = 0;
};

void run_sweep(const SweepArgs& a)
{
    ExperimentSpec spec = a.config.empty() ? ExperimentSpec{} : load_experiment_config(a.config);
    if (a.duration) {
        spec.duration_s = parse_quantity(*a.duration);
        if (spec.window && spec.window->end_s > spec.duration_s) {
            spec.window.reset();
        }
    }
    if (!a.seeds.empty()) {
        spec.seeds = parse_counts(a.seeds);
    }
    if (!a.bandwidths.empty()) {
        spec.bandwidths_bps = parse_counts(a.bandwidths);
    }
    if (!a.policies.empty()) {
        spec.policies.clear();
        for (const auto& p : a.policies) {
            spec.policies.push_back(parse_policy(p));
        }
    }
    if (!a.bg_loads.empty()) {
        spec.background_loads_bps = parse_counts(a.bg_loads);
    }

    RunOptions opts;
    opts.threads = a.threads;
    const auto grid = run_grid(spec, opts);
    const auto files = emit_outputs(grid, a.out_dir);
    std::cerr << grid.rows.size() << " cells in " << grid.wall_time_s << " s\n";
    for (const auto& f : files) {
        std::cout << f.string() << '\n';
    }
}

void run_hist(const std::string& trace_path, const std::string& bin_width)
{
    const auto trace = parse_trace_file(trace_path);
    const auto width = parse_count(bin_width);
    if (width == 0 || width > kMaxPacketBytes) {
        throw std::invalid_argument("bin width must be in 1..65535");
    }
    const auto h = compute_histogram(trace, static_cast<std::uint32_t>(width));
    std::cout << "bin_start_bytes,bin_end_bytes,count,fraction\n";
    for (const auto& [bin, count] : h.counts) {
        std::cout << bin * width << ',' << (bin + 1) * width << ',' << count << ','
                  << static_cast<double>(count) / static_cast<double>(h.total) << '\n';
    }
}

void run_report(const std::string& grid_path, std::string out_dir)
{
    if (out_dir.empty()) {
        out_dir = std::filesystem::path(grid_path).parent_path().string();
        if (out_dir.empty()) {
            out_dir = ".";
        }
    }
    const auto grid = read_grid_json(grid_path);
    for (const auto& f : emit_figure_data(grid, out_dir)) {
        std::cout << f.string() << '\n';
    }
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Drop-tail access-link buffer simulator for P2P-TV traffic"};
    app.set_version_flag("--version", std::string(bufsim::version()));
    app.require_subcommand(1);

    SynthArgs synth;
    auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic trace CSV");
    synth_cmd->add_option("--out", synth.out, "Output trace file")->required();
    synth_cmd->add_option("--duration", synth.duration, "Seconds of traffic")->capture_default_str();
    synth_cmd->add_option("--seed", synth.seed, "Master seed")->capture_default_str();
    synth_cmd->add_option("--video-rate", synth.video_rate, "Video bit rate")->capture_default_str();
    synth_cmd->add_option("--control-fraction", synth.control_fraction,
                          "Share of foreground packets that are control")
        ->capture_default_str();
    synth_cmd->add_option("--bg-load", synth.bg_load, "Background load to merge in (bps)")
        ->capture_default_str();

    SimulateArgs sim;
    auto* sim_cmd = app.add_subcommand("simulate", "Run one grid cell");
    auto* trace_opt = sim_cmd->add_option("--trace", sim.trace, "Foreground trace CSV");
    auto* model_opt = sim_cmd->add_option("--model", sim.model, "Foreground model (sopcast)");
    trace_opt->excludes(model_opt);
    sim_cmd->add_option("--bw", sim.bw, "Link bandwidth, e.g. 1024k")->required();
    sim_cmd->add_option("--policy", sim.policy, "byte:N or pkt:N")->required();
    sim_cmd->add_option("--bg-load", sim.bg_load, "Background load (bps)")->capture_default_str();
    sim_cmd->add_option("--seed", sim.seed, "Master seed")->capture_default_str();
    sim_cmd->add_option("--duration", sim.duration, "Seconds simulated")->capture_default_str();
    sim_cmd->add_option("--window-start", sim.window_start, "Measurement window start (s)");
    sim_cmd->add_option("--window-end", sim.window_end, "Measurement window end (s)");
    sim_cmd->add_option("--out", sim.out, "Per-packet outcome CSV");
    sim_cmd->add_option("--summary-json", sim.summary_json, "Run summary as JSON");
    sim_cmd->add_flag("--no-drain", sim.no_drain,
                      "Report packets still buffered at end of input as in-flight");

    SweepArgs sweep;
    auto* sweep_cmd = app.add_subcommand("sweep", "Run an experiment grid");
    sweep_cmd->add_option("--config", sweep.config, "TOML experiment config");
    sweep_cmd->add_option("--out-dir", sweep.out_dir, "Output directory")->required();
    sweep_cmd->add_option("--duration", sweep.duration, "Override duration_s");
    sweep_cmd->add_option("--seed", sweep.seeds, "Override seeds (repeatable)");
    sweep_cmd->add_option("--bw", sweep.bandwidths, "Override bandwidths (repeatable)");
    sweep_cmd->add_option("--policy", sweep.policies, "Override policies (repeatable)");
    sweep_cmd->add_option("--bg-load", sweep.bg_loads, "Absolute background loads (repeatable)");
    sweep_cmd->add_option("--threads", sweep.threads, "Worker threads (0 = all cores)");

    std::string hist_trace;
    std::string hist_width = "100";
    auto* hist_cmd = app.add_subcommand("hist", "Packet-size histogram of a trace");
    hist_cmd->add_option("--trace", hist_trace, "Trace CSV")->required();
    hist_cmd->add_option("--bin-width", hist_width, "Bin width in bytes")->capture_default_str();

    std::string report_grid;
    std::string report_dir;
    auto* report_cmd = app.add_subcommand("report", "Regenerate figure CSVs from grid.json");
    report_cmd->add_option("--grid", report_grid, "grid.json from a sweep")->required();
    report_cmd->add_option("--out-dir", report_dir, "Output directory (default: beside grid)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitContract;
    }

    try {
        if (*synth_cmd) {
            run_synth(synth);
        } else if (*sim_cmd) {
            run_simulate(sim);
        } else if (*sweep_cmd) {
            run_sweep(sweep);
        } else if (*hist_cmd) {
            run_hist(hist_trace, hist_width);
        } else if (*report_cmd) {
            run_report(report_grid, report_dir);
        }
    } catch (const IoError& e) {
        std::cerr << "bufsim: I/O error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "bufsim: " << e.what() << '\n';
        return kExitContract;
    }
    return 0;
}
