#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "bufsim/metrics.hpp"
#include "bufsim/queue_sim.hpp"
#include "bufsim/synth.hpp"

namespace bufsim {

std::string_view version() noexcept;

/// Parses "512000", "512k", "1.5M" (k = 1e3, M = 1e6).
/// Throws std::invalid_argument on anything else or on negative values.
double parse_quantity(std::string_view text);
/// As parse_quantity, but the result must be a whole number.
std::uint64_t parse_count(std::string_view text);
/// "byte:N" or "pkt:N", N accepting unit suffixes.
BufferPolicy parse_policy(std::string_view text);

/// Six drop-tail buffers: 10 kB, 100 kB, 1 MB and the packet counts that
/// match them at a 370-byte mean packet (27, 270, 2700).
std::vector<BufferPolicy> default_policies();
/// Ten evenly spaced multiples of the link rate from 0 to 2.
std::vector<double> default_load_factors();

inline constexpr double kEquivalentMeanPacketBytes = 370.0;
inline constexpr double kDefaultWarmupS = 30.0;

/// A sweep over bandwidth x buffer policy x background load x seed.
struct ExperimentSpec {
    /// Trace file path, or generator parameters. The generator's own
    /// duration_s and seed are replaced by the experiment's per cell.
    std::variant<std::string, SopcastModelParams> foreground = SopcastModelParams{};
    std::vector<std::uint64_t> bandwidths_bps = {512000, 1024000, 2048000};
    std::vector<BufferPolicy> policies = default_policies();
    /// Background load as a multiple of each link's bandwidth.
    std::vector<double> background_load_factors = default_load_factors();
    /// Absolute loads; when set, used for every bandwidth instead of the factors.
    std::optional<std::vector<std::uint64_t>> background_loads_bps;
    std::vector<std::pair<std::uint32_t, double>> background_size_mix =
        BackgroundModelParams{}.size_mix;
    std::vector<std::uint64_t> seeds = {1};
    double duration_s = 600.0;
    /// Defaults to [30 s, duration - 30 s).
    std::optional<MeasurementWindow> window;

    /// Throws ContractViolation describing the first problem found.
    void validate() const;
    MeasurementWindow effective_window() const;
    /// Background loads swept on a link of `bandwidth_bps`, rounded to whole bps.
    std::vector<std::uint64_t> loads_for(std::uint64_t bandwidth_bps) const;
    std::size_t cell_count() const;
};

struct GridCell {
    std::uint64_t bandwidth_bps = 0;
    BufferPolicy policy;
    std::uint64_t background_load_bps = 0;
    std::uint64_t seed = 0;

    std::string describe() const;

    friend bool operator==(const GridCell&, const GridCell&) = default;
};

struct GridRow {
    GridCell cell;
    RunSummary summary;

    friend bool operator==(const GridRow&, const GridRow&) = default;
};

struct GridResult {
    ExperimentSpec spec;
    std::vector<GridRow> rows;  // bandwidth-major, then policy, load, seed
    std::string version;
    double wall_time_s = 0.0;
};

/// Seed of the background stream in a cell. Depends only on the master seed
/// and the absolute load so that a single cell can be re-run on its own.
std::uint64_t background_seed(std::uint64_t master_seed, std::uint64_t background_load_bps);

/// Builds the merged foreground + background input for one cell.
/// `foreground_trace` is used when the spec names a trace file.
Trace build_cell_trace(const ExperimentSpec& spec, const Trace* foreground_trace,
                       std::uint64_t background_load_bps, std::uint64_t seed);

/// Simulates and summarises one cell exactly as run_grid does.
RunSummary run_cell(const ExperimentSpec& spec, const Trace* foreground_trace,
                    const GridCell& cell);

struct RunOptions {
    /// 0 picks std::thread::hardware_concurrency().
    unsigned threads = 0;
    /// Called once per cell with the raw simulation, possibly from several
    /// threads at once.
    std::function<void(const GridCell&, const SimResult&)> on_cell;
};

/// Runs every cell. Output order and values do not depend on `threads`.
/// Throws IoError if the foreground trace cannot be read and
/// ContractViolation (naming the cell) if any cell fails.
GridResult run_grid(const ExperimentSpec& spec, const RunOptions& options = {});

/// Writes grid.csv, grid.json and the figure data files into `out_dir`
/// (created if missing). Returns the written paths in write order.
std::vector<std::filesystem::path> emit_outputs(const GridResult& grid,
                                                const std::filesystem::path& out_dir);
/// Only the fig3/fig45/fig6 plot-data files.
std::vector<std::filesystem::path> emit_figure_data(const GridResult& grid,
                                                    const std::filesystem::path& out_dir);

/// Header of grid.csv.
std::string grid_csv_header();
/// Rows of one cell in grid.csv format.
std::string grid_csv_rows(const GridRow& row);

std::string grid_to_json(const GridResult& grid);
GridResult grid_from_json(std::string_view json);
GridResult read_grid_json(const std::filesystem::path& path);

/// TOML experiment config. Relative trace paths resolve against `base_dir`.
ExperimentSpec parse_experiment_config(std::string_view toml_text,
                                       const std::filesystem::path& base_dir = {});
ExperimentSpec load_experiment_config(const std::filesystem::path& path);

}  // namespace bufsim
