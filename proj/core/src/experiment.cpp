#include "bufsim/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <thread>

#include "bufsim/errors.hpp"
#include "bufsim/prng.hpp"
#include "text.hpp"

#ifndef BUFSIM_VERSION
#define BUFSIM_VERSION "0.0.0"
#endif

namespace bufsim {

std::string_view version() noexcept
{
    return BUFSIM_VERSION;
}

double parse_quantity(std::string_view in)
{
    auto s = text::trim(in);
    double mult = 1.0;
    if (!s.empty()) {
        switch (s.back()) {
        case 'k':
        case 'K':
            mult = 1e3;
            s.remove_suffix(1);
            break;
        case 'M':
            mult = 1e6;
            s.remove_suffix(1);
            break;
        default:
            break;
        }
    }
    const auto v = text::to_double(s);
    if (!v) {
        throw std::invalid_argument("not a number: '" + std::string(in) + "'");
    }
    if (*v < 0.0) {
        throw std::invalid_argument("negative value: '" + std::string(in) + "'");
    }
    return *v * mult;
}

std::uint64_t parse_count(std::string_view in)
{
    const double v = parse_quantity(in);
    const double r = std::nearbyint(v);
    if (std::abs(v - r) > 1e-6 * std::max(1.0, v) || r > 1.8e19) {
        throw std::invalid_argument("not a whole number: '" + std::string(in) + "'");
    }
    return static_cast<std::uint64_t>(r);
}

BufferPolicy parse_policy(std::string_view in)
{
    const auto s = text::trim(in);
    const auto colon = s.find(':');
    if (colon == std::string_view::npos) {
        throw std::invalid_argument("policy must be byte:N or pkt:N, got '" + std::string(in) + "'");
    }
    const auto kind = s.substr(0, colon);
    const auto capacity = parse_count(s.substr(colon + 1));
    if (capacity < 1) {
        throw std::invalid_argument("policy capacity must be at least 1");
    }
    if (kind == "byte") {
        return BufferPolicy::bytes(capacity);
    }
    if (kind == "pkt") {
        return BufferPolicy::packets(capacity);
    }
    throw std::invalid_argument("unknown policy kind '" + std::string(kind) + "'");
}

std::vector<BufferPolicy> default_policies()
{
    std::vector<BufferPolicy> out;
    for (const std::uint64_t bytes : {10000u, 100000u, 1000000u}) {
        out.push_back(BufferPolicy::bytes(bytes));
    }
    // 1 MB / 370 B is 2702; the grid uses the round 2700.
    for (const std::uint64_t slots : {27u, 270u, 2700u}) {
        out.push_back(BufferPolicy::packets(slots));
    }
    return out;
}

std::vector<double> default_load_factors()
{
    constexpr int kSteps = 10;
    std::vector<double> out;
    for (int i = 0; i < kSteps; ++i) {
        out.push_back(2.0 * i / (kSteps - 1));
    }
    return out;
}

void ExperimentSpec::validate() const
{
    auto fail = [](const std::string& what) { throw ContractViolation("experiment: " + what); };

    if (const auto* path = std::get_if<std::string>(&foreground); path && path->empty()) {
        fail("foreground trace path is empty");
    }
    if (const auto* params = std::get_if<SopcastModelParams>(&foreground)) {
        try {
            auto p = *params;
            p.duration_s = duration_s > 0.0 ? duration_s : 1.0;
            p.validate();
        } catch (const std::invalid_argument& e) {
            fail(std::string("foreground model: ") + e.what());
        }
    }
    if (bandwidths_bps.empty()) {
        fail("bandwidths_bps is empty");
    }
    for (const auto bw : bandwidths_bps) {
        if (bw < 1) {
            fail("bandwidth must be at least 1 bps");
        }
    }
    if (policies.empty()) {
        fail("policies is empty");
    }
    for (const auto& p : policies) {
        if (p.capacity < 1) {
            fail("policy capacity must be at least 1");
        }
    }
    if (background_loads_bps) {
        if (background_loads_bps->empty()) {
            fail("background_loads_bps is empty");
        }
    } else {
        if (background_load_factors.empty()) {
            fail("background_load_factors is empty");
        }
        for (const double f : background_load_factors) {
            if (!std::isfinite(f) || f < 0.0) {
                fail("background load factors must be finite and non-negative");
            }
        }
    }
    if (seeds.empty()) {
        fail("seeds is empty");
    }
    if (!std::isfinite(duration_s) || duration_s <= 0.0) {
        fail("duration_s must be positive");
    }
    try {
        BackgroundModelParams bg;
        bg.size_mix = background_size_mix;
        bg.duration_s = duration_s;
        bg.validate();
    } catch (const std::invalid_argument& e) {
        fail(std::string("background model: ") + e.what());
    }
    const auto w = effective_window();
    if (!(w.start_s >= 0.0 && w.start_s < w.end_s && w.end_s <= duration_s)) {
        fail("window must satisfy 0 <= start < end <= duration_s");
    }
}

MeasurementWindow ExperimentSpec::effective_window() const
{
    if (window) {
        return *window;
    }
    if (duration_s > 2.0 * kDefaultWarmupS) {
        return {kDefaultWarmupS, duration_s - kDefaultWarmupS};
    }
    return {0.0, duration_s};
}

std::vector<std::uint64_t> ExperimentSpec::loads_for(std::uint64_t bandwidth_bps) const
{
    if (background_loads_bps) {
        return *background_loads_bps;
    }
    std::vector<std::uint64_t> out;
    for (const double f : background_load_factors) {
        out.push_back(static_cast<std::uint64_t>(
            std::llround(f * static_cast<double>(bandwidth_bps))));
    }
    return out;
}

std::size_t ExperimentSpec::cell_count() const
{
    const auto loads = background_loads_bps ? background_loads_bps->size()
                                            : background_load_factors.size();
    return bandwidths_bps.size() * policies.size() * loads * seeds.size();
}

std::string GridCell::describe() const
{
    return "bandwidth_bps=" + std::to_string(bandwidth_bps) + " policy=" + policy.to_string() +
           " background_load_bps=" + std::to_string(background_load_bps) +
           " seed=" + std::to_string(seed);
}

std::uint64_t background_seed(std::uint64_t master_seed, std::uint64_t background_load_bps)
{
    return mix_seed(master_seed, background_load_bps);
}

Trace build_cell_trace(const ExperimentSpec& spec, const Trace* foreground_trace,
                       std::uint64_t background_load_bps, std::uint64_t seed)
{
    Trace fg;
    if (foreground_trace != nullptr) {
        // Replay only what fits inside the experiment duration.
        std::vector<PacketRecord> kept;
        for (const auto& r : foreground_trace->records()) {
            if (r.arrival_s <= spec.duration_s) {
                kept.push_back(r);
            }
        }
        fg = Trace(std::move(kept), foreground_trace->source(), spec.duration_s);
    } else {
        const auto* model = std::get_if<SopcastModelParams>(&spec.foreground);
        if (model == nullptr) {
            throw ContractViolation("foreground trace file was not loaded");
        }
        auto params = *model;
        params.duration_s = spec.duration_s;
        params.seed = seed;
        fg = gen_sopcast_trace(params);
    }

    BackgroundModelParams bg;
    bg.offered_load_bps = static_cast<double>(background_load_bps);
    bg.size_mix = spec.background_size_mix;
    bg.duration_s = spec.duration_s;
    bg.seed = background_seed(seed, background_load_bps);
    return merge_traces(fg, gen_background_trace(bg));
}

RunSummary run_cell(const ExperimentSpec& spec, const Trace* foreground_trace,
                    const GridCell& cell)
{
    const auto trace =
        build_cell_trace(spec, foreground_trace, cell.background_load_bps, cell.seed);
    const auto result = simulate(trace, cell.policy, LinkConfig{cell.bandwidth_bps});
    return summarize(result, spec.effective_window());
}

GridResult run_grid(const ExperimentSpec& spec, const RunOptions& options)
{
    const auto started = std::chrono::steady_clock::now();
    spec.validate();

    std::optional<Trace> fg_trace;
    if (const auto* path = std::get_if<std::string>(&spec.foreground)) {
        fg_trace = parse_trace_file(*path);
    }

    const std::size_t n_policies = spec.policies.size();
    const std::size_t n_seeds = spec.seeds.size();
    const std::size_t n_loads = spec.loads_for(spec.bandwidths_bps.front()).size();

    // One group = one input trace (bandwidth, load, seed), simulated under
    // every policy.
    struct Group {
        std::size_t bw_index;
        std::size_t load_index;
        std::size_t seed_index;
        std::uint64_t load_bps;
    };
    std::vector<Group> groups;
    for (std::size_t b = 0; b < spec.bandwidths_bps.size(); ++b) {
        const auto loads = spec.loads_for(spec.bandwidths_bps[b]);
        for (std::size_t l = 0; l < n_loads; ++l) {
            for (std::size_t s = 0; s < n_seeds; ++s) {
                groups.push_back({b, l, s, loads[l]});
            }
        }
    }

    GridResult grid;
    grid.spec = spec;
    grid.version = std::string(version());
    grid.rows.resize(spec.cell_count());
    const auto window = spec.effective_window();

    auto row_index = [&](const Group& g, std::size_t p) {
        return ((g.bw_index * n_policies + p) * n_loads + g.load_index) * n_seeds + g.seed_index;
    };

    std::vector<std::exception_ptr> errors(groups.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const auto gi = next.fetch_add(1);
            if (gi >= groups.size()) {
                return;
            }
            const auto& g = groups[gi];
            GridCell cell;
            cell.bandwidth_bps = spec.bandwidths_bps[g.bw_index];
            cell.background_load_bps = g.load_bps;
            cell.seed = spec.seeds[g.seed_index];
            try {
                const auto trace = build_cell_trace(spec, fg_trace ? &*fg_trace : nullptr,
                                                    g.load_bps, cell.seed);
                for (std::size_t p = 0; p < n_policies; ++p) {
                    cell.policy = spec.policies[p];
                    const auto result = simulate(trace, cell.policy, LinkConfig{cell.bandwidth_bps});
                    if (options.on_cell) {
                        options.on_cell(cell, result);
                    }
                    grid.rows[row_index(g, p)] = GridRow{cell, summarize(result, window)};
                }
            } catch (const std::exception& e) {
                errors[gi] = std::make_exception_ptr(
                    ContractViolation("cell " + cell.describe() + ": " + e.what()));
            }
        }
    };

    unsigned threads = options.threads != 0 ? options.threads : std::thread::hardware_concurrency();
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(groups.size())));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }

    grid.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return grid;
}

}  // namespace bufsim
