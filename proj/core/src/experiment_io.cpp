// grid.csv / grid.json / figure CSV writers and the TOML config reader.

#include <algorithm>
#include <array>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#define TOML_ENABLE_FORMATTERS 0
#include <toml.hpp>

#include "bufsim/errors.hpp"
#include "bufsim/experiment.hpp"
#include "json_codec.hpp"
#include "text.hpp"

namespace bufsim {

namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError(path.string(), "cannot open for writing");
    }
    out << content;
    out.flush();
    if (!out) {
        throw IoError(path.string(), "write failed");
    }
}

std::string read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError(path.string(), "cannot open for reading");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) {
        throw IoError(path.string(), "read failed");
    }
    return ss.str();
}

double load_factor(const GridCell& cell)
{
    return static_cast<double>(cell.background_load_bps) /
           static_cast<double>(cell.bandwidth_bps);
}

}  // namespace

// --- grid.csv ---------------------------------------------------------------

std::string grid_csv_header()
{
    std::string h = "bandwidth_bps,policy,background_load_bps,load_factor,seed";
    for (const auto& c : summary_csv_columns()) {
        h += ',';
        h += c;
    }
    return h + '\n';
}

std::string grid_csv_rows(const GridRow& row)
{
    const auto& c = row.cell;
    const auto prefix = std::to_string(c.bandwidth_bps) + ',' + c.policy.to_string() + ',' +
                        std::to_string(c.background_load_bps) + ',' +
                        text::shortest(load_factor(c)) + ',' + std::to_string(c.seed) + ',';
    std::ostringstream out;
    write_summary_rows(row.summary, prefix, out);
    return out.str();
}

// --- figure data --------------------------------------------------------------

namespace {

// Seed-averaged view of one (bandwidth, policy, load) point.
struct Point {
    GridCell cell;  // seed field unused
    std::size_t seeds = 0;
    double loss_packets = 0.0;
    double loss_bytes = 0.0;
    double delay_mean = 0.0;
    double delay_p95 = 0.0;
    std::size_t delay_seeds = 0;
    std::array<double, 4> class_loss{};
    std::array<std::size_t, 4> class_seeds{};
};

std::vector<Point> average_over_seeds(const GridResult& grid)
{
    std::vector<Point> points;
    for (const auto& row : grid.rows) {
        const auto& c = row.cell;
        if (points.empty() || points.back().cell.bandwidth_bps != c.bandwidth_bps ||
            !(points.back().cell.policy == c.policy) ||
            points.back().cell.background_load_bps != c.background_load_bps) {
            points.push_back(Point{c});
        }
        auto& p = points.back();
        const auto& s = row.summary;
        p.seeds += 1;
        p.loss_packets += s.all.loss_rate_packets;
        p.loss_bytes += s.all.loss_rate_bytes;
        if (s.all.delay) {
            p.delay_mean += s.all.delay->mean_s;
            p.delay_p95 += s.all.delay->p95_s;
            p.delay_seeds += 1;
        }
        for (std::size_t k = 0; k < 4; ++k) {
            if (s.per_class[k].offered_packets > 0) {
                p.class_loss[k] += s.per_class[k].loss_rate_packets;
                p.class_seeds[k] += 1;
            }
        }
    }
    return points;
}

std::string mean_or_empty(double sum, std::size_t n)
{
    return n == 0 ? std::string() : text::shortest(sum / static_cast<double>(n));
}

}  // namespace

std::vector<fs::path> emit_figure_data(const GridResult& grid, const fs::path& out_dir)
{
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) {
        throw IoError(out_dir.string(), "cannot create directory: " + ec.message());
    }

    const auto points = average_over_seeds(grid);
    std::vector<fs::path> written;

    // Delay against load, one file per bandwidth.
    for (const auto bw : grid.spec.bandwidths_bps) {
        std::ostringstream out;
        out << "policy,background_load_bps,load_factor,delay_mean_s,delay_p95_s,"
               "loss_rate_packets,seeds\n";
        for (const auto& p : points) {
            if (p.cell.bandwidth_bps != bw) {
                continue;
            }
            out << p.cell.policy.to_string() << ',' << p.cell.background_load_bps << ','
                << text::shortest(load_factor(p.cell)) << ','
                << mean_or_empty(p.delay_mean, p.delay_seeds) << ','
                << mean_or_empty(p.delay_p95, p.delay_seeds) << ','
                << mean_or_empty(p.loss_packets, p.seeds) << ',' << p.seeds << '\n';
        }
        const auto path = out_dir / ("fig3_delay_vs_load_" + std::to_string(bw) + ".csv");
        write_file(path, out.str());
        written.push_back(path);
    }

    std::vector<std::string> kinds;
    for (const auto& pol : grid.spec.policies) {
        const std::string k(pol.kind_name());
        if (std::find(kinds.begin(), kinds.end(), k) == kinds.end()) {
            kinds.push_back(k);
        }
    }

    // Overall loss against load, one file per buffer kind.
    for (const auto& kind : kinds) {
        std::ostringstream out;
        out << "bandwidth_bps,policy,background_load_bps,load_factor,loss_rate_packets,"
               "loss_rate_bytes,seeds\n";
        for (const auto& p : points) {
            if (p.cell.policy.kind_name() != kind) {
                continue;
            }
            out << p.cell.bandwidth_bps << ',' << p.cell.policy.to_string() << ','
                << p.cell.background_load_bps << ',' << text::shortest(load_factor(p.cell)) << ','
                << mean_or_empty(p.loss_packets, p.seeds) << ','
                << mean_or_empty(p.loss_bytes, p.seeds) << ',' << p.seeds << '\n';
        }
        const auto path = out_dir / ("fig45_loss_vs_load_" + kind + ".csv");
        write_file(path, out.str());
        written.push_back(path);
    }

    // Loss split by traffic class, one file per buffer kind.
    for (const auto& kind : kinds) {
        std::ostringstream out;
        out << "bandwidth_bps,policy,background_load_bps,load_factor,class,loss_rate_packets,"
               "seeds\n";
        for (const auto& p : points) {
            if (p.cell.policy.kind_name() != kind) {
                continue;
            }
            for (std::size_t k = 0; k < 4; ++k) {
                if (p.class_seeds[k] == 0) {
                    continue;
                }
                out << p.cell.bandwidth_bps << ',' << p.cell.policy.to_string() << ','
                    << p.cell.background_load_bps << ',' << text::shortest(load_factor(p.cell))
                    << ',' << to_string(kAllTrafficClasses[k]) << ','
                    << mean_or_empty(p.class_loss[k], p.class_seeds[k]) << ','
                    << p.class_seeds[k] << '\n';
            }
        }
        const auto path = out_dir / ("fig6_loss_by_class_" + kind + ".csv");
        write_file(path, out.str());
        written.push_back(path);
    }
    return written;
}

std::vector<fs::path> emit_outputs(const GridResult& grid, const fs::path& out_dir)
{
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) {
        throw IoError(out_dir.string(), "cannot create directory: " + ec.message());
    }

    std::vector<fs::path> written;
    std::string csv = grid_csv_header();
    for (const auto& row : grid.rows) {
        csv += grid_csv_rows(row);
    }
    written.push_back(out_dir / "grid.csv");
    write_file(written.back(), csv);

    written.push_back(out_dir / "grid.json");
    write_file(written.back(), grid_to_json(grid));

    const auto figs = emit_figure_data(grid, out_dir);
    written.insert(written.end(), figs.begin(), figs.end());
    return written;
}

// --- JSON -------------------------------------------------------------------

namespace {

nlohmann::json weights_json(const std::map<std::uint32_t, double>& weights)
{
    auto j = nlohmann::json::object();
    for (const auto& [size, w] : weights) {
        j[std::to_string(size)] = w;
    }
    return j;
}

std::map<std::uint32_t, double> weights_from_json(const nlohmann::json& j)
{
    std::map<std::uint32_t, double> out;
    for (const auto& [key, value] : j.items()) {
        const auto size = text::to_uint(key);
        if (!size || *size < 1 || *size > kMaxPacketBytes) {
            throw std::invalid_argument("bad packet size key '" + key + "'");
        }
        out[static_cast<std::uint32_t>(*size)] = value.get<double>();
    }
    return out;
}

}  // namespace

void to_json(nlohmann::json& j, const SopcastModelParams& p)
{
    j = nlohmann::json{{"video_rate_bps", p.video_rate_bps},
                       {"video_size_weights", weights_json(p.video_size_weights)},
                       {"control_fraction", p.control_fraction},
                       {"control_size_weights", weights_json(p.control_size_weights)}};
}

void from_json(const nlohmann::json& j, SopcastModelParams& p)
{
    p = SopcastModelParams{};
    p.video_rate_bps = j.at("video_rate_bps").get<double>();
    p.video_size_weights = weights_from_json(j.at("video_size_weights"));
    p.control_fraction = j.at("control_fraction").get<double>();
    p.control_size_weights = weights_from_json(j.at("control_size_weights"));
}

void to_json(nlohmann::json& j, const ExperimentSpec& s)
{
    j = nlohmann::json::object();
    if (const auto* path = std::get_if<std::string>(&s.foreground)) {
        j["foreground"] = {{"trace", *path}};
    } else {
        j["foreground"] = {{"model", std::get<SopcastModelParams>(s.foreground)}};
    }
    j["bandwidths_bps"] = s.bandwidths_bps;
    j["policies"] = s.policies;
    j["background_load_factors"] = s.background_load_factors;
    j["background_loads_bps"] =
        s.background_loads_bps ? nlohmann::json(*s.background_loads_bps) : nlohmann::json();
    auto mix = nlohmann::json::array();
    for (const auto& [size, p] : s.background_size_mix) {
        mix.push_back({size, p});
    }
    j["background_size_mix"] = mix;
    j["seeds"] = s.seeds;
    j["duration_s"] = s.duration_s;
    j["window"] = s.window ? nlohmann::json(*s.window) : nlohmann::json();
}

void from_json(const nlohmann::json& j, ExperimentSpec& s)
{
    s = ExperimentSpec{};
    const auto& fg = j.at("foreground");
    if (fg.contains("trace")) {
        s.foreground = fg.at("trace").get<std::string>();
    } else {
        s.foreground = fg.at("model").get<SopcastModelParams>();
    }
    s.bandwidths_bps = j.at("bandwidths_bps").get<std::vector<std::uint64_t>>();
    s.policies = j.at("policies").get<std::vector<BufferPolicy>>();
    s.background_load_factors = j.at("background_load_factors").get<std::vector<double>>();
    if (!j.at("background_loads_bps").is_null()) {
        s.background_loads_bps = j.at("background_loads_bps").get<std::vector<std::uint64_t>>();
    }
    s.background_size_mix.clear();
    for (const auto& e : j.at("background_size_mix")) {
        s.background_size_mix.emplace_back(e.at(0).get<std::uint32_t>(), e.at(1).get<double>());
    }
    s.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    s.duration_s = j.at("duration_s").get<double>();
    if (!j.at("window").is_null()) {
        s.window = j.at("window").get<MeasurementWindow>();
    }
}

std::string grid_to_json(const GridResult& grid)
{
    // Wall time is left out so that identical grids serialise identically.
    nlohmann::json j;
    j["version"] = grid.version;
    j["spec"] = grid.spec;
    auto rows = nlohmann::json::array();
    for (const auto& row : grid.rows) {
        rows.push_back({{"bandwidth_bps", row.cell.bandwidth_bps},
                        {"policy", row.cell.policy},
                        {"background_load_bps", row.cell.background_load_bps},
                        {"seed", row.cell.seed},
                        {"summary", row.summary}});
    }
    j["rows"] = rows;
    return j.dump(1) + '\n';
}

GridResult grid_from_json(std::string_view json)
{
    GridResult grid;
    try {
        const auto j = nlohmann::json::parse(json);
        grid.version = j.at("version").get<std::string>();
        grid.spec = j.at("spec").get<ExperimentSpec>();
        for (const auto& r : j.at("rows")) {
            GridRow row;
            row.cell.bandwidth_bps = r.at("bandwidth_bps").get<std::uint64_t>();
            row.cell.policy = r.at("policy").get<BufferPolicy>();
            row.cell.background_load_bps = r.at("background_load_bps").get<std::uint64_t>();
            row.cell.seed = r.at("seed").get<std::uint64_t>();
            row.summary = r.at("summary").get<RunSummary>();
            grid.rows.push_back(std::move(row));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(0, std::string("grid JSON: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ParseError(0, std::string("grid JSON: ") + e.what());
    }
    if (grid.rows.size() != grid.spec.cell_count()) {
        throw ParseError(0, "grid JSON: expected " + std::to_string(grid.spec.cell_count()) +
                                " rows, found " + std::to_string(grid.rows.size()));
    }
    return grid;
}

GridResult read_grid_json(const fs::path& path)
{
    return grid_from_json(read_file(path));
}

// --- TOML config ------------------------------------------------------------

namespace {

std::size_t line_of(const toml::node& node)
{
    return node.source().begin.line;
}

[[noreturn]] void config_error(const toml::node& node, const std::string& what)
{
    throw ParseError(line_of(node), "config: " + what);
}

double number_of(const toml::node& node, const std::string& key)
{
    if (const auto v = node.value<double>()) {
        if (*v < 0.0) {
            config_error(node, key + " must be non-negative");
        }
        return *v;
    }
    if (const auto s = node.value<std::string>()) {
        try {
            return parse_quantity(*s);
        } catch (const std::invalid_argument& e) {
            config_error(node, key + ": " + e.what());
        }
    }
    config_error(node, key + " must be a number");
}

std::uint64_t count_of(const toml::node& node, const std::string& key)
{
    if (const auto v = node.value<std::int64_t>(); v && node.is_integer()) {
        if (*v < 0) {
            config_error(node, key + " must be non-negative");
        }
        return static_cast<std::uint64_t>(*v);
    }
    if (const auto s = node.value<std::string>()) {
        try {
            return parse_count(*s);
        } catch (const std::invalid_argument& e) {
            config_error(node, key + ": " + e.what());
        }
    }
    config_error(node, key + " must be an integer");
}

const toml::array& array_of(const toml::node& node, const std::string& key)
{
    const auto* arr = node.as_array();
    if (arr == nullptr) {
        config_error(node, key + " must be an array");
    }
    return *arr;
}

const toml::table& table_of(const toml::node& node, const std::string& key)
{
    const auto* tbl = node.as_table();
    if (tbl == nullptr) {
        config_error(node, key + " must be a table");
    }
    return *tbl;
}

std::map<std::uint32_t, double> weights_of(const toml::node& node, const std::string& key)
{
    std::map<std::uint32_t, double> out;
    for (const auto& [k, v] : table_of(node, key)) {
        const auto size = text::to_uint(k.str());
        if (!size || *size < 1 || *size > kMaxPacketBytes) {
            config_error(v, key + ": bad packet size '" + std::string(k.str()) + "'");
        }
        out[static_cast<std::uint32_t>(*size)] = number_of(v, key);
    }
    return out;
}

void check_keys(const toml::table& tbl, std::initializer_list<std::string_view> allowed,
                const std::string& where)
{
    for (const auto& [k, v] : tbl) {
        if (std::find(allowed.begin(), allowed.end(), k.str()) == allowed.end()) {
            config_error(v, "unknown key '" + std::string(k.str()) + "' in " + where);
        }
    }
}

void read_foreground(const toml::table& tbl, const fs::path& base_dir, ExperimentSpec& spec)
{
    check_keys(tbl,
               {"trace", "video_rate_bps", "video_size_weights", "control_fraction",
                "control_size_weights"},
               "[foreground]");
    if (const auto* trace = tbl.get("trace")) {
        const auto path = trace->value<std::string>();
        if (!path) {
            config_error(*trace, "foreground.trace must be a string");
        }
        if (tbl.size() > 1) {
            config_error(*trace, "foreground.trace cannot be combined with model parameters");
        }
        fs::path p(*path);
        if (p.is_relative() && !base_dir.empty()) {
            p = base_dir / p;
        }
        spec.foreground = p.string();
        return;
    }
    SopcastModelParams params;
    if (const auto* n = tbl.get("video_rate_bps")) {
        params.video_rate_bps = number_of(*n, "video_rate_bps");
    }
    if (const auto* n = tbl.get("control_fraction")) {
        params.control_fraction = number_of(*n, "control_fraction");
    }
    if (const auto* n = tbl.get("video_size_weights")) {
        params.video_size_weights = weights_of(*n, "video_size_weights");
    }
    if (const auto* n = tbl.get("control_size_weights")) {
        params.control_size_weights = weights_of(*n, "control_size_weights");
    }
    spec.foreground = params;
}

}  // namespace

ExperimentSpec parse_experiment_config(std::string_view toml_text, const fs::path& base_dir)
{
    toml::table root;
    try {
        root = toml::parse(toml_text);
    } catch (const toml::parse_error& e) {
        throw ParseError(e.source().begin.line, "config: " + std::string(e.description()));
    }
    check_keys(root,
               {"duration_s", "seeds", "bandwidths_bps", "policies", "background_load_factors",
                "background_loads_bps", "background_size_mix", "window", "foreground"},
               "config");

    ExperimentSpec spec;
    if (const auto* n = root.get("duration_s")) {
        spec.duration_s = number_of(*n, "duration_s");
    }
    if (const auto* n = root.get("seeds")) {
        spec.seeds.clear();
        for (const auto& e : array_of(*n, "seeds")) {
            spec.seeds.push_back(count_of(e, "seeds"));
        }
    }
    if (const auto* n = root.get("bandwidths_bps")) {
        spec.bandwidths_bps.clear();
        for (const auto& e : array_of(*n, "bandwidths_bps")) {
            spec.bandwidths_bps.push_back(count_of(e, "bandwidths_bps"));
        }
    }
    if (const auto* n = root.get("policies")) {
        spec.policies.clear();
        for (const auto& e : array_of(*n, "policies")) {
            const auto s = e.value<std::string>();
            if (!s) {
                config_error(e, "policies entries must be strings like \"byte:100k\"");
            }
            try {
                spec.policies.push_back(parse_policy(*s));
            } catch (const std::invalid_argument& ex) {
                config_error(e, ex.what());
            }
        }
    }
    if (const auto* n = root.get("background_load_factors")) {
        spec.background_load_factors.clear();
        for (const auto& e : array_of(*n, "background_load_factors")) {
            spec.background_load_factors.push_back(number_of(e, "background_load_factors"));
        }
    }
    if (const auto* n = root.get("background_loads_bps")) {
        std::vector<std::uint64_t> loads;
        for (const auto& e : array_of(*n, "background_loads_bps")) {
            loads.push_back(count_of(e, "background_loads_bps"));
        }
        spec.background_loads_bps = std::move(loads);
    }
    if (const auto* n = root.get("background_size_mix")) {
        spec.background_size_mix.clear();
        for (const auto& e : array_of(*n, "background_size_mix")) {
            const auto& pair = array_of(e, "background_size_mix entry");
            if (pair.size() != 2) {
                config_error(e, "background_size_mix entries are [size_bytes, probability]");
            }
            const auto size = count_of(*pair.get(0), "background_size_mix size");
            if (size < 1 || size > kMaxPacketBytes) {
                config_error(e, "background_size_mix size outside 1..65535");
            }
            spec.background_size_mix.emplace_back(static_cast<std::uint32_t>(size),
                                                   number_of(*pair.get(1), "probability"));
        }
    }
    if (const auto* n = root.get("window")) {
        const auto& tbl = table_of(*n, "window");
        check_keys(tbl, {"start_s", "end_s"}, "[window]");
        const auto* start = tbl.get("start_s");
        const auto* end = tbl.get("end_s");
        if (start == nullptr || end == nullptr) {
            config_error(*n, "[window] needs start_s and end_s");
        }
        spec.window = MeasurementWindow{number_of(*start, "start_s"), number_of(*end, "end_s")};
    }
    if (const auto* n = root.get("foreground")) {
        read_foreground(table_of(*n, "foreground"), base_dir, spec);
    }
    return spec;
}

ExperimentSpec load_experiment_config(const fs::path& path)
{
    return parse_experiment_config(read_file(path), path.parent_path());
}

}  // namespace bufsim
