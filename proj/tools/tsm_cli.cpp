// Command-line front end: partition, kernel, capture, sweep, classify, flow.
//
// Exit codes: 0 success, 2 configuration or usage error, 3 numeric or domain
// error, 4 I/O error.

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "tsm/analysis.hpp"
#include "tsm/dynamics.hpp"
#include "tsm/io.hpp"
#include "tsm/tsm.hpp"
#include "tsm/viability.hpp"

namespace {

using namespace tsm;

enum Exit { kOk = 0, kConfig = 2, kNumeric = 3, kIo = 4 };

// Files written so far by the running command; removed if it fails.
std::vector<std::string> g_written;

void emit(const std::string& path, const std::string& bytes) {
    write_file_atomic(path, bytes);
    g_written.push_back(path);
}

void remove_partial_outputs() {
    for (const auto& p : g_written) {
        std::error_code ec;
        std::filesystem::remove_all(p, ec);
    }
    g_written.clear();
}

struct CommonOptions {
    std::string config;
    std::vector<std::string> overrides;  // key=value
    std::size_t resolution = 0;
    std::vector<std::string> controls;
    unsigned workers = 0;
    std::string out;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool with_out = true) {
    cmd->add_option("--config", o.config, "run configuration file (key = value lines)");
    cmd->add_option("--set", o.overrides, "override a configuration entry, key=value")->take_all();
    cmd->add_option("--resolution", o.resolution, "points per axis");
    cmd->add_option("--control", o.controls, "admissible control (repeatable)")->take_all();
    cmd->add_option("--workers", o.workers, "worker threads (0: all cores)");
    if (with_out) cmd->add_option("--out", o.out, "output file");
}

RunConfig resolve_config(const CommonOptions& o) {
    RunConfig c = o.config.empty() ? RunConfig{} : load_config(o.config);
    for (const auto& kv : o.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
        try {
            set_config_value(c, kv.substr(0, eq), kv.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError(std::string("--set ") + kv + ": " + e.what());
        }
    }
    if (o.resolution != 0) set_config_value(c, "resolution", std::to_string(o.resolution));
    if (!o.controls.empty()) {
        std::string joined;
        for (const auto& n : o.controls) joined += (joined.empty() ? "" : ",") + n;
        set_config_value(c, "controls", joined);
    }
    if (o.workers != 0) c.workers = o.workers;
    if (!o.out.empty()) c.out = o.out;
    validate(c);
    return c;
}

std::string require_out(const RunConfig& c) {
    if (c.out.empty()) throw ConfigError("no output path (use --out or the 'out' key)");
    return c.out;
}

std::map<std::string, std::string> set_metadata(const ModelSetup& m, const PointSet& s, std::size_t iterations) {
    const auto& cfg = m.dynamics.config();
    return {{"count", std::to_string(s.count())},
            {"dt", format_double(cfg.dt)},
            {"expansion", to_string(cfg.mode)},
            {"iterations", std::to_string(iterations)},
            {"norm", "euclidean"},
            {"radius", format_double(cfg.radius)}};
}

int cmd_partition(const CommonOptions& o, const std::string& summary_path) {
    RunConfig c = resolve_config(o);
    if (!summary_path.empty()) c.summary = summary_path;
    const std::string out = require_out(c);
    const auto t0 = std::chrono::steady_clock::now();
    ModelSetup m = build_model(c);
    TsmResult r = tsm_partition(m.dynamics, m.desirable, m.controls);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.metadata["norm"] = "euclidean";
    r.metadata["dt"] = format_double(m.dynamics.config().dt);
    r.metadata["radius"] = format_double(m.dynamics.config().radius);
    emit(out, serialize(make_partition_file(r, m.axes, config_echo(c))));
    const std::string summary = summary_csv(r, config_hash(c), wall);
    if (!c.summary.empty()) emit(c.summary, summary);
    std::cout << summary;
    return kOk;
}

int cmd_kernel(const CommonOptions& o) {
    RunConfig c = resolve_config(o);
    const std::string out = require_out(c);
    ModelSetup m = build_model(c);
    IterationStats stats;
    PointSet k = viability_kernel(m.desirable, m.dynamics, m.controls, &stats);
    emit(out, serialize(make_set_file(k, m.axes, config_echo(c), set_metadata(m, k, stats.iterations))));
    std::cout << "# config_hash=" << hex64(config_hash(c)) << "\nkernel_points," << k.count() << "\n";
    return kOk;
}

int cmd_capture(const CommonOptions& o, const std::string& target_name) {
    RunConfig c = resolve_config(o);
    const std::string out = require_out(c);
    ModelSetup m = build_model(c);
    PointSet target(m.grid);
    if (target_name == "desirable")
        target = m.desirable;
    else if (target_name == "shelter")
        target = viability_kernel(m.desirable, m.dynamics, {m.system.default_control()});
    else if (target_name != "empty")
        throw ConfigError("--target must be desirable, shelter or empty");
    if (target.empty()) std::cerr << "warning: capture target is empty; the basin is empty\n";
    IterationStats stats;
    PointSet basin = capture_basin(target, m.dynamics, m.controls, &stats);
    emit(out, serialize(make_set_file(basin, m.axes, config_echo(c), set_metadata(m, basin, stats.iterations))));
    std::cout << "# config_hash=" << hex64(config_hash(c)) << "\nbasin_points," << basin.count() << "\n";
    return kOk;
}

int cmd_sweep(const CommonOptions& o, const std::string& param, double from, double to, std::size_t steps,
              bool log_spaced, unsigned jobs) {
    RunConfig c = resolve_config(o);
    if (c.model != "ays") throw ConfigError("sweep requires model = ays");
    if (steps == 0) throw ConfigError("--steps must be positive");
    if (!(from <= to)) throw ConfigError("--from must not exceed --to");
    SweepSpec spec;
    try {
        spec.parameter = sweep_parameter_from_string(param);
    } catch (const UsageError& e) {
        throw ConfigError(e.what());
    }
    spec.values = log_spaced ? logspace(from, to, steps) : linspace(from, to, steps);
    spec.base = ays_settings(c);
    spec.base.controls = resolve_controls(ays::make_system(c.params), c.controls);
    spec.jobs = jobs;
    const auto rows = bifurcation_sweep(spec);
    const std::string table = sweep_csv(rows, spec.parameter, config_hash(c));
    if (!c.out.empty()) emit(c.out, table);
    std::cout << table;
    for (const auto& r : rows)
        if (!r.ok) std::cerr << "warning: value " << format_double(r.value) << " failed: " << r.error << "\n";
    return kOk;
}

int cmd_classify(const std::string& path, const std::vector<double>& state, bool have_ays) {
    PartitionFile f = read_partition_file(path);
    const TsmResult r = to_tsm_result(f);
    const RunConfig c = config_from_echo(f.config);
    if (state.size() != f.dimension())
        throw UsageError("state has " + std::to_string(state.size()) + " components but the partition has dimension " +
                         std::to_string(f.dimension()));
    StateVector x(std::span<const double>(state.data(), state.size()));
    RegionLabel label;
    if (c.model == "ays") {
        if (!have_ays) throw UsageError("an AYS partition needs --A, --Y and --S");
        label = classify_point(x, r, c.params.compact_map());
    } else {
        if (have_ays) throw UsageError("--A/--Y/--S apply to AYS partitions only; use --x");
        label = classify_lattice_point(x, r);
    }
    std::cout << to_string(label) << "\n";
    return kOk;
}

int cmd_flow(const CommonOptions& o, std::size_t count, std::uint64_t seed, const std::string& control, double t_end,
             double step) {
    RunConfig c = resolve_config(o);
    if (c.model != "ays") throw ConfigError("flow requires model = ays");
    const std::string dir = require_out(c);
    ControlledSystem sys = ays::make_grid_system(c.params, c.epsilon);
    ControlIndex u = 0;
    try {
        u = sys.control_index(control);
    } catch (const UsageError& e) {
        throw ConfigError(e.what());
    }
    if (count == 0) throw ConfigError("--count must be positive");
    if (!(step > 0.0) || !(t_end > 0.0)) throw ConfigError("--t-end and --step must be positive");
    const FlowSample sample = flow_sample(sys, count, seed, {u, t_end, step});

    if (std::filesystem::exists(dir) && !std::filesystem::is_directory(dir))
        throw IoError("'" + dir + "' exists and is not a directory");
    const bool created = std::filesystem::create_directories(dir);
    if (created) g_written.push_back(dir);

    std::ostringstream index;
    index << "# config_hash=" << hex64(config_hash(c)) << "\n";
    index << "# seed=" << seed << " control=" << control << " t_end=" << format_double(t_end)
          << " step=" << format_double(step) << "\n";
    index << "id,a0,y0,s0,a1,y1,s1,exited,attractor\n";
    for (std::size_t k = 0; k < count; ++k) {
        const Trajectory& tr = sample.trajectories[k];
        std::ostringstream name;
        name << "trajectory_" << std::setw(5) << std::setfill('0') << k << ".csv";
        std::ostringstream body;
        body << "t,a,y,s,control\n";
        for (std::size_t i = 0; i < tr.states.size(); ++i) {
            const auto& q = tr.states[i];
            const ControlIndex ui = i < tr.controls.size() ? tr.controls[i] : u;
            body << format_double(tr.times[i]) << "," << format_double(q[0]) << "," << format_double(q[1]) << ","
                 << format_double(q[2]) << "," << sys.control_names()[ui] << "\n";
        }
        emit((std::filesystem::path(dir) / name.str()).string(), body.str());
        const auto& a = tr.states.front();
        const auto& b = tr.final_state();
        index << k << "," << format_double(a[0]) << "," << format_double(a[1]) << "," << format_double(a[2]) << ","
              << format_double(b[0]) << "," << format_double(b[1]) << "," << format_double(b[2]) << ","
              << (tr.exited ? 1 : 0) << "," << (sample.green[k] ? "green" : "black") << "\n";
    }
    emit((std::filesystem::path(dir) / "flow.csv").string(), index.str());
    std::cout << "green_fraction," << format_double(sample.green_fraction()) << "\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Topology of sustainable management on discretized state spaces"};
    app.require_subcommand(1);

    CommonOptions part_opt, kern_opt, capt_opt, sweep_opt, flow_opt;
    std::string summary_path;
    auto* part = app.add_subcommand("partition", "compute the full region partition");
    add_common(part, part_opt);
    part->add_option("--summary", summary_path, "summary table path (CSV)");

    auto* kern = app.add_subcommand("kernel", "viability kernel of the desirable set");
    add_common(kern, kern_opt);

    std::string target = "shelter";
    auto* capt = app.add_subcommand("capture", "capture basin of a target set");
    add_common(capt, capt_opt);
    capt->add_option("--target", target, "desirable | shelter | empty");

    std::string param = "beta_lg";
    double from = 0.015, to = 0.035;
    std::size_t steps = 21;
    bool log_spaced = false;
    unsigned jobs = 1;
    auto* sweep = app.add_subcommand("sweep", "relative region volumes over a parameter range");
    add_common(sweep, sweep_opt);
    sweep->add_option("--param", param, "beta_lg | sigma_et");
    sweep->add_option("--from", from);
    sweep->add_option("--to", to);
    sweep->add_option("--steps", steps);
    sweep->add_flag("--log", log_spaced, "log-spaced values");
    sweep->add_option("--jobs", jobs, "values computed concurrently");

    std::string partition_path;
    double A = 0, Y = 0, S = 0;
    std::vector<double> xs;
    auto* cls = app.add_subcommand("classify", "region label of a state");
    cls->add_option("--partition", partition_path, "partition file")->required();
    auto* optA = cls->add_option("--A", A, "excess atmospheric carbon [GtC]");
    auto* optY = cls->add_option("--Y", Y, "economic output [US$/a]");
    auto* optS = cls->add_option("--S", S, "renewable knowledge stock [GJ]");
    auto* optX = cls->add_option("--x", xs, "state in grid coordinates")->take_all();
    optA->needs(optY, optS);
    optY->needs(optA, optS);
    optS->needs(optA, optY);
    optX->excludes(optA);

    std::size_t count = 100;
    std::uint64_t seed = 1;
    std::string control = "default";
    double t_end = 20.0, step = 0.01;
    auto* flow = app.add_subcommand("flow", "sample trajectories of the compactified model");
    add_common(flow, flow_opt);
    flow->add_option("--count", count);
    flow->add_option("--seed", seed);
    flow->add_option("--flow-control", control, "default | lg | et | lg+et");
    flow->add_option("--t-end", t_end, "integration time (homogenized units)");
    flow->add_option("--step", step);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfig;
    }

    try {
        if (*part) return cmd_partition(part_opt, summary_path);
        if (*kern) return cmd_kernel(kern_opt);
        if (*capt) return cmd_capture(capt_opt, target);
        if (*sweep) return cmd_sweep(sweep_opt, param, from, to, steps, log_spaced, jobs);
        if (*cls) {
            const bool have_ays = optA->count() > 0;
            return cmd_classify(partition_path, have_ays ? std::vector<double>{A, Y, S} : xs, have_ays);
        }
        if (*flow) return cmd_flow(flow_opt, count, seed, control, t_end, step);
    } catch (const ConfigError& e) {
        remove_partial_outputs();
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const UsageError& e) {
        remove_partial_outputs();
        std::cerr << "usage error: " << e.what() << "\n";
        return kConfig;
    } catch (const IoError& e) {
        remove_partial_outputs();
        std::cerr << "i/o error: " << e.what() << "\n";
        return kIo;
    } catch (const std::exception& e) {
        // DomainError, ParameterError and anything numeric
        remove_partial_outputs();
        std::cerr << "numeric error: " << e.what() << "\n";
        return kNumeric;
    }
    return kOk;
}
