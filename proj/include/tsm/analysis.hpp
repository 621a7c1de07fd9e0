#pragma once

// Trajectory integration, flow sampling and relative-volume sweeps over the
// AYS management parameters.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "tsm/dynamics.hpp"
#include "tsm/errors.hpp"
#include "tsm/grid.hpp"
#include "tsm/state.hpp"
#include "tsm/system.hpp"
#include "tsm/tsm.hpp"
#include "tsm/viability.hpp"

namespace tsm {

// Shortest decimal text that reads back to the same double.
inline std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// Trajectories

struct PolicySegment {
    double start = 0.0;  // control u applies from this time on
    ControlIndex control = 0;
};

// Piecewise-constant control schedule; segments sorted by start time.
class Policy {
public:
    Policy() = default;
    explicit Policy(std::vector<PolicySegment> segments) : segments_(std::move(segments)) {
        if (segments_.empty()) throw UsageError("policy needs at least one segment");
        for (std::size_t i = 1; i < segments_.size(); ++i)
            if (!(segments_[i].start > segments_[i - 1].start))
                throw UsageError("policy segments must have increasing start times");
    }
    static Policy constant(ControlIndex u) { return Policy({{0.0, u}}); }

    ControlIndex at(double t) const noexcept {
        if (segments_.empty()) return 0;
        ControlIndex u = segments_.front().control;
        for (const auto& s : segments_) {
            if (s.start > t) break;
            u = s.control;
        }
        return u;
    }
    const std::vector<PolicySegment>& segments() const noexcept { return segments_; }

private:
    std::vector<PolicySegment> segments_{{0.0, 0}};
};

struct Trajectory {
    std::vector<double> times;
    std::vector<StateVector> states;
    std::vector<ControlIndex> controls;  // control used on [times[k], times[k+1])
    bool exited = false;                 // stopped early on leaving the domain

    const StateVector& final_state() const { return states.back(); }
};

struct IntegrationOptions {
    double t_end = 100.0;
    double step = 0.1;
    // Stop once the path length reaches this value (the last step is cut to
    // land on it exactly).
    double max_arc_length = std::numeric_limits<double>::infinity();
    // Domain membership; defaults to "all components finite".
    std::function<bool(const StateVector&)> in_domain;
    // Applied to every new state before the domain check, e.g. to pull
    // round-off overshoot back onto an invariant set.
    std::function<void(StateVector&)> project;
};

namespace detail {
inline StateVector rk4_step(const ControlledSystem& sys, const StateVector& x, ControlIndex u, double h) {
    const StateVector k1 = sys(x, u);
    const StateVector k2 = sys(x + k1 * (0.5 * h), u);
    const StateVector k3 = sys(x + k2 * (0.5 * h), u);
    const StateVector k4 = sys(x + k3 * h, u);
    return x + (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (h / 6.0);
}
}  // namespace detail

// Classical fourth-order Runge-Kutta with a fixed step; the final step is
// shortened to land on t_end.  Leaving the domain, or a domain error raised by
// the right-hand side, truncates the trajectory and sets `exited`.
inline Trajectory integrate(const ControlledSystem& sys, const StateVector& x0, const Policy& policy,
                            const IntegrationOptions& opt) {
    if (!(opt.step > 0.0) || !std::isfinite(opt.step)) throw ParameterError("integration step must be positive");
    if (!(opt.t_end >= 0.0)) throw ParameterError("integration end time must be nonnegative");
    if (x0.size() != sys.dimension()) throw UsageError("initial state dimension mismatch");
    auto inside = [&](const StateVector& x) { return all_finite(x) && (!opt.in_domain || opt.in_domain(x)); };
    if (!inside(x0)) throw DomainError("initial state outside the domain");

    Trajectory tr;
    tr.times.push_back(0.0);
    tr.states.push_back(x0);
    double t = 0.0;
    double length = 0.0;
    StateVector x = x0;
    const std::size_t steps = static_cast<std::size_t>(std::ceil(opt.t_end / opt.step - 1e-9));
    for (std::size_t k = 0; k < steps && length < opt.max_arc_length; ++k) {
        const double h = std::min(opt.step, opt.t_end - t);
        if (!(h > 0.0)) break;
        const ControlIndex u = policy.at(t);
        StateVector next(x.size());
        try {
            next = detail::rk4_step(sys, x, u, h);
        } catch (const DomainError&) {
            tr.exited = true;
            break;
        }
        if (opt.project) opt.project(next);
        if (!inside(next)) {
            tr.exited = true;
            break;
        }
        double seg = distance(x, next);
        double t_next = t + h;
        if (length + seg > opt.max_arc_length && seg > 0.0) {
            const double frac = (opt.max_arc_length - length) / seg;
            next = x + (next - x) * frac;
            t_next = t + h * frac;
            seg = opt.max_arc_length - length;
        }
        tr.controls.push_back(u);
        tr.times.push_back(t_next);
        tr.states.push_back(next);
        length += seg;
        t = t_next;
        x = next;
    }
    return tr;
}

inline double arc_length(const std::vector<StateVector>& path) {
    double s = 0.0;
    for (std::size_t i = 1; i < path.size(); ++i) s += distance(path[i - 1], path[i]);
    return s;
}

namespace detail {
inline double point_segment_distance(const StateVector& p, const StateVector& a, const StateVector& b) {
    const StateVector ab = b - a;
    double len2 = 0.0, dot = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        len2 += ab[i] * ab[i];
        dot += (p[i] - a[i]) * ab[i];
    }
    const double t = len2 > 0.0 ? std::clamp(dot / len2, 0.0, 1.0) : 0.0;
    return distance(p, a + ab * t);
}

inline double directed_hausdorff(const std::vector<StateVector>& from, const std::vector<StateVector>& to) {
    double worst = 0.0;
    for (const auto& p : from) {
        double best = std::numeric_limits<double>::infinity();
        if (to.size() == 1) best = distance(p, to[0]);
        for (std::size_t i = 1; i < to.size(); ++i) best = std::min(best, point_segment_distance(p, to[i - 1], to[i]));
        worst = std::max(worst, best);
    }
    return worst;
}
}  // namespace detail

// Symmetric Hausdorff distance between two polylines, measured from the
// vertices of each to the segments of the other.
inline double hausdorff_distance(const std::vector<StateVector>& a, const std::vector<StateVector>& b) {
    if (a.empty() || b.empty()) throw UsageError("hausdorff distance of an empty path");
    return std::max(detail::directed_hausdorff(a, b), detail::directed_hausdorff(b, a));
}

// ---------------------------------------------------------------------------
// Flow sampling

struct FlowOptions {
    ControlIndex control = 0;
    double t_end = 20.0;
    double step = 0.01;
};

struct FlowSample {
    std::vector<Trajectory> trajectories;
    std::vector<bool> green;  // terminal s > 0.9 and a < 0.1

    double green_fraction() const {
        if (green.empty()) return 0.0;
        return static_cast<double>(std::count(green.begin(), green.end(), true)) / static_cast<double>(green.size());
    }
};

// Uniform random initial conditions in the unit cube, integrated under a
// constant control.  Meant for the compactified AYS coordinates (a, y, s),
// whose closed cube is forward invariant: a fixed step that overshoots a face
// is pulled back onto it, and intermediate stages see the field of the
// nearest cube point.
inline FlowSample flow_sample(const ControlledSystem& system, std::size_t count, std::uint64_t seed,
                              const FlowOptions& opt = {}) {
    if (count == 0) throw ParameterError("flow sample count must be positive");
    if (system.dimension() != 3) throw UsageError("flow sampling expects a three-dimensional system");
    auto clamp_cube = [](StateVector& q) {
        for (double& c : q) c = std::clamp(c, 0.0, 1.0);
    };
    ControlledSystem sys(3, system.control_names(), system.default_control(),
                         [system, clamp_cube](const StateVector& q, ControlIndex u) {
                             StateVector c = q;
                             clamp_cube(c);
                             return system(c, u);
                         });
    std::mt19937_64 rng(seed);
    // 53 random bits per coordinate, independent of the library's distributions.
    auto uniform = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

    IntegrationOptions io;
    io.t_end = opt.t_end;
    io.step = opt.step;
    io.project = clamp_cube;
    const Policy policy = Policy::constant(opt.control);

    FlowSample out;
    out.trajectories.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        StateVector x0(3);
        for (double& c : x0) c = uniform();
        out.trajectories.push_back(integrate(sys, x0, policy, io));
        const StateVector& end = out.trajectories.back().final_state();
        out.green.push_back(end[2] > 0.9 && end[0] < 0.1);
    }
    return out;
}

// ---------------------------------------------------------------------------
// AYS partition runs

struct AysRunSettings {
    ays::Params params;
    std::size_t resolution = 80;  // points per axis of the unit cube
    double dt = 0.0;              // 0: 1.5 x grid spacing
    double epsilon = 1e-4;        // homogenization regularizer
    double lipschitz = 10.0;
    ExpansionMode mode = ExpansionMode::kGuaranteed;
    ControlSubset controls;  // empty: all four
    CacheMode cache = CacheMode::kAuto;
    unsigned workers = default_workers();
};

struct AysSetup {
    ays::Params params;
    ControlledSystem system;
    GridPtr grid;
    DiscreteDynamics dynamics;
    PointSet desirable;
    ControlSubset controls;
};

inline AysSetup make_ays_setup(const AysRunSettings& s) {
    s.params.validate();
    if (s.resolution < 2) throw ParameterError("resolution must be at least 2 points per axis");
    if (!(s.dt >= 0.0)) throw ParameterError("time step must be nonnegative (0 selects the default)");
    GridPtr grid = make_grid(Grid::unit_cube(3, s.resolution));
    ControlledSystem sys = ays::make_grid_system(s.params, s.epsilon);
    const double dt = s.dt > 0.0 ? s.dt : 1.5 * grid->min_spacing();
    SuccessorConfig cfg = SuccessorConfig::make(*grid, dt, 1.0, s.lipschitz, s.mode);
    DiscreteDynamics dyn(sys, grid, cfg, s.cache, s.workers);
    const ays::Params p = s.params;
    PointSet desirable =
        PointSet::from_predicate(grid, [&](const StateVector& q) { return ays::desirable_transformed(q, p); });
    ControlSubset controls = s.controls.empty() ? sys.all_controls() : s.controls;
    return AysSetup{p, sys, grid, std::move(dyn), std::move(desirable), std::move(controls)};
}

inline void record_ays_metadata(TsmResult& r, const AysSetup& setup, const AysRunSettings& s) {
    auto& m = r.metadata;
    const auto& p = setup.params;
    m["model"] = "ays";
    const std::pair<const char*, double> fields[] = {
        {"tau_A", p.tau_A},   {"tau_S", p.tau_S},   {"beta", p.beta},
        {"beta_lg", p.beta_lg}, {"theta", p.theta}, {"epsilon_energy", p.epsilon_energy},
        {"phi", p.phi},       {"sigma", p.sigma},   {"sigma_et", p.sigma_et},
        {"rho", p.rho},       {"A_mid", p.A_mid},   {"Y_mid", p.Y_mid},
        {"S_mid", p.S_mid},   {"A_PB", p.A_PB},     {"Y_SF", p.Y_SF}};
    for (const auto& [k, v] : fields) m[std::string("param.") + k] = format_double(v);
    const auto& cfg = setup.dynamics.config();
    m["resolution"] = std::to_string(s.resolution);
    m["dt"] = format_double(cfg.dt);
    m["radius"] = format_double(cfg.radius);
    m["lipschitz"] = format_double(cfg.lipschitz);
    m["expansion"] = to_string(cfg.mode);
    m["epsilon"] = format_double(s.epsilon);
    m["norm"] = "euclidean";
    std::string names;
    for (ControlIndex u : setup.controls) names += (names.empty() ? "" : ",") + setup.system.control_names()[u];
    m["controls"] = names;
}

inline TsmResult ays_partition(const AysRunSettings& s) {
    AysSetup setup = make_ays_setup(s);
    TsmResult r = tsm_partition(setup.dynamics, setup.desirable, setup.controls);
    record_ays_metadata(r, setup, s);
    return r;
}

// ---------------------------------------------------------------------------
// Bifurcation sweeps

enum class SweepParameter { kBetaLg, kSigmaEt };

inline SweepParameter sweep_parameter_from_string(const std::string& name) {
    if (name == "beta_lg") return SweepParameter::kBetaLg;
    if (name == "sigma_et") return SweepParameter::kSigmaEt;
    throw UsageError("sweep parameter must be beta_lg or sigma_et, got '" + name + "'");
}

inline const char* to_string(SweepParameter p) { return p == SweepParameter::kBetaLg ? "beta_lg" : "sigma_et"; }

struct SweepSpec {
    SweepParameter parameter = SweepParameter::kBetaLg;
    std::vector<double> values;
    AysRunSettings base;
    unsigned jobs = 1;  // partitions computed concurrently
};

struct SweepRow {
    double value = 0.0;
    bool ok = false;
    std::string error;
    std::array<std::size_t, kRegionCount> counts{};
    std::array<double, kRegionCount> fractions{};

    double fraction(RegionLabel r) const { return fractions[static_cast<std::size_t>(r)]; }
    double eddies() const { return fraction(RegionLabel::SunnyEddy) + fraction(RegionLabel::DarkEddy); }
};

inline std::vector<double> linspace(double from, double to, std::size_t count) {
    if (count == 0) throw ParameterError("value count must be positive");
    if (count == 1) return {from};
    std::vector<double> v(count);
    for (std::size_t i = 0; i < count; ++i)
        v[i] = from + (to - from) * static_cast<double>(i) / static_cast<double>(count - 1);
    return v;
}

inline std::vector<double> logspace(double from, double to, std::size_t count) {
    if (!(from > 0.0) || !(to > 0.0)) throw ParameterError("log-spaced range must be positive");
    auto v = linspace(std::log(from), std::log(to), count);
    for (double& x : v) x = std::exp(x);
    v.front() = from;
    v.back() = to;
    return v;
}

// One partition per value.  A value whose computation throws yields a row with
// ok = false and the message; the sweep goes on.
inline std::vector<SweepRow> bifurcation_sweep(const SweepSpec& spec) {
    if (spec.values.empty()) throw UsageError("sweep value list must not be empty");
    if (!std::is_sorted(spec.values.begin(), spec.values.end())) throw UsageError("sweep values must be sorted");
    std::vector<SweepRow> rows(spec.values.size());
    const unsigned jobs = std::max(1u, std::min<unsigned>(spec.jobs, static_cast<unsigned>(rows.size())));
    const unsigned inner = std::max(1u, spec.base.workers / jobs);

    auto run = [&](std::size_t i) {
        SweepRow& row = rows[i];
        row.value = spec.values[i];
        try {
            AysRunSettings s = spec.base;
            s.workers = inner;
            if (spec.parameter == SweepParameter::kBetaLg)
                s.params.beta_lg = row.value;
            else
                s.params.sigma_et = row.value;
            const TsmResult r = ays_partition(s);
            row.counts = r.counts;
            row.fractions = relative_volumes(r);
            row.ok = true;
        } catch (const std::exception& e) {
            row.error = e.what();
        }
    };

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < rows.size(); i = next++) run(i);
    };
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return rows;
}

}  // namespace tsm
