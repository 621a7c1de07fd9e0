#pragma once

// Composition of viability kernels and capture basins into the partition of
// the state space into the fourteen regions of sustainable management.

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "tsm/errors.hpp"
#include "tsm/geometry.hpp"
#include "tsm/grid.hpp"
#include "tsm/viability.hpp"

namespace tsm {

enum class RegionLabel : std::uint8_t {
    Shelter = 0,
    Glade,
    LakeUnlimited,
    LakeLimited,
    SunnyUpstream,
    DarkUpstream,
    Backwater,
    SunnyDownstream,
    DarkDownstream,
    SunnyEddy,
    DarkEddy,
    SunnyAbyss,
    DarkAbyss,
    Trench,
};

inline constexpr std::size_t kRegionCount = 14;

inline constexpr std::array<std::string_view, kRegionCount> kRegionNames{
    "Shelter",        "Glade",          "LakeUnlimited", "LakeLimited", "SunnyUpstream",
    "DarkUpstream",   "Backwater",      "SunnyDownstream", "DarkDownstream", "SunnyEddy",
    "DarkEddy",       "SunnyAbyss",     "DarkAbyss",     "Trench"};

inline std::string_view to_string(RegionLabel r) { return kRegionNames[static_cast<std::size_t>(r)]; }

inline RegionLabel region_from_string(std::string_view name) {
    for (std::size_t i = 0; i < kRegionCount; ++i)
        if (kRegionNames[i] == name) return static_cast<RegionLabel>(i);
    throw UsageError("unknown region name '" + std::string(name) + "'");
}

inline bool is_desirable_side(RegionLabel r) {
    switch (r) {
        case RegionLabel::Shelter:
        case RegionLabel::Glade:
        case RegionLabel::LakeUnlimited:
        case RegionLabel::LakeLimited:
        case RegionLabel::SunnyUpstream:
        case RegionLabel::Backwater:
        case RegionLabel::SunnyDownstream:
        case RegionLabel::SunnyEddy:
        case RegionLabel::SunnyAbyss:
            return true;
        default:
            return false;
    }
}

// Every intermediate set of the partition computation.
struct TsmSets {
    PointSet desirable, shelter, manageable, upstream, glade, lake, lake_unlimited, backwater,
        downstream, downstream_rest, reach_desirable, eddies_plus, eddies_minus;
};

struct TsmResult {
    LabelArray<RegionLabel> labels;
    std::array<std::size_t, kRegionCount> counts{};
    std::map<std::string, std::string> metadata;  // deterministic, serialized
    std::map<std::string, double> timings;        // seconds per stage, not serialized
    std::optional<TsmSets> sets;

    std::size_t count(RegionLabel r) const { return counts[static_cast<std::size_t>(r)]; }
};

inline std::array<std::size_t, kRegionCount> count_labels(const LabelArray<RegionLabel>& labels) {
    std::array<std::size_t, kRegionCount> c{};
    for (RegionLabel r : labels.values()) ++c[static_cast<std::size_t>(r)];
    return c;
}

struct EddiesResult {
    PointSet plus, minus;
    std::size_t iterations = 0;
    std::vector<std::pair<std::size_t, std::size_t>> cardinalities;  // (|E+_i|, |E-_i|)
};

// Alternating capture-and-intersect iteration
//   E-_i = Capt(E+_{i-1}) n E-_{i-1},  E+_i = Capt(E-_i) n E+_{i-1}
// from the candidate sets until both stop changing.
inline EddiesResult eddies_iteration(const PointSet& candidates_plus, const PointSet& candidates_minus,
                                     const DiscreteDynamics& dyn, const ControlSubset& controls) {
    if (candidates_plus.intersects(candidates_minus))
        throw UsageError("eddy candidate sets must be disjoint");
    EddiesResult r{candidates_plus, candidates_minus, 0, {}};
    r.cardinalities.emplace_back(r.plus.count(), r.minus.count());
    while (true) {
        PointSet minus = capture_basin(r.plus, dyn, controls) & r.minus;
        PointSet plus = capture_basin(minus, dyn, controls) & r.plus;
        if (minus == r.minus && plus == r.plus) break;
        r.minus = std::move(minus);
        r.plus = std::move(plus);
        ++r.iterations;
        r.cardinalities.emplace_back(r.plus.count(), r.minus.count());
    }
    return r;
}

// Builds the partition from the discretized dynamics and the desirable set.
// `controls` is the full admissible control set; the system's default control
// must be a member.
inline TsmResult tsm_partition(const DiscreteDynamics& dyn, const PointSet& desirable, const ControlSubset& controls) {
    using Clock = std::chrono::steady_clock;
    detail::check_controls(dyn, controls);
    detail::check_grid(dyn, desirable);
    const ControlIndex u0 = dyn.system().default_control();
    if (std::find(controls.begin(), controls.end(), u0) == controls.end())
        throw UsageError("control set must contain the default control");

    TsmResult result{LabelArray<RegionLabel>(dyn.grid_ptr(), RegionLabel::Trench), {}, {}, {}, {}};
    auto& meta = result.metadata;
    auto stage = [&](const std::string& name, auto&& fn) {
        const auto t0 = Clock::now();
        IterationStats stats;
        auto value = fn(stats);
        result.timings[name] = std::chrono::duration<double>(Clock::now() - t0).count();
        meta["iterations." + name] = std::to_string(stats.iterations);
        return value;
    };

    const PointSet& plus = desirable;
    const PointSet minus = desirable.complement();
    const PointSet everything = PointSet::full(dyn.grid_ptr());

    PointSet shelter = stage("shelter", [&](auto& st) { return viability_kernel(plus, dyn, {u0}, &st); });
    PointSet manageable = stage("manageable", [&](auto& st) { return viability_kernel(plus, dyn, controls, &st); });
    PointSet upstream = stage("upstream", [&](auto& st) { return capture_basin(shelter, dyn, controls, &st); });
    PointSet glade = stage("glade", [&](auto& st) {
        return capture_basin(shelter, plus, dyn, controls, &st) - shelter;
    });
    PointSet lake = (upstream & manageable) - shelter - glade;
    PointSet lake_unlimited =
        stage("lake_unlimited", [&](auto& st) { return viability_kernel(lake, dyn, controls, &st); });
    PointSet lake_limited = lake - lake_unlimited;
    PointSet upstream_rest = upstream - manageable;
    PointSet backwater = manageable - upstream;
    PointSet downstream = stage("downstream", [&](auto& st) {
        return capture_basin(manageable, dyn, controls, &st) - upstream;
    });
    PointSet downstream_rest = stage("downstream_rest", [&](auto& st) {
        return capture_basin(backwater, dyn, controls, &st) - upstream - backwater;
    });
    // Points of the downstream that reach the manageable region but not the
    // backwater carry no named sub-region; they are labeled by desirability
    // like the rest of the downstream and counted separately.
    PointSet downstream_unnamed = downstream - backwater - downstream_rest;
    PointSet reach_desirable =
        stage("reach_desirable", [&](auto& st) { return capture_basin(plus, dyn, controls, &st); });
    PointSet trench = everything - reach_desirable;

    const auto t0 = Clock::now();
    EddiesResult eddies = eddies_iteration(plus - upstream - downstream, minus - upstream - downstream, dyn, controls);
    result.timings["eddies"] = std::chrono::duration<double>(Clock::now() - t0).count();
    meta["iterations.eddies"] = std::to_string(eddies.iterations);

    PointSet abyss = everything - upstream - downstream - eddies.plus - eddies.minus - trench;

    auto& labels = result.labels;
    labels.assign(shelter, RegionLabel::Shelter);
    labels.assign(glade, RegionLabel::Glade);
    labels.assign(lake_unlimited, RegionLabel::LakeUnlimited);
    labels.assign(lake_limited, RegionLabel::LakeLimited);
    labels.assign(upstream_rest & plus, RegionLabel::SunnyUpstream);
    labels.assign(upstream_rest & minus, RegionLabel::DarkUpstream);
    labels.assign(backwater, RegionLabel::Backwater);
    const PointSet downstream_other = downstream_rest | downstream_unnamed;
    labels.assign(downstream_other & plus, RegionLabel::SunnyDownstream);
    labels.assign(downstream_other & minus, RegionLabel::DarkDownstream);
    labels.assign(eddies.plus, RegionLabel::SunnyEddy);
    labels.assign(eddies.minus, RegionLabel::DarkEddy);
    labels.assign(abyss & plus, RegionLabel::SunnyAbyss);
    labels.assign(abyss & minus, RegionLabel::DarkAbyss);
    labels.assign(trench, RegionLabel::Trench);
    result.counts = count_labels(labels);

    meta["downstream_unnamed_points"] = std::to_string(downstream_unnamed.count());
    meta["grid.points"] = std::to_string(dyn.grid().size());
    result.sets = TsmSets{plus,       shelter,        manageable, upstream,        glade,
                          lake,       lake_unlimited, backwater,  downstream,      downstream_rest,
                          reach_desirable, eddies.plus, eddies.minus};
    return result;
}

inline std::array<double, kRegionCount> relative_volumes(const TsmResult& r) {
    std::array<double, kRegionCount> f{};
    const double total = static_cast<double>(r.labels.size());
    for (std::size_t i = 0; i < kRegionCount; ++i) f[i] = static_cast<double>(r.counts[i]) / total;
    return f;
}

// Label of the lattice point nearest to x, for results on the grid's own
// coordinates.
inline RegionLabel classify_lattice_point(const StateVector& y, const TsmResult& r) {
    return r.labels[r.labels.grid().index_of(y)];
}

// Label of a point given in original coordinates of a compactified system.
inline RegionLabel classify_point(const StateVector& x, const TsmResult& r, const CompactMap& map) {
    return classify_lattice_point(compactify(x, map), r);
}

}  // namespace tsm
