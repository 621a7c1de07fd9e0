#pragma once

// Saint-Pierre viability kernels and interior capture basins over the
// linearized, ball-extended discrete dynamics of a ControlledSystem.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "tsm/errors.hpp"
#include "tsm/grid.hpp"
#include "tsm/parallel.hpp"
#include "tsm/state.hpp"
#include "tsm/system.hpp"

namespace tsm {

enum class ExpansionMode { kGuaranteed, kStrict };

inline const char* to_string(ExpansionMode m) {
    return m == ExpansionMode::kGuaranteed ? "guaranteed" : "strict";
}

// Euler step dt and successor ball radius.  In guaranteed mode the radius is
// h + (M l / 2) dt^2 with M a bound on |f| and l a Lipschitz estimate; strict
// mode drops the second term.
struct SuccessorConfig {
    double dt = 0.0;
    double radius = 0.0;
    double rhs_bound = 1.0;
    double lipschitz = 10.0;
    ExpansionMode mode = ExpansionMode::kGuaranteed;

    static SuccessorConfig make(const Grid& grid, double dt, double rhs_bound = 1.0, double lipschitz = 10.0,
                                ExpansionMode mode = ExpansionMode::kGuaranteed) {
        if (!(dt > 0.0) || !std::isfinite(dt)) throw ParameterError("time step must be positive");
        if (!(rhs_bound >= 0.0) || !(lipschitz >= 0.0))
            throw ParameterError("rhs bound and Lipschitz constant must be nonnegative");
        SuccessorConfig c;
        c.dt = dt;
        c.rhs_bound = rhs_bound;
        c.lipschitz = lipschitz;
        c.mode = mode;
        c.radius = grid.covering_radius();
        if (mode == ExpansionMode::kGuaranteed) c.radius += 0.5 * rhs_bound * lipschitz * dt * dt;
        return c;
    }

    // dt = 1.5 x the finest axis spacing, for homogenized systems (M = 1).
    static SuccessorConfig defaults(const Grid& grid, ExpansionMode mode = ExpansionMode::kGuaranteed,
                                    double lipschitz = 10.0) {
        return make(grid, 1.5 * grid.min_spacing(), 1.0, lipschitz, mode);
    }
};

enum class CacheMode { kAuto, kOn, kOff };

inline constexpr std::size_t kAutoCacheLimit = 1'000'000;  // (points x controls) entries

struct IterationStats {
    std::size_t iterations = 0;              // number of steps that changed the set
    std::vector<std::size_t> cardinalities;  // |K_0|, |K_1|, ..., |K_final|
};

// The discretized dynamics: a system on a grid with a successor rule.
class DiscreteDynamics {
public:
    DiscreteDynamics(ControlledSystem system, GridPtr grid, SuccessorConfig cfg,
                     CacheMode cache = CacheMode::kAuto, unsigned workers = default_workers())
        : system_(std::move(system)), grid_(std::move(grid)), cfg_(cfg), workers_(std::max(1u, workers)) {
        if (system_.dimension() != grid_->dimension()) throw UsageError("system/grid dimension mismatch");
        if (!(cfg_.dt > 0.0)) throw ParameterError("time step must be positive");
        if (!(cfg_.radius >= grid_->covering_radius() * (1.0 - 1e-12)))
            throw ParameterError("successor radius must be at least the covering radius h");
        const std::size_t entries = grid_->size() * system_.control_count();
        if (cache == CacheMode::kOn || (cache == CacheMode::kAuto && entries <= kAutoCacheLimit)) build_cache();
    }

    const ControlledSystem& system() const noexcept { return system_; }
    const GridPtr& grid_ptr() const noexcept { return grid_; }
    const Grid& grid() const noexcept { return *grid_; }
    const SuccessorConfig& config() const noexcept { return cfg_; }
    unsigned workers() const noexcept { return workers_; }
    bool cached() const noexcept { return !offsets_.empty(); }

    // Upper bound on the distance between a point and any of its successors;
    // infinite when the system declares no bound on |f|.
    double reach() const noexcept {
        const auto bound = system_.norm_bound();
        return bound ? *bound * cfg_.dt + cfg_.radius : std::numeric_limits<double>::infinity();
    }

    StateVector euler_center(LatticeIndex x, ControlIndex u) const {
        const StateVector p = grid_->point_of(x);
        const StateVector v = system_(p, u);
        if (!all_finite(v)) throw DomainError("non-finite right-hand side during successor computation");
        return p + v * cfg_.dt;
    }

    PointSet successors(LatticeIndex x, ControlIndex u) const {
        if (x >= grid_->size()) throw UsageError("lattice index out of range");
        return ball_query(grid_, euler_center(x, u), cfg_.radius);
    }

    bool has_successor_in(LatticeIndex x, ControlIndex u, const PointSet& set) const {
        if (cached()) {
            const std::size_t e = x * system_.control_count() + u;
            for (std::uint64_t k = offsets_[e]; k < offsets_[e + 1]; ++k)
                if (set.contains(targets_[k])) return true;
            return false;
        }
        return grid_->any_in_ball(euler_center(x, u), cfg_.radius,
                                  [&](LatticeIndex j) { return set.contains(j); });
    }

    bool has_successor_in(LatticeIndex x, const ControlSubset& controls, const PointSet& set) const {
        for (ControlIndex u : controls)
            if (has_successor_in(x, u, set)) return true;
        return false;
    }

    std::vector<LatticeIndex> cached_successors(LatticeIndex x, ControlIndex u) const {
        const std::size_t e = x * system_.control_count() + u;
        return {targets_.begin() + static_cast<std::ptrdiff_t>(offsets_[e]),
                targets_.begin() + static_cast<std::ptrdiff_t>(offsets_[e + 1])};
    }

private:
    void build_cache() {
        const std::size_t n = grid_->size();
        const std::size_t controls = system_.control_count();
        std::vector<std::vector<std::uint32_t>> lists(n * controls);
        parallel_for(n, workers_, [&](std::size_t begin, std::size_t end, unsigned) {
            for (std::size_t x = begin; x < end; ++x)
                for (ControlIndex u = 0; u < controls; ++u) {
                    auto& out = lists[x * controls + u];
                    grid_->any_in_ball(euler_center(x, u), cfg_.radius, [&](LatticeIndex j) {
                        out.push_back(static_cast<std::uint32_t>(j));
                        return false;
                    });
                }
        });
        offsets_.assign(n * controls + 1, 0);
        for (std::size_t e = 0; e < lists.size(); ++e) offsets_[e + 1] = offsets_[e] + lists[e].size();
        targets_.reserve(offsets_.back());
        for (auto& l : lists) targets_.insert(targets_.end(), l.begin(), l.end());
    }

    ControlledSystem system_;
    GridPtr grid_;
    SuccessorConfig cfg_;
    unsigned workers_;
    std::vector<std::uint64_t> offsets_;
    std::vector<std::uint32_t> targets_;
};

namespace detail {

inline void check_controls(const DiscreteDynamics& dyn, const ControlSubset& controls) {
    if (controls.empty()) throw UsageError("control subset must not be empty");
    for (ControlIndex u : controls)
        if (u >= dyn.system().control_count()) throw UsageError("control index out of range");
}

inline void check_grid(const DiscreteDynamics& dyn, const PointSet& s) {
    if (!(s.grid() == dyn.grid())) throw UsageError("point set and dynamics use different grids");
}

// Members of `candidates` for which pred(i) holds, evaluated in parallel.
template <class Pred>
PointSet parallel_filter(const PointSet& candidates, unsigned workers, Pred&& pred) {
    PointSet out(candidates.grid_ptr());
    parallel_for(candidates.universe(), workers, [&](std::size_t begin, std::size_t end, unsigned) {
        candidates.for_each_in(begin, end, [&](LatticeIndex i) {
            if (pred(i)) out.insert(i);
        });
    });
    return out;
}

}  // namespace detail

// Greatest fixed point of K <- {x in K | exists u: S(x,u) meets K} from
// K_0 = constraint.  Each step tests the points against the frozen previous
// set.  Only points within reach() of a point removed in the previous step can
// change status, so only those are re-tested.
inline PointSet viability_kernel(const PointSet& constraint, const DiscreteDynamics& dyn,
                                 const ControlSubset& controls, IterationStats* stats = nullptr) {
    detail::check_controls(dyn, controls);
    detail::check_grid(dyn, constraint);
    const double reach = dyn.reach();
    PointSet kernel = constraint;
    PointSet dirty = kernel;
    IterationStats local;
    local.cardinalities.push_back(kernel.count());
    while (true) {
        PointSet removed = detail::parallel_filter(dirty, dyn.workers(), [&](LatticeIndex i) {
            return !dyn.has_successor_in(i, controls, kernel);
        });
        if (removed.empty()) break;
        kernel -= removed;
        ++local.iterations;
        local.cardinalities.push_back(kernel.count());
        dirty = std::isfinite(reach) ? dilate(removed, reach, kernel, dyn.workers()) : kernel;
    }
    if (stats) *stats = std::move(local);
    return kernel;
}

// Least fixed point of K <- K u {x in constraint | exists u: S(x,u) meets K}
// from K_0 = target.  Growth happens only near the points added last.
inline PointSet capture_basin(const PointSet& target, const PointSet& constraint, const DiscreteDynamics& dyn,
                              const ControlSubset& controls, IterationStats* stats = nullptr) {
    detail::check_controls(dyn, controls);
    detail::check_grid(dyn, target);
    detail::check_grid(dyn, constraint);
    const double reach = dyn.reach();
    PointSet basin = target;
    PointSet frontier = target;
    IterationStats local;
    local.cardinalities.push_back(basin.count());
    while (!frontier.empty()) {
        const PointSet open = constraint - basin;
        const PointSet candidates = std::isfinite(reach) ? dilate(frontier, reach, open, dyn.workers()) : open;
        PointSet added = detail::parallel_filter(candidates, dyn.workers(), [&](LatticeIndex i) {
            return dyn.has_successor_in(i, controls, basin);
        });
        if (added.empty()) break;
        basin |= added;
        ++local.iterations;
        local.cardinalities.push_back(basin.count());
        frontier = std::move(added);
    }
    if (stats) *stats = std::move(local);
    return basin;
}

// Unconstrained capture basin (growth anywhere on the grid).
inline PointSet capture_basin(const PointSet& target, const DiscreteDynamics& dyn, const ControlSubset& controls,
                              IterationStats* stats = nullptr) {
    return capture_basin(target, PointSet::full(target.grid_ptr()), dyn, controls, stats);
}

// Largest finite-difference quotient |f(x + d e_i, u) - f(x, u)| / d over
// random grid-box samples; a cheap estimate of the Lipschitz constant.
inline double estimate_lipschitz(const ControlledSystem& sys, const Grid& grid, std::size_t samples,
                                 std::uint64_t seed, double step = 1e-6) {
    std::mt19937_64 rng(seed);
    double best = 0.0;
    for (std::size_t k = 0; k < samples; ++k) {
        StateVector x(grid.dimension());
        for (std::size_t i = 0; i < x.size(); ++i) {
            std::uniform_real_distribution<double> d(grid.lower()[i], grid.upper()[i] - 2 * step);
            x[i] = d(rng);
        }
        for (ControlIndex u = 0; u < sys.control_count(); ++u) {
            const StateVector f0 = sys(x, u);
            for (std::size_t i = 0; i < x.size(); ++i) {
                StateVector xp = x;
                xp[i] += step;
                best = std::max(best, norm(sys(xp, u) - f0) / step);
            }
        }
    }
    return best;
}

}  // namespace tsm
