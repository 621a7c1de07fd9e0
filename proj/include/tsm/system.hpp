#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tsm/errors.hpp"
#include "tsm/state.hpp"

namespace tsm {

using ControlIndex = std::size_t;
using ControlSubset = std::vector<ControlIndex>;

// Right-hand side f(x, u) of a controlled ODE over a finite control set.
using RhsFunction = std::function<StateVector(const StateVector&, ControlIndex)>;

// A controlled dynamical system x' = f(x, u) with one distinguished default
// control.  Points registered as fixed points (typically boundary points of a
// compactified space where f has no finite value) evaluate to zero for every
// control without consulting f.
class ControlledSystem {
public:
    ControlledSystem(std::size_t dimension, std::vector<std::string> control_names,
                     ControlIndex default_control, RhsFunction rhs)
        : dimension_(dimension),
          control_names_(std::move(control_names)),
          default_control_(default_control),
          rhs_(std::move(rhs)) {
        if (dimension_ == 0 || dimension_ > kMaxDimension)
            throw UsageError("system dimension must be in [1, kMaxDimension]");
        if (control_names_.empty()) throw UsageError("control set must not be empty");
        if (default_control_ >= control_names_.size())
            throw UsageError("default control out of range");
        auto sorted = control_names_;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw UsageError("control names must be unique");
        if (!rhs_) throw UsageError("missing right-hand side");
    }

    std::size_t dimension() const noexcept { return dimension_; }
    std::size_t control_count() const noexcept { return control_names_.size(); }
    const std::vector<std::string>& control_names() const noexcept { return control_names_; }
    ControlIndex default_control() const noexcept { return default_control_; }

    ControlIndex control_index(const std::string& name) const {
        auto it = std::find(control_names_.begin(), control_names_.end(), name);
        if (it == control_names_.end()) throw UsageError("unknown control '" + name + "'");
        return static_cast<ControlIndex>(it - control_names_.begin());
    }

    ControlSubset all_controls() const {
        ControlSubset all(control_names_.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        return all;
    }

    // Upper bound on |f(x, u)| over the domain, when known (exactly 1 for
    // homogenized systems).
    std::optional<double> norm_bound() const noexcept { return norm_bound_; }
    void set_norm_bound(std::optional<double> bound) { norm_bound_ = bound; }

    void register_fixed_point(const StateVector& x) {
        if (x.size() != dimension_) throw UsageError("fixed point dimension mismatch");
        fixed_points_.push_back(x);
    }
    const std::vector<StateVector>& registered_fixed_points() const noexcept {
        return fixed_points_;
    }

    bool is_registered_fixed_point(const StateVector& x) const noexcept {
        constexpr double kTol = 1e-12;
        return std::any_of(fixed_points_.begin(), fixed_points_.end(), [&](const StateVector& p) {
            for (std::size_t i = 0; i < dimension_; ++i)
                if (std::abs(p[i] - x[i]) > kTol) return false;
            return true;
        });
    }

    StateVector operator()(const StateVector& x, ControlIndex u) const {
        if (x.size() != dimension_) throw UsageError("state dimension mismatch");
        if (u >= control_names_.size()) throw UsageError("control index out of range");
        if (!fixed_points_.empty() && is_registered_fixed_point(x)) return StateVector(dimension_);
        return rhs_(x, u);
    }

    // Raw evaluator, bypassing registered fixed points.  Used by wrappers that
    // re-register the points themselves.
    const RhsFunction& rhs() const noexcept { return rhs_; }

private:
    std::size_t dimension_;
    std::vector<std::string> control_names_;
    ControlIndex default_control_;
    RhsFunction rhs_;
    std::optional<double> norm_bound_;
    std::vector<StateVector> fixed_points_;
};

}  // namespace tsm
