#pragma once

// Compactification of [0, inf)^n onto [0, 1)^n and nonlinear local time
// homogenization, both as wrappers around an arbitrary ControlledSystem.

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "tsm/errors.hpp"
#include "tsm/state.hpp"
#include "tsm/system.hpp"

namespace tsm {

// Per-coordinate map x_i -> x_i / (x_mid_i + x_i).  x_mid is sent to
// (1/2, ..., 1/2), so it sets the scale that is resolved best.
class CompactMap {
public:
    explicit CompactMap(StateVector x_mid) : x_mid_(std::move(x_mid)) {
        if (x_mid_.size() == 0) throw ParameterError("CompactMap needs at least one coordinate");
        for (double m : x_mid_)
            if (!(m > 0.0) || !std::isfinite(m))
                throw ParameterError("CompactMap scales must be positive and finite");
    }

    std::size_t dimension() const noexcept { return x_mid_.size(); }
    const StateVector& x_mid() const noexcept { return x_mid_; }

private:
    StateVector x_mid_;
};

inline StateVector compactify(const StateVector& x, const CompactMap& map) {
    if (x.size() != map.dimension()) throw UsageError("compactify: dimension mismatch");
    StateVector y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i]) || x[i] < 0.0)
            throw DomainError("compactify: component " + std::to_string(i) +
                              " must be finite and nonnegative");
        y[i] = x[i] / (map.x_mid()[i] + x[i]);
    }
    return y;
}

inline StateVector decompactify(const StateVector& y, const CompactMap& map) {
    if (y.size() != map.dimension()) throw UsageError("decompactify: dimension mismatch");
    StateVector x(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!(y[i] >= 0.0 && y[i] < 1.0))
            throw DomainError("decompactify: component " + std::to_string(i) +
                              " must lie in [0, 1)");
        x[i] = map.x_mid()[i] * y[i] / (1.0 - y[i]);
    }
    return x;
}

// F(y) = (DPhi . f)(Phi^-1(y)), componentwise (1 - y_i)^2 / x_mid_i * f_i.
// Finite registered fixed points of f are carried over under Phi.  Points with
// a coordinate equal to 1 have no preimage; they evaluate only if registered on
// the returned system (e.g. a fixed point at infinity).
inline ControlledSystem transform_rhs(const ControlledSystem& f, const CompactMap& map) {
    if (f.dimension() != map.dimension()) throw UsageError("transform_rhs: dimension mismatch");
    auto rhs = [f, map](const StateVector& y, ControlIndex u) {
        StateVector x = decompactify(y, map);
        StateVector dx = f(x, u);
        StateVector dy(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) {
            double w = 1.0 - y[i];
            dy[i] = w * w / map.x_mid()[i] * dx[i];
        }
        return dy;
    };
    ControlledSystem out(f.dimension(), f.control_names(), f.default_control(), rhs);
    for (const auto& p : f.registered_fixed_points()) {
        bool finite = all_finite(p) && std::all_of(p.begin(), p.end(), [](double v) { return v >= 0.0; });
        if (finite) out.register_fixed_point(compactify(p, map));
    }
    return out;
}

// Evaluates `sys` on the closed unit cube.  Coordinates above 1 - offset are
// pulled back to 1 - offset before evaluation, so a face point takes the value
// of its one-sided limit along the inward normal.  Registered fixed points are
// kept and still evaluate to zero.
inline ControlledSystem extend_to_closed_faces(const ControlledSystem& sys, double offset) {
    if (!(offset > 0.0 && offset < 0.5)) throw ParameterError("face offset must lie in (0, 0.5)");
    auto rhs = [sys, offset](const StateVector& y, ControlIndex u) {
        StateVector inner = y;
        for (double& v : inner) {
            if (v > 1.0 || v < 0.0) throw DomainError("point outside the closed unit cube");
            v = std::min(v, 1.0 - offset);
        }
        return sys(inner, u);
    };
    ControlledSystem out(sys.dimension(), sys.control_names(), sys.default_control(), rhs);
    for (const auto& p : sys.registered_fixed_points()) out.register_fixed_point(p);
    out.set_norm_bound(sys.norm_bound());
    return out;
}

// F~ = F / (|F| + epsilon) with the Euclidean norm.  Orbits and zeros of F are
// unchanged; the speed is below 1 everywhere and close to 1 wherever
// |F| >> epsilon.
class HomogenizedSystem {
public:
    HomogenizedSystem(ControlledSystem inner, double epsilon)
        : inner_(std::move(inner)), epsilon_(epsilon) {
        if (!(epsilon_ > 0.0) || !std::isfinite(epsilon_))
            throw ParameterError("homogenization epsilon must be positive");
    }

    const ControlledSystem& inner() const noexcept { return inner_; }
    double epsilon() const noexcept { return epsilon_; }

    StateVector operator()(const StateVector& y, ControlIndex u) const {
        StateVector v = inner_(y, u);
        double n = norm(v);
        if (!std::isfinite(n)) {
            // |F| overflowed: the limit of F / (|F| + eps) is the unit direction.
            double scale = 0.0;
            for (double c : v) scale = std::max(scale, std::abs(c));
            if (!std::isfinite(scale)) throw DomainError("homogenize: non-finite right-hand side");
            v *= 1.0 / scale;
            return v * (1.0 / norm(v));
        }
        return v * (1.0 / (n + epsilon_));
    }

    ControlledSystem as_system() const {
        auto self = *this;
        ControlledSystem out(inner_.dimension(), inner_.control_names(), inner_.default_control(),
                             [self](const StateVector& y, ControlIndex u) { return self(y, u); });
        for (const auto& p : inner_.registered_fixed_points()) out.register_fixed_point(p);
        out.set_norm_bound(1.0);
        return out;
    }

private:
    ControlledSystem inner_;
    double epsilon_;
};

inline HomogenizedSystem homogenize(const ControlledSystem& system, double epsilon) {
    return HomogenizedSystem(system, epsilon);
}

}  // namespace tsm
