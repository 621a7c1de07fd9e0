#pragma once

// The AYS model: excess atmospheric carbon A [GtC], economic output Y [US$/a]
// and renewable knowledge stock S [GJ], with low-growth (LG) and energy
// transformation (ET) management options.

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "tsm/errors.hpp"
#include "tsm/geometry.hpp"
#include "tsm/state.hpp"
#include "tsm/system.hpp"

namespace tsm::ays {

struct Params {
    double tau_A = 50.0;            // a
    double tau_S = 50.0;            // a
    double beta = 0.03;             // 1/a
    double beta_lg = 0.015;         // 1/a
    double theta = 8.57e-5;         // 1/(GtC a)
    double epsilon_energy = 147.0;  // US$/GJ
    double phi = 4.7e10;            // GJ/GtC
    double sigma = 4e12;            // GJ
    double sigma_et = 4e12 * 0.7071067811865476;  // GJ, sigma * (1/2)^(1/rho)
    double rho = 2.0;
    double A_mid = 240.0;  // GtC
    double Y_mid = 7e13;   // US$/a
    double S_mid = 5e11;   // GJ
    double A_PB = 345.0;   // GtC
    double Y_SF = 4e13;    // US$/a

    void validate() const {
        const std::pair<const char*, double> fields[] = {
            {"tau_A", tau_A}, {"tau_S", tau_S}, {"beta", beta}, {"beta_lg", beta_lg},
            {"theta", theta}, {"epsilon_energy", epsilon_energy}, {"phi", phi},
            {"sigma", sigma}, {"sigma_et", sigma_et}, {"rho", rho}, {"A_mid", A_mid},
            {"Y_mid", Y_mid}, {"S_mid", S_mid}, {"A_PB", A_PB}, {"Y_SF", Y_SF}};
        for (const auto& [name, value] : fields)
            if (!(value > 0.0) || !std::isfinite(value))
                throw ParameterError(std::string("AYS parameter ") + name + " must be positive");
    }

    StateVector x_mid() const { return {A_mid, Y_mid, S_mid}; }
    CompactMap compact_map() const { return CompactMap(x_mid()); }
};

enum class Control : ControlIndex { kDefault = 0, kLowGrowth = 1, kEnergyTransformation = 2, kCombined = 3 };

inline const std::vector<std::string>& control_names() {
    static const std::vector<std::string> names{"default", "lg", "et", "lg+et"};
    return names;
}

// Growth rate and break-even knowledge level in effect under control u.
inline double effective_beta(const Params& p, ControlIndex u) {
    return (u == 1 || u == 3) ? p.beta_lg : p.beta;
}
inline double effective_sigma(const Params& p, ControlIndex u) {
    return (u == 2 || u == 3) ? p.sigma_et : p.sigma;
}

namespace detail {
inline double ratio_pow(double ratio, double rho) {
    return rho == 2.0 ? ratio * ratio : std::pow(ratio, rho);
}
inline void check_control(ControlIndex u) {
    if (u > 3) throw UsageError("AYS control index out of range");
}
}  // namespace detail

// Fossil share Gamma = 1 / (1 + (S/sigma)^rho).
inline double fossil_share(double S, double sigma, double rho) {
    return 1.0 / (1.0 + detail::ratio_pow(S / sigma, rho));
}

inline StateVector rhs(const StateVector& x, ControlIndex u, const Params& p) {
    detail::check_control(u);
    if (x.size() != 3) throw UsageError("AYS state must have three components");
    const double A = x[0], Y = x[1], S = x[2];
    if (!(A >= 0.0 && Y >= 0.0 && S >= 0.0))
        throw DomainError("AYS state components must be nonnegative");
    const double beta = effective_beta(p, u);
    const double gamma = fossil_share(S, effective_sigma(p, u), p.rho);
    const double demand = Y / p.epsilon_energy;
    const double fossil = gamma * demand;
    const double renewable = (1.0 - gamma) * demand;
    const double emissions = fossil / p.phi;
    return {emissions - A / p.tau_A, beta * Y - p.theta * A * Y, renewable - S / p.tau_S};
}

// Right-hand side in compactified coordinates (a, y, s) = Phi(A, Y, S) with
// x_mid = (A_mid, Y_mid, S_mid), closed form.  The green fixed point (0, 1, 1)
// evaluates to zero; other points with a unit coordinate are out of domain.
inline StateVector rhs_transformed(const StateVector& q, ControlIndex u, const Params& p) {
    detail::check_control(u);
    if (q.size() != 3) throw UsageError("AYS state must have three components");
    const double a = q[0], y = q[1], s = q[2];
    for (double c : {a, y, s})
        if (!(c >= 0.0 && c <= 1.0)) throw DomainError("transformed AYS state must lie in [0, 1]^3");
    if (a == 0.0 && y == 1.0 && s == 1.0) return {0.0, 0.0, 0.0};
    if (a == 1.0 || y == 1.0 || s == 1.0)
        throw DomainError("transformed AYS state on a face at infinity");

    const double beta = effective_beta(p, u);
    const double sigma = effective_sigma(p, u);
    const double fs = detail::ratio_pow(1.0 - s, p.rho);
    const double gamma = fs / (fs + detail::ratio_pow(p.S_mid * s / sigma, p.rho));
    const double y_ratio = y / (1.0 - y);
    const double da = p.Y_mid / (p.phi * p.epsilon_energy * p.A_mid) * gamma * (1.0 - a) * (1.0 - a) * y_ratio -
                      a * (1.0 - a) / p.tau_A;
    const double dy = y * (1.0 - y) * (beta - p.theta * p.A_mid * a / (1.0 - a));
    const double ds = (1.0 - gamma) * p.Y_mid / (p.epsilon_energy * p.S_mid) * (1.0 - s) * (1.0 - s) * y_ratio -
                      s * (1.0 - s) / p.tau_S;
    return {da, dy, ds};
}

// Desirable region: below the climate boundary and above the social foundation.
// Both inequalities are strict, so boundary points are undesirable.
inline bool desirable(const StateVector& x, const Params& p) {
    return x[0] < p.A_PB && x[1] > p.Y_SF;
}

// The same predicate evaluated on compactified coordinates; a unit coordinate
// stands for an infinite stock.
inline bool desirable_transformed(const StateVector& q, const Params& p) {
    const double A = q[0] >= 1.0 ? std::numeric_limits<double>::infinity() : p.A_mid * q[0] / (1.0 - q[0]);
    const double Y = q[1] >= 1.0 ? std::numeric_limits<double>::infinity() : p.Y_mid * q[1] / (1.0 - q[1]);
    return A < p.A_PB && Y > p.Y_SF;
}

inline StateVector current_state(const Params& = {}) { return {240.0, 7e13, 5e11}; }

struct FixedPoint {
    std::string name;
    StateVector x;  // original coordinates; infinite components for points at infinity
    bool at_infinity = false;
};

// Black fixed point under control u.  ET leaves it unchanged.
inline StateVector black_fixed_point(const Params& p, ControlIndex u = 0) {
    detail::check_control(u);
    const double beta = effective_beta(p, u);
    return {beta / p.theta, p.phi * p.epsilon_energy * beta / (p.theta * p.tau_A), 0.0};
}

inline StateVector black_fixed_point_transformed(const Params& p, ControlIndex u = 0) {
    const double beta = effective_beta(p, u);
    return {beta / (beta + p.theta * p.A_mid),
            p.phi * p.epsilon_energy * beta /
                (p.phi * p.epsilon_energy * beta + p.Y_mid * p.theta * p.tau_A),
            0.0};
}

inline StateVector green_fixed_point_transformed() { return {0.0, 1.0, 1.0}; }

inline std::vector<FixedPoint> fixed_points(const Params& p, ControlIndex u = 0) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return {{"black", black_fixed_point(p, u), false}, {"green", {0.0, inf, inf}, true}};
}

inline ControlledSystem make_system(const Params& p) {
    p.validate();
    return ControlledSystem(3, control_names(), 0,
                            [p](const StateVector& x, ControlIndex u) { return rhs(x, u, p); });
}

inline ControlledSystem make_transformed_system(const Params& p) {
    p.validate();
    ControlledSystem sys(3, control_names(), 0,
                         [p](const StateVector& q, ControlIndex u) { return rhs_transformed(q, u, p); });
    sys.register_fixed_point(green_fixed_point_transformed());
    return sys;
}

// The system handed to the grid algorithms: compactified, extended to the
// closed cube through one-sided limits, and time-homogenized.
inline ControlledSystem make_grid_system(const Params& p, double epsilon, double face_offset = 1e-9) {
    return homogenize(extend_to_closed_faces(make_transformed_system(p), face_offset), epsilon).as_system();
}

}  // namespace tsm::ays
