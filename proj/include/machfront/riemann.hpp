#pragma once
#include <cmath>
#include <utility>

#include "machfront/errors.hpp"
#include "machfront/gas.hpp"

// Characteristic structure of the steady supersonic flow: slopes dx/dy of
// the two characteristic families through a point, flow angle and
// Prandtl-Meyer function, and the Riemann invariants carried along each
// family.

namespace machfront {

// Slopes (lambda_minus, lambda_plus) of the two characteristics, as dx/dy
// with y the marching direction.  Real only where the flow is supersonic.
inline std::pair<double, double> char_slopes(const GasModel& gas, double phi1, double phi2) {
    const double q_sq = phi1 * phi1 + phi2 * phi2;
    const double c_sq = gas.sound_speed_sq(q_sq);
    const double disc = c_sq * (q_sq - c_sq);
    if (disc <= 0.0)
        throw SonicError("characteristic slopes are complex: flow is not supersonic");
    const double denom = c_sq - phi1 * phi1;
    if (denom == 0.0)
        throw DegeneracyError("characteristic slope denominator c^2 - phi1^2 vanishes");
    const double root = std::sqrt(disc);
    const double base = -phi1 * phi2;
    return {(base - root) / denom, (base + root) / denom};
}

// Flow angle measured from the x axis: velocity = (q sin th, q cos th) in
// (phi1, phi2) components, so th = atan2(phi1, phi2).
inline double flow_angle(double phi1, double phi2) {
    return std::atan2(phi1, phi2);
}

// Prandtl-Meyer function of the Mach number, zero at M = 1.
inline double prandtl_meyer(const GasModel& gas, double M) {
    if (M < 1.0)
        throw SonicError("Prandtl-Meyer function needs M >= 1");
    const double k = (gas.gamma + 1.0) / (gas.gamma - 1.0);
    const double m2 = M * M - 1.0;
    return std::sqrt(k) * std::atan(std::sqrt(m2 / k)) - std::atan(std::sqrt(m2));
}

// Inverse of the Prandtl-Meyer function by Newton iteration with a bisection
// fallback; nu must lie in [0, nu_max) where nu_max = (sqrt(k)-1) pi/2.
inline double mach_from_prandtl_meyer(const GasModel& gas, double nu) {
    const double k = (gas.gamma + 1.0) / (gas.gamma - 1.0);
    const double nu_max = (std::sqrt(k) - 1.0) * std::asin(1.0);
    if (nu < 0.0 || nu >= nu_max)
        throw std::domain_error("Prandtl-Meyer angle out of range");
    if (nu == 0.0) return 1.0;
    double lo = 1.0, hi = 2.0;
    while (prandtl_meyer(gas, hi) < nu) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e8) throw std::runtime_error("Prandtl-Meyer inversion failed to bracket");
    }
    double M = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double f = prandtl_meyer(gas, M) - nu;
        if (f > 0.0) hi = M; else lo = M;
        // dnu/dM = sqrt(M^2-1) / (M (1 + (gamma-1)/2 M^2))
        const double dnu = std::sqrt(M * M - 1.0) /
                           (M * (1.0 + 0.5 * (gas.gamma - 1.0) * M * M));
        double Mn = M - f / dnu;
        if (!(Mn > lo && Mn < hi)) Mn = 0.5 * (lo + hi);
        if (std::abs(Mn - M) <= 1e-15 * M) { M = Mn; break; }
        M = Mn;
    }
    return M;
}

// Riemann invariants: v1 = th + nu rides the minus family, v2 = th - nu the
// plus family.
struct Invariants {
    double v1 = 0.0;
    double v2 = 0.0;
};

inline Invariants invariants(const GasModel& gas, double phi1, double phi2) {
    const double nu = prandtl_meyer(gas, gas.mach(phi1, phi2));
    const double th = flow_angle(phi1, phi2);
    return {th + nu, th - nu};
}

// Recover the velocity components from the pair of invariants.
inline std::pair<double, double> velocity_from_invariants(const GasModel& gas,
                                                          const Invariants& v) {
    const double th = 0.5 * (v.v1 + v.v2);
    const double nu = 0.5 * (v.v1 - v.v2);
    const double M = mach_from_prandtl_meyer(gas, nu);
    const double q = gas.speed_from_mach(M);
    return {q * std::sin(th), q * std::cos(th)};
}

}  // namespace machfront
