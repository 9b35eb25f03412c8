#pragma once
// Polytropic equation-of-state closure for steady isentropic potential flow.
//
// Bernoulli ties the local sound speed to the flow speed,
//     c^2(q) = c0^2 - (gamma-1)/2 q^2,
// and the isentropic density law is rho(q) = rho0 (c^2/c0^2)^{1/(gamma-1)}.
// Together they satisfy c^2 = -rho q / rho'(q) identically, which is the
// relation the characteristic structure of the flow equations needs.
//
// Two distinguished speeds:
//   q_max = c0 sqrt(2/(gamma-1)): vacuum limit, c(q_max) = 0.  Queries at or
//           beyond it are rejected rather than clamped, so data-generation
//           bugs surface instead of silently saturating.
//   q_cr  = c0 sqrt(2/(gamma+1)): critical speed, the unique fixed point of
//           q = c(q).  The flow is supersonic (M > 1) exactly when q > q_cr.

#include <cmath>
#include <stdexcept>

namespace machfront {

struct GasModel {
    double gamma = 1.4;  // adiabatic exponent, > 1
    double c0    = 1.0;  // stagnation sound speed, > 0
    double rho0  = 1.0;  // stagnation density, > 0

    void check() const {
        if (!(gamma > 1.0)) throw std::domain_error("GasModel: gamma must be > 1");
        if (!(c0 > 0.0))    throw std::domain_error("GasModel: c0 must be > 0");
        if (!(rho0 > 0.0))  throw std::domain_error("GasModel: rho0 must be > 0");
    }

    double q_max() const { return c0 * std::sqrt(2.0 / (gamma - 1.0)); }

    double critical_speed() const { return c0 * std::sqrt(2.0 / (gamma + 1.0)); }

    // c^2 as a function of q^2.  Central to the metric algebra, so it takes
    // q^2 directly and avoids a square root.
    double sound_speed_sq(double q_sq) const {
        if (!(q_sq >= 0.0))
            throw std::domain_error("GasModel: negative q^2");
        const double c2 = c0 * c0 - 0.5 * (gamma - 1.0) * q_sq;
        if (!(c2 > 0.0))
            throw std::domain_error("GasModel: speed at or beyond the vacuum limit q_max");
        return c2;
    }

    double sound_speed(double q) const {
        if (!(q >= 0.0))
            throw std::domain_error("GasModel: negative speed");
        return std::sqrt(sound_speed_sq(q * q));
    }

    double density(double q) const {
        const double c2 = sound_speed_sq(q * q);
        return rho0 * std::pow(c2 / (c0 * c0), 1.0 / (gamma - 1.0));
    }

    double mach(double q1, double q2) const {
        const double q_sq = q1 * q1 + q2 * q2;
        return std::sqrt(q_sq / sound_speed_sq(q_sq));
    }

    // Inverse of M(q); handy for setting up a far-field state by Mach number.
    double speed_from_mach(double M) const {
        if (!(M >= 0.0))
            throw std::domain_error("GasModel: negative Mach number");
        return c0 * M / std::sqrt(1.0 + 0.5 * (gamma - 1.0) * M * M);
    }
};

}  // namespace machfront
