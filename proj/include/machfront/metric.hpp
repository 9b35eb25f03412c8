#pragma once
#include <cmath>
#include <utility>

#include "machfront/errors.hpp"
#include "machfront/gas.hpp"

// Pointwise algebra of the acoustic metric for steady plane potential flow.
//
// Conventions: phi1 = d/dy of the potential, phi2 = d/dx, and y plays the
// role of time (index 0) while x is the spatial index 1.  With
//   E = c^2,  A = E - phi1^2,  B = E - phi2^2,  D = E - q^2,
// the potential equation reads g^{ab} d2_ab phi = 0 where the inverse metric
// is normalized to g^{00} = -1:
//   g^{01} = phi1 phi2 / A,     g^{11} = -B/A.
// Its determinant is E D / A^2, so the metric is Lorentzian exactly where
// the flow is supersonic (D < 0).  Everything else in this header is smooth
// algebra in (phi1, phi2): covariant entries, their derivatives with respect
// to the velocity components (the quasilinear structure coefficients), and
// the null/transversal frame used by the evolution code.

namespace machfront {

struct MetricEval {
    double phi1 = 0.0;
    double phi2 = 0.0;
    double E = 0.0;   // c^2 at this speed
    double A = 0.0;   // E - phi1^2
    double B = 0.0;   // E - phi2^2
    double D = 0.0;   // E - q^2
    double g01 = 0.0;  // inverse metric, g00 = -1 by normalization
    double g11 = 0.0;
    double det_inv = 0.0;   // determinant of the inverse metric, -E*D/A^2
    double c00 = 0.0;  // covariant entries
    double c01 = 0.0;
    double c11 = 0.0;
};

// Relative floor below which A = c^2 - phi1^2 counts as degenerate.  The
// normalization g^{00} = -1 divides by A, so the whole chart dies with it.
inline constexpr double kDegeneracyFloor = 1e-10;

inline MetricEval evaluate_metric(const GasModel& gas, double phi1, double phi2) {
    MetricEval m;
    m.phi1 = phi1;
    m.phi2 = phi2;
    const double q_sq = phi1 * phi1 + phi2 * phi2;
    m.E = gas.sound_speed_sq(q_sq);
    m.A = m.E - phi1 * phi1;
    m.B = m.E - phi2 * phi2;
    m.D = m.E - q_sq;
    if (std::abs(m.A) <= kDegeneracyFloor * m.E)
        throw DegeneracyError("metric chart degenerates: c^2 - phi1^2 ~ 0");
    m.g01 = phi1 * phi2 / m.A;
    m.g11 = -m.B / m.A;
    m.det_inv = m.E * m.D / (m.A * m.A);
    const double W = m.E * m.D;
    if (std::abs(W) <= kDegeneracyFloor * m.E * m.E)
        throw SonicError("covariant metric degenerates on the sonic line");
    m.c00 = -m.A * m.B / W;
    m.c01 = -m.A * phi1 * phi2 / W;
    m.c11 = -m.A * m.A / W;
    return m;
}

// Derivatives of the covariant entries and of the volume factor with respect
// to (phi1, phi2).  These are the coefficients through which the quasilinear
// wave operator feeds back into the transport equations.  Index layout:
// h[lam][k] with k enumerating (00), (01), (11).
struct StructureCoeffs {
    double h[2][3] = {{0, 0, 0}, {0, 0, 0}};
    double omega[2] = {0, 0};  // d/dphi_lam of log sqrt(-det g)
};

inline StructureCoeffs structure_coeffs(const GasModel& gas, const MetricEval& m) {
    const double gm1 = gas.gamma - 1.0;
    const double gp1 = gas.gamma + 1.0;
    const double E_l[2] = {-gm1 * m.phi1, -gm1 * m.phi2};
    const double A_l[2] = {-gp1 * m.phi1, -gm1 * m.phi2};
    const double B_l[2] = {-gm1 * m.phi1, -gp1 * m.phi2};
    const double D_l[2] = {-gp1 * m.phi1, -gp1 * m.phi2};
    const double W = m.E * m.D;
    const double W2 = W * W;
    const double pp = m.phi1 * m.phi2;
    StructureCoeffs s;
    for (int l = 0; l < 2; ++l) {
        const double W_l = E_l[l] * m.D + m.E * D_l[l];
        const double n00 = A_l[l] * m.B + m.A * B_l[l];
        const double n01 = A_l[l] * pp + m.A * (l == 0 ? m.phi2 : m.phi1);
        const double n11 = 2.0 * m.A * A_l[l];
        s.h[l][0] = -(n00 * W - m.A * m.B * W_l) / W2;
        s.h[l][1] = -(n01 * W - m.A * pp * W_l) / W2;
        s.h[l][2] = -(n11 * W - m.A * m.A * W_l) / W2;
        s.omega[l] = A_l[l] / m.A - 0.5 * E_l[l] / m.E - 0.5 * D_l[l] / m.D;
    }
    return s;
}

// Derivatives of the inverse-metric entries R = g^{01} and S = B/A = -g^{11}
// with respect to the velocity components.  These drive the advection-form
// source terms of the first-order system.
struct AdvectCoeffDerivs {
    double dR[2] = {0, 0};
    double dS[2] = {0, 0};
};

inline AdvectCoeffDerivs advect_coeff_derivs(const GasModel& gas, const MetricEval& m) {
    const double gm1 = gas.gamma - 1.0;
    const double gp1 = gas.gamma + 1.0;
    const double A_l[2] = {-gp1 * m.phi1, -gm1 * m.phi2};
    const double B_l[2] = {-gm1 * m.phi1, -gp1 * m.phi2};
    const double A2 = m.A * m.A;
    AdvectCoeffDerivs d;
    d.dR[0] = m.phi2 * (m.A - m.phi1 * A_l[0]) / A2;
    d.dR[1] = m.phi1 * (m.A - m.phi2 * A_l[1]) / A2;
    d.dS[0] = (B_l[0] * m.A - m.B * A_l[0]) / A2;
    d.dS[1] = (B_l[1] * m.A - m.B * A_l[1]) / A2;
    return d;
}

// The evolution frame at a point.  L = (1, L1) is the outgoing null vector
// normalized to unit time component; Xhat = (0, Xhat1) is the unit spacelike
// transversal with g(L, Xhat) = -1.  mu is the inverse density of the
// outgoing characteristic foliation: Xhat applied to the level function u
// gives 1/mu, so mu -> 0 signals characteristic focusing.
struct FrameEval {
    double mu = 0.0;
    double L1 = 0.0;
    double Xhat1 = 0.0;
};

// Frame contractions of the structure coefficients: the quadratic forms
// H^lam(L, L) and H^lam(Xhat, L) that appear in the transport equations for
// mu and L1.
struct FrameContractions {
    double G_LL[2] = {0, 0};
    double G_XL[2] = {0, 0};
};

inline FrameContractions contract_frame(const StructureCoeffs& s, const FrameEval& f) {
    FrameContractions g;
    for (int l = 0; l < 2; ++l) {
        g.G_LL[l] = s.h[l][0] + 2.0 * s.h[l][1] * f.L1 + s.h[l][2] * f.L1 * f.L1;
        g.G_XL[l] = f.Xhat1 * (s.h[l][1] + s.h[l][2] * f.L1);
    }
    return g;
}

// Coefficients of the transport law  L(mu) = omega1 + mu * omega2, split so
// that omega1 carries the transversal derivatives of the velocity (the
// focusing source) and omega2 the tangential ones.  duPhi are coordinate
// u-derivatives of (phi1, phi2) along the initial foliation, LPhi their
// derivatives along L.
inline std::pair<double, double> omega_scalars(const StructureCoeffs& s, const FrameEval& f,
                                               const double LPhi[2], const double duPhi[2]) {
    const FrameContractions g = contract_frame(s, f);
    double om1 = 0.0;
    double om2 = 0.0;
    for (int l = 0; l < 2; ++l) {
        om1 += 0.5 * g.G_LL[l] * duPhi[l];
        om2 -= (0.5 * g.G_LL[l] + g.G_XL[l]) * LPhi[l];
    }
    return {om1, om2};
}

// Frame on the initial line, where the level function is u = u0 - x so that
// d_x u = -1.  The outgoing branch of the eikonal equation
// -a^2 + 2 g01 a s + g11 s^2 = 0 fixes a = d_y u = -g01 + sqrt(g01^2 + g11),
// which coincides with the outgoing characteristic slope, and gives
// mu = 1/(a + g01) and Xhat1 = -1/mu, so mu * Xhat1 = -1 exactly here.
// The discriminant equals E (q^2 - E) / A^2, so it is positive precisely for
// supersonic states.
inline FrameEval initial_frame(const MetricEval& m) {
    const double disc = m.g01 * m.g01 + m.g11;
    if (disc <= 0.0)
        throw SonicError("initial-line eikonal has no real outgoing root: flow not supersonic");
    const double root = std::sqrt(disc);
    FrameEval f;
    f.mu = 1.0 / root;
    f.L1 = -m.g01 + root;
    f.Xhat1 = -root;
    return f;
}

// Conversion between the frame jet (P, Q) = (Lf, mu Lf + 2 d_u f) and the
// Cartesian gradient (d_y f, d_x f).  mu * Xhat1 is the Jacobian d x / d u
// at fixed y, so it must stay away from zero for the chart to be invertible.
inline std::pair<double, double> cartesian_from_frame(const FrameEval& f, double P, double Q) {
    const double jac = f.mu * f.Xhat1;
    if (std::abs(jac) <= kDegeneracyFloor)
        throw DegeneracyError("u-chart Jacobian mu*Xhat1 ~ 0");
    const double fu = 0.5 * (Q - f.mu * P);
    const double fx = fu / jac;
    const double fy = P - f.L1 * fx;
    return {fy, fx};
}

inline std::pair<double, double> frame_from_cartesian(const FrameEval& f, double fy, double fx) {
    const double P = fy + f.L1 * fx;
    const double Q = f.mu * P + 2.0 * f.mu * f.Xhat1 * fx;
    return {P, Q};
}

}  // namespace machfront
