#pragma once

// Airfoil and initial-line geometry, synthesis of the compactly supported
// supersonic initial data in frame variables, validation of the size bounds
// the lifespan estimates assume, and translation of the frame data to a
// Cartesian trace for the characteristic backend.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "machfront/gas.hpp"
#include "config.hpp"

namespace machfront {

struct SynthesisError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// C-infinity bump with exact support [-1, 1], peak value 1 at s = 0.
inline double bump(double s) {
    if (!(std::abs(s) < 1.0)) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - s * s));
}

inline double bump_deriv(double s) {
    if (!(std::abs(s) < 1.0)) return 0.0;
    const double t = 1.0 - s * s;
    return bump(s) * (-2.0 * s / (t * t));
}

// Parabolic arc profile y = h (1 - x^2) on [-1, 1].
struct Airfoil {
    double h = 0.1;
    double height(double x) const { return h * (1.0 - x * x); }
    double slope(double x) const { return -2.0 * h * x; }
    double curvature(double /*x*/) const { return -2.0 * h; }
};

Airfoil build_airfoil(double h);

// Sampled boundary: the airfoil graph on [-1, 1] glued to the flat wall
// y = 0 on 1 <= |x| <= x_max, with unit outward normal (pointing out of the
// fluid, which occupies the region above the boundary), arc coordinate
// sigma normalized so that sigma = x on the right flat part, and the
// characteristic label u = 1 - sigma.
struct SurfaceSigma {
    std::vector<double> x, y, nx, ny, arc, u;
    std::size_t size() const { return x.size(); }
};

SurfaceSigma build_surface(const Airfoil& a, int n_airfoil, double x_max);

// Exact arc length of the parabolic profile between x = 0 and x = b.
double parabola_arc_length(double h, double b);

// Initial data on the line y = 0, indexed by the characteristic label u
// (uniform grid on [U_min, U], x = 1 - u).  Lb* are the transversal
// derivatives mu L-bar phi = mu L phi + 2 d_u phi.
struct InitialState {
    std::vector<double> u, phi1, phi2, Lphi1, Lphi2, Lbphi1, Lbphi2, mu, L1, x;
    double du = 0.0;
    double inf_mu = 0.0;
    std::size_t size() const { return u.size(); }
};

struct BoundCheck {
    std::string name;
    double measured = 0.0;
    double bound = 0.0;
    bool pass = false;
};

struct ValidationReport {
    std::vector<BoundCheck> checks;
    bool all_pass() const;
    const BoundCheck* find(const std::string& name) const;
};

// Builds the data prescribed by cfg.data.  mode "bumps" seeds phi1, phi2 - K
// and the L-derivatives with scaled bumps and derives the transversal
// derivatives from the chart identity d_u phi = (Lb phi - mu L phi) / 2.
// mode "simple_wave" builds an exact right-moving simple wave from a Mach
// number dip M(u) = M_inf - amp * bump((u - center)/width) using the phi1
// bump shape, so L phi vanishes identically on the line.
InitialState synthesize_data(const RunConfig& cfg);

ValidationReport validate_data(const InitialState& s, const RunConfig& cfg);

// Scales the perturbation parts (phi1, phi2 - K, L phi) by factor, keeps the
// background K, recomputes the frame quantities and the transversal
// derivatives consistently.
InitialState rescale_data(const InitialState& s, const RunConfig& cfg, double factor);

// Cartesian trace of the initial line for the characteristic backend:
// velocity components and their full first-order jet, reconstructed from the
// frame jet.  curl_resid records sup |d_y phi2 - d_x phi1|, which vanishes
// exactly when the data come from a single potential.
struct CartesianTrace {
    std::vector<double> x, phi1, phi2, dxphi1, dxphi2, dyphi1, dyphi2;
    double curl_resid = 0.0;
    std::size_t size() const { return x.size(); }
};

CartesianTrace frame_to_cartesian_data(const InitialState& s, const GasModel& gas);

void write_state_csv(const InitialState& s, const std::string& path);
InitialState read_state_csv(const std::string& path);

}  // namespace machfront
