#pragma once

// Post-processing layer over the two backends: blowup-time prediction from
// the initial line, pass/fail verdicts for a measured run, far-field energy
// monitors, pointwise size monitors, an independent reconstruction of the
// foliation density from the characteristic mesh, and direct cross-backend
// comparison of the velocity field.

#include <cstddef>
#include <string>
#include <vector>

#include "machfront/gas.hpp"
#include "charsolver.hpp"
#include "config.hpp"
#include "data.hpp"
#include "nullframe.hpp"

namespace machfront {

// |p| for negative p, zero otherwise.
double negative_part(double p);

// Blowup strengths of the initial line: delta1 drives the collapse of mu
// (shock focusing), delta2 drives the drift of q^2 toward the critical
// value (sonic degeneration).
struct Deltas {
    double delta1 = 0.0;  // sup of [omega1]_-
    double delta2 = 0.0;  // sup of [phi2 * L phi2]_-
};

Deltas compute_deltas(const InitialState& s, const GasModel& gas);

struct LifespanPrediction {
    double delta1 = 0.0;
    double delta2 = 0.0;
    double inf_mu0 = 0.0;       // inf of mu over the initial line
    double margin0 = 0.0;       // inf of q^2 minus the critical speed squared
    double T_shock_pred = 0.0;  // inf_mu0 / delta1, infinite when delta1 = 0
    double T_sonic_pred = 0.0;  // margin0 / (4 delta2), infinite when delta2 = 0
    double T_star_pred = 0.0;   // min of the two
    double bound = 0.0;         // min(2 / delta1, margin0 / (2 delta2))
    std::string type;           // "shock" | "sonic" | "none"
};

// Leading-order lifespan laws evaluated on the data: the linear decay
// inf mu(t) = inf mu(0) - delta1 t names the focusing time, the drift
// inf q^2(t) = inf q^2(0) - 4 delta2 t names the sonic time, and the
// smaller of the two sets the type.  Throws std::logic_error if the
// predicted time exceeds the a priori bound, which would mean the two
// displayed laws are mutually inconsistent.
LifespanPrediction predict(const InitialState& s, const GasModel& gas);

struct VerificationVerdict {
    bool pass = false;
    std::string predicted_type;
    std::string measured_type;
    double T_pred = 0.0;
    double T_meas = 0.0;
    double rel_err = 0.0;  // |T_meas / T_pred - 1|
    double tol = 0.0;
    std::string note;
};

// Confronts a measured run with the prediction.  The tolerance band is
// max(C1 * epsilon, grid_err) for shock runs and max(C2 * epsilon^2,
// grid_err) for sonic runs, with grid_err the observed shift of T_measured
// under one grid doubling.  A type mismatch fails regardless of the times.
VerificationVerdict verify_lifespan(const LifespanPrediction& p, const RunReport& rep,
                                    double epsilon, double C1, double C2,
                                    double grid_err = 0.0);

struct EnergyRecord {
    double t = 0.0;
    double E1 = 0.0;      // far-field energy of phi1
    double E2 = 0.0;      // far-field energy of phi2 - K
    double flux1 = 0.0;   // outflow density (1 + mu) (L phi1)^2 at the cut
    double flux2 = 0.0;
    double deform = 0.0;  // integral of sum (L psi)^2 (d_u mu - L mu / 2)
    double ratio = 0.0;   // zeroth-order mass over E1 + E2, 0 when both vanish
};

// Far-field energies over the region u <= U0,
//   E_i = integral of (1 + 2 mu) mu (L psi_i)^2 / 2 + 2 (d_u psi_i / mu)^2,
// with psi_1 = phi1 and psi_2 = phi2 - K.  Also records the outflow density
// at the cut and the multiplier deformation integral that controls the
// growth of E_i.  Throws DegeneracyError if mu is not positive somewhere on
// the region.
EnergyRecord energy(const FrameField& f, double U0, double K, const GasModel& gas);

std::vector<EnergyRecord> energy_series(const RunReport& rep, double U0, double K,
                                        const GasModel& gas);

void write_energy_csv(const std::vector<EnergyRecord>& recs, const std::string& path);

// One node of the characteristic mesh cut at a fixed height: each chain is
// interpolated between the two fronts bracketing y, so the label u is
// carried exactly and the state varies linearly along the segment.
struct SliceSample {
    double x = 0.0;
    double u = 0.0;
    double phi1 = 0.0;
    double phi2 = 0.0;
};

// Samples of all chains alive at height y, ascending in x.  Chains whose
// life does not bracket y are skipped.
std::vector<SliceSample> slice_mesh(const CharMesh& mesh, double y);

struct OracleVerdict {
    bool pass = false;
    double max_rel_diff = 0.0;
    double band = 0.0;
    double t = 0.0;  // slice height actually used
    std::size_t points = 0;
};

// Independent cross-check of the foliation density.  The label u is
// constant along each plus-chain of the mesh, so finite differences of the
// sliced u(x, y) give its gradient, and mu = 1 / (d_y u - g01 d_x u).
// The reconstruction is compared with the evolved mu of the frame run at
// the snapshot nearest t_target, on the overlap where the frame mu is at
// least 0.1.  Throws std::runtime_error when fewer than 8 comparison
// points survive.
OracleVerdict mu_oracle_check(const CharMesh& mesh, const RunReport& rep,
                              const GasModel& gas, double t_target, double band);

struct ComparisonReport {
    double t = 0.0;
    double linf1 = 0.0;
    double linf2 = 0.0;
    double rms1 = 0.0;
    double rms2 = 0.0;
    std::size_t points = 0;
};

// Velocity components of the frame run interpolated at the node positions
// of the sliced mesh.  Throws std::runtime_error if t_target lies past
// either backend's detection, or when the overlap is too small.
ComparisonReport compare_backends(const CharMesh& mesh, const RunReport& rep,
                                  const GasModel& gas, double t_target);

// Pointwise size monitors evaluated on every stored snapshot.  The global
// rows cover the whole grid; the far_* rows restrict to the quiescent side
// u <= U_c.  Sums pair the two components, matching how the thresholds are
// stated.
struct BootstrapRow {
    double t = 0.0;
    double sup_phi1 = 0.0;  // vs C eps
    double sup_LPhi = 0.0;  // sup|L phi1| + sup|L phi2|, vs C eps
    double sup_Q = 0.0;     // sup|Q1| + sup|Q2|, vs C delta
    double sup_phi2 = 0.0;  // vs C K
    double far_phi = 0.0;   // sup|phi1| + sup|phi2 - K|, vs C eps
    double far_LPhi = 0.0;  // vs C eps
    double far_Q = 0.0;     // vs C eps
    double nonlin = 0.0;    // |N1| + |N2| + (|om1| + mu |om2|) |L phi|, vs C K delta eps
};

struct BootstrapReport {
    std::vector<BootstrapRow> rows;
    double thr_phi1 = 0.0;
    double thr_LPhi = 0.0;
    double thr_Q = 0.0;
    double thr_phi2 = 0.0;
    double thr_far = 0.0;
    double thr_nonlin = 0.0;
    bool any_violation = false;
    double first_violation_t = 0.0;
    std::string first_violation;  // row field name of the first bound crossed
};

BootstrapReport bootstrap_monitor(const RunReport& rep, const RunConfig& cfg);

void write_bootstrap_csv(const BootstrapReport& rep, const std::string& path);

}  // namespace machfront
