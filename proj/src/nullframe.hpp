#pragma once

// Backend B: method-of-lines evolution of the frame system on a fixed u-grid
// marched in t.  State per point is (phi1, phi2, Q1, Q2, mu, L1, x) with
// Q = transversal derivative of phi; the tangential derivative P = L phi is
// recovered algebraically.  Termination realizes the lifespan supremum:
// focusing (mu -> 0), sonic degeneracy (q -> q_cr), or the time horizon.

#include <string>
#include <utility>
#include <vector>

#include "machfront/gas.hpp"
#include "machfront/stencil.hpp"
#include "config.hpp"
#include "data.hpp"

namespace machfront {

struct FrameField {
    double t = 0.0;
    double du = 0.0;
    std::vector<double> u, phi1, phi2, Q1, Q2, mu, L1, x;
    std::size_t size() const { return u.size(); }
};

FrameField field_from_state(const InitialState& s);

Scheme scheme_from_string(const std::string& name);

// P_k = L phi_k = (Q_k - 2 d_u phi_k) / mu.  Throws once mu drops below
// mu_floor: the march should have stopped before the division degenerates.
std::pair<std::vector<double>, std::vector<double>>
recover_LPhi(const FrameField& f, Scheme scheme, double mu_floor);

// One evaluation of the semi-discrete right-hand side, with the pointwise
// quantities the monitors and the redundant-equation residual reuse.
struct RhsEval {
    std::vector<double> d_phi1, d_phi2, d_Q1, d_Q2, d_mu, d_L1, d_x;
    std::vector<double> P1, P2, om1, om2, Nh1, Nh2;
};

RhsEval rhs(const FrameField& f, const GasModel& gas, Scheme scheme,
            double omega1_sign);

// Classic explicit fourth-order one-step method.  The transversal
// characteristic speed in the (t, u) chart is 2/mu, so dt must satisfy
// dt <= du * mu_min / 2; larger requests are rejected.
FrameField step(const FrameField& f, double dt, const GasModel& gas, Scheme scheme,
                double omega1_sign);

struct MonitorRow {
    double t = 0.0;
    double inf_mu = 0.0;
    double inf_q = 0.0;
    double sup_LPhi = 0.0;       // sup |P|
    double sup_Lbq = 0.0;        // sup |Q|
    double sup_LbarPhi = 0.0;    // sup |Q / mu|
    double residual = 0.0;       // redundant transversal equation, sup norm
};

struct RunReport {
    std::string type;            // "shock", "sonic" or "tmax"
    double t_stop = 0.0;
    double T_measured = 0.0;
    double u_at_min = 0.0;
    bool cfl_starved = false;
    bool sonic_degenerate = false;  // mu collapsed at a point already at the
                                    // sonic threshold, classified as sonic
    long steps = 0;
    double inf_mu0 = 0.0;
    std::vector<double> om1_initial;
    std::vector<MonitorRow> monitors;
    std::vector<double> hist_t, hist_mu, hist_q2;
    std::vector<FrameField> snapshots;  // full field at each monitor time
    FrameField final_field;
};

// Marches the field until a termination condition fires.  For shock
// terminations T_measured extrapolates the last decade of the inf mu series
// to zero; for sonic terminations it is the crossing time itself.  If outdir
// is nonempty, writes monitor.csv and per-interval snapshot files there.
RunReport run(const InitialState& init, const RunConfig& cfg,
              const std::string& outdir = "");

}  // namespace machfront
