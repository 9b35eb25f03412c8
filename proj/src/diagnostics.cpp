#include "diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "machfront/errors.hpp"
#include "machfront/metric.hpp"
#include "machfront/stencil.hpp"

namespace machfront {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// piecewise-linear interpolation over strictly ascending abscissae;
// NaN outside the covered range
double interp(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    if (xs.size() < 2 || !(x >= xs.front()) || !(x <= xs.back()))
        return std::numeric_limits<double>::quiet_NaN();
    std::size_t hi = std::upper_bound(xs.begin(), xs.end(), x) - xs.begin();
    if (hi == 0) hi = 1;
    if (hi == xs.size()) hi = xs.size() - 1;
    const std::size_t lo = hi - 1;
    const double w = (x - xs[lo]) / (xs[hi] - xs[lo]);
    return ys[lo] + w * (ys[hi] - ys[lo]);
}

const FrameField& nearest_snapshot(const RunReport& rep, double t) {
    if (rep.snapshots.empty())
        throw std::runtime_error("nearest_snapshot: the run stored no snapshots");
    const FrameField* best = &rep.snapshots.front();
    for (const FrameField& s : rep.snapshots)
        if (std::abs(s.t - t) < std::abs(best->t - t)) best = &s;
    return *best;
}

}  // namespace

double negative_part(double p) { return p < 0.0 ? -p : 0.0; }

Deltas compute_deltas(const InitialState& s, const GasModel& gas) {
    // omega1 needs the metric contraction of the tangential gradient, so it
    // is evaluated through the same right-hand side the evolution uses; the
    // transversal product phi2 * L phi2 reads the stored data jet directly.
    const FrameField f = field_from_state(s);
    const RhsEval e = rhs(f, gas, Scheme::centered4, 1.0);
    Deltas d;
    for (std::size_t i = 0; i < s.size(); ++i) {
        d.delta1 = std::max(d.delta1, negative_part(e.om1[i]));
        d.delta2 = std::max(d.delta2, negative_part(s.phi2[i] * s.Lphi2[i]));
    }
    return d;
}

LifespanPrediction predict(const InitialState& s, const GasModel& gas) {
    LifespanPrediction p;
    const Deltas d = compute_deltas(s, gas);
    p.delta1 = d.delta1;
    p.delta2 = d.delta2;

    const double q_cr = gas.critical_speed();
    p.inf_mu0 = kInf;
    p.margin0 = kInf;
    for (std::size_t i = 0; i < s.size(); ++i) {
        p.inf_mu0 = std::min(p.inf_mu0, s.mu[i]);
        const double q_sq = s.phi1[i] * s.phi1[i] + s.phi2[i] * s.phi2[i];
        p.margin0 = std::min(p.margin0, q_sq - q_cr * q_cr);
    }

    p.T_shock_pred = p.delta1 > 0.0 ? p.inf_mu0 / p.delta1 : kInf;
    p.T_sonic_pred = p.delta2 > 0.0 ? p.margin0 / (4.0 * p.delta2) : kInf;
    p.T_star_pred = std::min(p.T_shock_pred, p.T_sonic_pred);
    p.bound = std::min(p.delta1 > 0.0 ? 2.0 / p.delta1 : kInf,
                       p.delta2 > 0.0 ? p.margin0 / (2.0 * p.delta2) : kInf);

    if (p.delta1 == 0.0 && p.delta2 == 0.0)
        p.type = "none";
    else
        p.type = p.T_shock_pred <= p.T_sonic_pred ? "shock" : "sonic";

    if (!(p.T_star_pred <= p.bound * (1.0 + 1e-12)))
        throw std::logic_error("predict: displayed lifespan exceeds the a priori bound");
    return p;
}

VerificationVerdict verify_lifespan(const LifespanPrediction& p, const RunReport& rep,
                                    double epsilon, double C1, double C2,
                                    double grid_err) {
    VerificationVerdict v;
    v.predicted_type = p.type;
    v.measured_type = rep.type;
    v.T_pred = p.T_star_pred;
    v.T_meas = rep.T_measured;

    if (p.type == "none") {
        v.pass = rep.type == "tmax";
        v.note = v.pass ? "no finite lifespan predicted and none detected"
                        : "detection despite a no-blowup prediction";
        return v;
    }

    v.tol = p.type == "sonic" ? std::max(C2 * epsilon * epsilon, grid_err)
                              : std::max(C1 * epsilon, grid_err);
    if (rep.type != p.type) {
        v.note = rep.type == "tmax" ? "no detection before the time horizon"
                                    : "detected type differs from the prediction";
        return v;
    }
    v.rel_err = std::abs(v.T_meas / v.T_pred - 1.0);
    v.pass = v.rel_err <= v.tol;
    if (!v.pass) v.note = "measured time outside the tolerance band";
    return v;
}

EnergyRecord energy(const FrameField& f, double U0, double K, const GasModel& gas) {
    const std::size_t n = f.size();
    const std::size_t m = std::upper_bound(f.u.begin(), f.u.end(), U0) - f.u.begin();
    if (m < 2)
        throw std::invalid_argument("energy: the cut u = U0 leaves fewer than 2 grid points");
    for (std::size_t i = 0; i < m; ++i)
        if (!(f.mu[i] > 0.0))
            throw DegeneracyError("energy: mu is not positive inside the region at u = " +
                                  g17(f.u[i]));

    const RhsEval e = rhs(f, gas, Scheme::centered4, 1.0);
    std::vector<double> d1(n), d2(n), dmu(n);
    derivative(f.phi1.data(), d1.data(), n, f.du, Scheme::centered4);
    derivative(f.phi2.data(), d2.data(), n, f.du, Scheme::centered4);
    derivative(f.mu.data(), dmu.data(), n, f.du, Scheme::centered4);

    EnergyRecord r;
    r.t = f.t;
    double mass = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double w = (i == 0 || i == m - 1) ? 0.5 * f.du : f.du;
        const double mu = f.mu[i];
        const double coef = 0.5 * (1.0 + 2.0 * mu) * mu;
        const double x1 = d1[i] / mu;
        const double x2 = d2[i] / mu;
        r.E1 += w * (coef * e.P1[i] * e.P1[i] + 2.0 * x1 * x1);
        r.E2 += w * (coef * e.P2[i] * e.P2[i] + 2.0 * x2 * x2);
        const double Lmu = e.om1[i] + mu * e.om2[i];
        r.deform += w * (e.P1[i] * e.P1[i] + e.P2[i] * e.P2[i]) * (dmu[i] - 0.5 * Lmu);
        const double ps2 = f.phi2[i] - K;
        mass += w * (f.phi1[i] * f.phi1[i] + ps2 * ps2);
    }
    const double mu_c = f.mu[m - 1];
    r.flux1 = (1.0 + mu_c) * e.P1[m - 1] * e.P1[m - 1];
    r.flux2 = (1.0 + mu_c) * e.P2[m - 1] * e.P2[m - 1];
    const double den = r.E1 + r.E2;
    r.ratio = (mass == 0.0 && den == 0.0) ? 0.0 : mass / den;
    return r;
}

std::vector<EnergyRecord> energy_series(const RunReport& rep, double U0, double K,
                                        const GasModel& gas) {
    std::vector<EnergyRecord> out;
    out.reserve(rep.snapshots.size());
    for (const FrameField& f : rep.snapshots) out.push_back(energy(f, U0, K, gas));
    return out;
}

void write_energy_csv(const std::vector<EnergyRecord>& recs, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_energy_csv: cannot open " + path);
    out << "t,E1,E2,flux1,flux2,deform,ratio\n";
    for (const EnergyRecord& r : recs)
        out << g17(r.t) << ',' << g17(r.E1) << ',' << g17(r.E2) << ',' << g17(r.flux1)
            << ',' << g17(r.flux2) << ',' << g17(r.deform) << ',' << g17(r.ratio) << '\n';
}

namespace {

// gaps, when requested, collects the y-extent of the chain segment each
// sample was interpolated on; its median is the local level spacing of the
// mesh at this height
std::vector<SliceSample> slice_impl(const CharMesh& mesh, double y,
                                    std::vector<double>* gaps) {
    std::vector<SliceSample> out;
    const auto& F = mesh.fronts;
    if (F.empty()) return out;
    const std::size_t n0 = F[0].size();
    for (std::size_t j = 0; j < n0; ++j) {
        std::size_t kmax = std::min(F.size() - 1, n0 - 1 - j);
        while (kmax > 0 && j >= F[kmax].size()) --kmax;
        if (!(F[0][j].y <= y) || !(y <= F[kmax][j].y)) continue;
        std::size_t lo = 0, hi = kmax;
        while (lo < hi) {
            const std::size_t mid = (lo + hi + 1) / 2;
            if (F[mid][j].y <= y) lo = mid; else hi = mid - 1;
        }
        const CharNode& a = F[lo][j];
        SliceSample s;
        s.u = a.u;
        if (lo == kmax) {
            s.x = a.x;
            s.phi1 = a.phi1;
            s.phi2 = a.phi2;
        } else {
            const CharNode& b = F[lo + 1][j];
            const double w = (y - a.y) / (b.y - a.y);
            s.x = a.x + w * (b.x - a.x);
            s.phi1 = a.phi1 + w * (b.phi1 - a.phi1);
            s.phi2 = a.phi2 + w * (b.phi2 - a.phi2);
            if (gaps) gaps->push_back(b.y - a.y);
        }
        out.push_back(s);
    }
    return out;
}

}  // namespace

std::vector<SliceSample> slice_mesh(const CharMesh& mesh, double y) {
    return slice_impl(mesh, y, nullptr);
}

OracleVerdict mu_oracle_check(const CharMesh& mesh, const RunReport& rep,
                              const GasModel& gas, double t_target, double band) {
    const FrameField& snap = nearest_snapshot(rep, t_target);
    const double ts = snap.t;
    std::vector<double> gaps;
    const auto level = slice_impl(mesh, ts, &gaps);

    // a compression pulse a few chains wide slides past a fixed x at unit
    // speed, so the time difference must stay on the scale of the mesh's own
    // level spacing or the centered stencil averages the pulse away
    double dy_med = 0.005;
    if (!gaps.empty()) {
        std::nth_element(gaps.begin(), gaps.begin() + gaps.size() / 2,
                         gaps.end());
        dy_med = gaps[gaps.size() / 2];
    }
    const double dt_cap = std::min(0.005, 0.5 * ts);
    if (!(dt_cap > 0.0))
        throw std::runtime_error(
            "mu_oracle_check: slice time too early for a centered difference");
    const double dt =
        std::clamp(2.0 * dy_med, std::min(1e-6, dt_cap), dt_cap);

    const auto below = slice_mesh(mesh, ts - dt);
    const auto above = slice_mesh(mesh, ts + dt);

    auto unpack = [](const std::vector<SliceSample>& v, std::vector<double>& xs,
                     std::vector<double>& us) {
        xs.clear();
        us.clear();
        for (const SliceSample& s : v) {
            xs.push_back(s.x);
            us.push_back(s.u);
        }
    };
    std::vector<double> xb, ub, xa, ua;
    unpack(below, xb, ub);
    unpack(above, xa, ua);

    const std::vector<double> fx(snap.x.rbegin(), snap.x.rend());
    const std::vector<double> fmu(snap.mu.rbegin(), snap.mu.rend());

    OracleVerdict v;
    v.band = band;
    v.t = ts;
    for (std::size_t j = 1; j + 1 < level.size(); ++j) {
        const double xq = level[j].x;
        const double dxu = (level[j + 1].u - level[j - 1].u) /
                           (level[j + 1].x - level[j - 1].x);
        const double u_b = interp(xb, ub, xq);
        const double u_a = interp(xa, ua, xq);
        if (!std::isfinite(u_b) || !std::isfinite(u_a)) continue;
        const double dyu = (u_a - u_b) / (2.0 * dt);
        const MetricEval mt = evaluate_metric(gas, level[j].phi1, level[j].phi2);
        const double den = dyu - mt.g01 * dxu;
        if (den == 0.0) continue;
        const double mu_oracle = 1.0 / den;
        const double mu_frame = interp(fx, fmu, xq);
        if (!std::isfinite(mu_frame) || mu_frame < 0.1) continue;
        v.max_rel_diff = std::max(v.max_rel_diff,
                                  std::abs(mu_oracle - mu_frame) / mu_frame);
        ++v.points;
    }
    if (v.points < 8)
        throw std::runtime_error(
            "mu_oracle_check: insufficient overlap between the two backends");
    v.pass = v.max_rel_diff <= band;
    return v;
}

ComparisonReport compare_backends(const CharMesh& mesh, const RunReport& rep,
                                  const GasModel& gas, double t_target) {
    if (mesh.term.type != "ymax" && t_target > mesh.term.y)
        throw std::runtime_error(
            "compare_backends: requested height is past the characteristic termination");
    if (rep.type != "tmax" && t_target > rep.t_stop)
        throw std::runtime_error(
            "compare_backends: requested time is past the frame run termination");

    const FrameField& snap = nearest_snapshot(rep, t_target);
    const auto level = slice_mesh(mesh, snap.t);

    const std::vector<double> fx(snap.x.rbegin(), snap.x.rend());
    const std::vector<double> f1(snap.phi1.rbegin(), snap.phi1.rend());
    const std::vector<double> f2(snap.phi2.rbegin(), snap.phi2.rend());

    ComparisonReport r;
    r.t = snap.t;
    const double q_cr = gas.critical_speed();
    double ss1 = 0.0, ss2 = 0.0;
    for (const SliceSample& s : level) {
        if (std::hypot(s.phi1, s.phi2) <= q_cr) continue;
        const double p1 = interp(fx, f1, s.x);
        const double p2 = interp(fx, f2, s.x);
        if (!std::isfinite(p1) || !std::isfinite(p2)) continue;
        const double e1 = std::abs(s.phi1 - p1);
        const double e2 = std::abs(s.phi2 - p2);
        r.linf1 = std::max(r.linf1, e1);
        r.linf2 = std::max(r.linf2, e2);
        ss1 += e1 * e1;
        ss2 += e2 * e2;
        ++r.points;
    }
    if (r.points < 8)
        throw std::runtime_error(
            "compare_backends: insufficient overlap between the two backends");
    r.rms1 = std::sqrt(ss1 / static_cast<double>(r.points));
    r.rms2 = std::sqrt(ss2 / static_cast<double>(r.points));
    return r;
}

BootstrapReport bootstrap_monitor(const RunReport& rep, const RunConfig& cfg) {
    BootstrapReport out;
    const GasModel gas = cfg.gas_model();
    const Scheme sch = scheme_from_string(cfg.solver.scheme);
    const double eps = cfg.data.epsilon;
    const double del = cfg.data.delta;
    const double K = cfg.data.K;
    const double Uc = cfg.data.U_c;
    const double C = cfg.verify.boot_C;
    out.thr_phi1 = C * eps;
    out.thr_LPhi = C * eps;
    out.thr_Q = C * del;
    out.thr_phi2 = C * K;
    out.thr_far = C * eps;
    out.thr_nonlin = C * K * del * eps;

    for (const FrameField& f : rep.snapshots) {
        const RhsEval e = rhs(f, gas, sch, cfg.solver.omega1_sign);
        BootstrapRow row;
        row.t = f.t;
        double sP1 = 0.0, sP2 = 0.0, sQ1 = 0.0, sQ2 = 0.0;
        double fphi1 = 0.0, fphi2 = 0.0, fP1 = 0.0, fP2 = 0.0, fQ1 = 0.0, fQ2 = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) {
            row.sup_phi1 = std::max(row.sup_phi1, std::abs(f.phi1[i]));
            row.sup_phi2 = std::max(row.sup_phi2, std::abs(f.phi2[i]));
            sP1 = std::max(sP1, std::abs(e.P1[i]));
            sP2 = std::max(sP2, std::abs(e.P2[i]));
            sQ1 = std::max(sQ1, std::abs(f.Q1[i]));
            sQ2 = std::max(sQ2, std::abs(f.Q2[i]));
            const double nl = std::abs(e.Nh1[i]) + std::abs(e.Nh2[i]) +
                              (std::abs(e.om1[i]) + f.mu[i] * std::abs(e.om2[i])) *
                                  std::max(std::abs(e.P1[i]), std::abs(e.P2[i]));
            row.nonlin = std::max(row.nonlin, nl);
            if (f.u[i] <= Uc) {
                fphi1 = std::max(fphi1, std::abs(f.phi1[i]));
                fphi2 = std::max(fphi2, std::abs(f.phi2[i] - K));
                fP1 = std::max(fP1, std::abs(e.P1[i]));
                fP2 = std::max(fP2, std::abs(e.P2[i]));
                fQ1 = std::max(fQ1, std::abs(f.Q1[i]));
                fQ2 = std::max(fQ2, std::abs(f.Q2[i]));
            }
        }
        row.sup_LPhi = sP1 + sP2;
        row.sup_Q = sQ1 + sQ2;
        row.far_phi = fphi1 + fphi2;
        row.far_LPhi = fP1 + fP2;
        row.far_Q = fQ1 + fQ2;

        const std::pair<const char*, std::pair<double, double>> checks[] = {
            {"sup_phi1", {row.sup_phi1, out.thr_phi1}},
            {"sup_LPhi", {row.sup_LPhi, out.thr_LPhi}},
            {"sup_Q", {row.sup_Q, out.thr_Q}},
            {"sup_phi2", {row.sup_phi2, out.thr_phi2}},
            {"far_phi", {row.far_phi, out.thr_far}},
            {"far_LPhi", {row.far_LPhi, out.thr_far}},
            {"far_Q", {row.far_Q, out.thr_far}},
            {"nonlin", {row.nonlin, out.thr_nonlin}},
        };
        for (const auto& c : checks) {
            if (c.second.first > c.second.second && !out.any_violation) {
                out.any_violation = true;
                out.first_violation_t = row.t;
                out.first_violation = c.first;
            }
        }
        out.rows.push_back(row);
    }
    return out;
}

void write_bootstrap_csv(const BootstrapReport& rep, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_bootstrap_csv: cannot open " + path);
    out << "t,sup_phi1,sup_LPhi,sup_Q,sup_phi2,far_phi,far_LPhi,far_Q,nonlin\n";
    for (const BootstrapRow& r : rep.rows)
        out << g17(r.t) << ',' << g17(r.sup_phi1) << ',' << g17(r.sup_LPhi) << ','
            << g17(r.sup_Q) << ',' << g17(r.sup_phi2) << ',' << g17(r.far_phi) << ','
            << g17(r.far_LPhi) << ',' << g17(r.far_Q) << ',' << g17(r.nonlin) << '\n';
}

}  // namespace machfront
