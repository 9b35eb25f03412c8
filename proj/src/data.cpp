#include "data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "machfront/errors.hpp"
#include "machfront/metric.hpp"
#include "machfront/riemann.hpp"

namespace machfront {

Airfoil build_airfoil(double h) {
    if (!(h > 0.0))
        throw std::invalid_argument("build_airfoil: height must be positive");
    Airfoil a;
    a.h = h;
    return a;
}

double parabola_arc_length(double h, double b) {
    if (h == 0.0) return b;
    const double t = 2.0 * h * b;
    return 0.5 * b * std::sqrt(1.0 + t * t) + std::asinh(t) / (4.0 * h);
}

SurfaceSigma build_surface(const Airfoil& a, int n_airfoil, double x_max) {
    if (n_airfoil < 2)
        throw std::invalid_argument("build_surface: need at least 2 airfoil samples");
    if (!(x_max > 1.0))
        throw std::invalid_argument("build_surface: x_max must exceed 1");

    SurfaceSigma s;
    const double half_arc = parabola_arc_length(a.h, 1.0);
    // sigma = x on the right flat wall; going left across the airfoil it
    // advances by arc length, so the left flat wall carries a constant
    // offset 2 - 2 * half_arc relative to x.
    const double left_offset = 2.0 - 2.0 * half_arc;

    const double dx_flat = (x_max - 1.0) / std::max(1, n_airfoil / 2);
    const int n_flat = static_cast<int>(std::lround((x_max - 1.0) / dx_flat));

    auto push = [&s](double x, double y, double nx, double ny, double sigma) {
        s.x.push_back(x);
        s.y.push_back(y);
        s.nx.push_back(nx);
        s.ny.push_back(ny);
        s.arc.push_back(sigma);
        s.u.push_back(1.0 - sigma);
    };

    for (int i = 0; i < n_flat; ++i) {
        const double x = -x_max + i * dx_flat;
        push(x, 0.0, 0.0, -1.0, x + left_offset);
    }
    for (int i = 0; i < n_airfoil; ++i) {
        const double x = -1.0 + 2.0 * i / (n_airfoil - 1);
        const double fp = a.slope(x);
        const double nrm = std::sqrt(1.0 + fp * fp);
        const double sigma = 1.0 - half_arc + parabola_arc_length(a.h, x);
        push(x, a.height(x), fp / nrm, -1.0 / nrm, sigma);
    }
    for (int i = 1; i <= n_flat; ++i) {
        const double x = 1.0 + i * dx_flat;
        push(x, 0.0, 0.0, -1.0, x);
    }
    return s;
}

namespace {

struct Jet {
    double phi1, phi2, du_phi1, du_phi2, P1, P2;
};

Jet bumps_jet(const RunConfig& cfg, double u) {
    const double eps = cfg.data.epsilon;
    const auto& b1 = cfg.data.phi1;
    const auto& b2 = cfg.data.phi2;
    const auto& l1 = cfg.data.Lphi1;
    const auto& l2 = cfg.data.Lphi2;
    Jet j;
    j.phi1 = eps * b1.amp * bump((u - b1.center) / b1.width);
    j.phi2 = cfg.data.K - eps * b2.amp * bump((u - b2.center) / b2.width);
    j.du_phi1 = eps * b1.amp * bump_deriv((u - b1.center) / b1.width) / b1.width;
    j.du_phi2 = -eps * b2.amp * bump_deriv((u - b2.center) / b2.width) / b2.width;
    j.P1 = eps * l1.amp * bump((u - l1.center) / l1.width);
    j.P2 = eps * l2.amp * bump((u - l2.center) / l2.width);
    return j;
}

Jet simple_wave_jet(const RunConfig& cfg, const GasModel& gas, double u) {
    const auto& sh = cfg.data.phi1;
    const double M_inf = gas.mach(0.0, cfg.data.K);
    const double nu_inf = prandtl_meyer(gas, M_inf);
    const double s = (u - sh.center) / sh.width;

    const double M = M_inf - sh.amp * bump(s);
    const double dM = -sh.amp * bump_deriv(s) / sh.width;
    const double q = gas.speed_from_mach(M);
    const double th = nu_inf - prandtl_meyer(gas, M);

    const double c2 = gas.sound_speed_sq(q * q);
    const double dq_dM = c2 * std::sqrt(c2) / (gas.c0 * gas.c0);
    const double dnu_dM =
        std::sqrt(M * M - 1.0) / (M * (1.0 + 0.5 * (gas.gamma - 1.0) * M * M));

    const double sn = std::sin(th);
    const double cs = std::cos(th);
    Jet j;
    j.phi1 = q * sn;
    j.phi2 = q * cs;
    j.du_phi1 = (sn * dq_dM - q * cs * dnu_dM) * dM;
    j.du_phi2 = (cs * dq_dM + q * sn * dnu_dM) * dM;
    j.P1 = 0.0;
    j.P2 = 0.0;
    return j;
}

}  // namespace

InitialState synthesize_data(const RunConfig& cfg) {
    const GasModel gas = cfg.gas_model();
    const double q_cr = gas.critical_speed();
    const int n = cfg.data.N;
    const bool simple = cfg.data.mode == "simple_wave";

    InitialState st;
    st.du = (cfg.data.U - cfg.data.U_min) / (n - 1);
    st.u.resize(n);
    st.phi1.resize(n);
    st.phi2.resize(n);
    st.Lphi1.resize(n);
    st.Lphi2.resize(n);
    st.Lbphi1.resize(n);
    st.Lbphi2.resize(n);
    st.mu.resize(n);
    st.L1.resize(n);
    st.x.resize(n);

    st.inf_mu = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        const double u = cfg.data.U_min + i * st.du;
        const Jet j = simple ? simple_wave_jet(cfg, gas, u) : bumps_jet(cfg, u);

        const double q = std::hypot(j.phi1, j.phi2);
        if (!(q > q_cr))
            throw SonicError("synthesize_data: q <= q_cr at u = " + g17(u));

        const MetricEval m = evaluate_metric(gas, j.phi1, j.phi2);
        const FrameEval f = initial_frame(m);

        st.u[i] = u;
        st.phi1[i] = j.phi1;
        st.phi2[i] = j.phi2;
        st.Lphi1[i] = j.P1;
        st.Lphi2[i] = j.P2;
        st.Lbphi1[i] = f.mu * j.P1 + 2.0 * j.du_phi1;
        st.Lbphi2[i] = f.mu * j.P2 + 2.0 * j.du_phi2;
        st.mu[i] = f.mu;
        st.L1[i] = f.L1;
        // mu * Xhat1 = -1 on the initial line, so d x / d u = -1 exactly and
        // the integral of the Jacobian from the anchor x(U) = 1 - U is 1 - u.
        st.x[i] = 1.0 - u;
        st.inf_mu = std::min(st.inf_mu, f.mu);
    }

    const ValidationReport rep = validate_data(st, cfg);
    for (const auto& c : rep.checks)
        if (!c.pass)
            throw SynthesisError("synthesize_data: bound " + c.name +
                                 " violated: measured " + g17(c.measured) +
                                 ", bound " + g17(c.bound));
    return st;
}

bool ValidationReport::all_pass() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const BoundCheck& c) { return c.pass; });
}

const BoundCheck* ValidationReport::find(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

namespace {

double sup_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

// Trapezoid L2 norm of f over the tail u <= U_c.
double tail_l2(const InitialState& s, const std::vector<double>& f, double shift,
               double U_c) {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        if (s.u[i + 1] > U_c) break;
        const double a = f[i] - shift;
        const double b = f[i + 1] - shift;
        acc += 0.5 * (a * a + b * b) * s.du;
    }
    return std::sqrt(acc);
}

}  // namespace

ValidationReport validate_data(const InitialState& s, const RunConfig& cfg) {
    const GasModel gas = cfg.gas_model();
    const double eps = cfg.data.epsilon;
    const double del = cfg.data.delta;
    const double K = cfg.data.K;
    const double U_c = cfg.data.U_c;

    ValidationReport rep;
    auto le = [&rep](const std::string& name, double measured, double bound) {
        rep.checks.push_back({name, measured, bound, measured <= bound});
    };

    le("data1.phi1_sup", sup_abs(s.phi1), eps);
    le("data1.Lphi1_sup", sup_abs(s.Lphi1), eps);
    le("data1.Lbarphi1_sup", sup_abs(s.Lbphi1), del);
    le("data12.Lphi2_sup", sup_abs(s.Lphi2), eps);
    le("data12.Lbarphi2_sup", sup_abs(s.Lbphi2), del);

    double sup2 = 0.0, inf2 = std::numeric_limits<double>::infinity();
    for (double v : s.phi2) {
        sup2 = std::max(sup2, std::abs(v));
        inf2 = std::min(inf2, std::abs(v));
    }
    le("data3.phi2_sup_eq_K", std::abs(sup2 - K), 1e-12 * std::max(1.0, K));
    rep.checks.push_back({"data3.phi2_inf", inf2, K - eps, inf2 >= K - eps});

    le("data4.phi1_L2_tail", tail_l2(s, s.phi1, 0.0, U_c), eps);
    le("data4.phi2_L2_tail", tail_l2(s, s.phi2, K, U_c), eps);
    le("data5.Lphi1_L2_tail", tail_l2(s, s.Lphi1, 0.0, U_c), eps);
    le("data5.Lphi2_L2_tail", tail_l2(s, s.Lphi2, 0.0, U_c), eps);

    const double q_cr = gas.critical_speed();
    double margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < s.size(); ++i)
        margin = std::min(margin, std::hypot(s.phi1[i], s.phi2[i]) - q_cr);
    rep.checks.push_back({"supersonic.min_margin", margin, 0.0, margin > 0.0});

    double tail = 0.0;
    for (std::size_t i = 0; i < s.size() && s.u[i] <= U_c; ++i) {
        tail = std::max(tail, std::abs(s.phi1[i]));
        tail = std::max(tail, std::abs(s.phi2[i] - K));
        tail = std::max(tail, std::abs(s.Lphi1[i]));
        tail = std::max(tail, std::abs(s.Lphi2[i]));
        tail = std::max(tail, std::abs(s.Lbphi1[i]));
        tail = std::max(tail, std::abs(s.Lbphi2[i]));
    }
    rep.checks.push_back({"tail.exact_zero", tail, 0.0, tail == 0.0});

    return rep;
}

InitialState rescale_data(const InitialState& s, const RunConfig& cfg, double factor) {
    if (!(factor > 0.0))
        throw std::invalid_argument("rescale_data: factor must be positive");
    const GasModel gas = cfg.gas_model();
    const double q_cr = gas.critical_speed();
    const double K = cfg.data.K;

    InitialState r = s;
    r.inf_mu = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < s.size(); ++i) {
        r.phi1[i] = factor * s.phi1[i];
        r.phi2[i] = K + factor * (s.phi2[i] - K);
        r.Lphi1[i] = factor * s.Lphi1[i];
        r.Lphi2[i] = factor * s.Lphi2[i];

        const double q = std::hypot(r.phi1[i], r.phi2[i]);
        if (!(q > q_cr))
            throw SonicError("rescale_data: q <= q_cr at u = " + g17(s.u[i]));

        const MetricEval m = evaluate_metric(gas, r.phi1[i], r.phi2[i]);
        const FrameEval f = initial_frame(m);
        const double du_phi1 = factor * 0.5 * (s.Lbphi1[i] - s.mu[i] * s.Lphi1[i]);
        const double du_phi2 = factor * 0.5 * (s.Lbphi2[i] - s.mu[i] * s.Lphi2[i]);
        r.mu[i] = f.mu;
        r.L1[i] = f.L1;
        r.Lbphi1[i] = f.mu * r.Lphi1[i] + 2.0 * du_phi1;
        r.Lbphi2[i] = f.mu * r.Lphi2[i] + 2.0 * du_phi2;
        r.inf_mu = std::min(r.inf_mu, f.mu);
    }
    return r;
}

CartesianTrace frame_to_cartesian_data(const InitialState& s, const GasModel& gas) {
    CartesianTrace tr;
    const std::size_t n = s.size();
    tr.x = s.x;
    tr.phi1 = s.phi1;
    tr.phi2 = s.phi2;
    tr.dxphi1.resize(n);
    tr.dxphi2.resize(n);
    tr.dyphi1.resize(n);
    tr.dyphi2.resize(n);

    for (std::size_t i = 0; i < n; ++i) {
        const MetricEval m = evaluate_metric(gas, s.phi1[i], s.phi2[i]);
        const double disc = m.g01 * m.g01 + m.g11;
        if (disc <= 0.0)
            throw SonicError("frame_to_cartesian_data: flow not supersonic");
        FrameEval f;
        f.mu = s.mu[i];
        f.L1 = s.L1[i];
        f.Xhat1 = -std::sqrt(disc);

        auto [y1, x1] = cartesian_from_frame(f, s.Lphi1[i], s.Lbphi1[i]);
        auto [y2, x2] = cartesian_from_frame(f, s.Lphi2[i], s.Lbphi2[i]);
        tr.dyphi1[i] = y1;
        tr.dxphi1[i] = x1;
        tr.dyphi2[i] = y2;
        tr.dxphi2[i] = x2;
        tr.curl_resid = std::max(tr.curl_resid, std::abs(y2 - x1));
    }
    return tr;
}

void write_state_csv(const InitialState& s, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("write_state_csv: cannot open " + path);
    out << "u,phi1,phi2,Lphi1,Lphi2,Lbarphi1,Lbarphi2,mu,L1,x\n";
    for (std::size_t i = 0; i < s.size(); ++i) {
        out << g17(s.u[i]) << ',' << g17(s.phi1[i]) << ',' << g17(s.phi2[i]) << ','
            << g17(s.Lphi1[i]) << ',' << g17(s.Lphi2[i]) << ',' << g17(s.Lbphi1[i])
            << ',' << g17(s.Lbphi2[i]) << ',' << g17(s.mu[i]) << ',' << g17(s.L1[i])
            << ',' << g17(s.x[i]) << '\n';
    }
}

InitialState read_state_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("read_state_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("read_state_csv: empty file " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "u,phi1,phi2,Lphi1,Lphi2,Lbarphi1,Lbarphi2,mu,L1,x")
        throw std::runtime_error("read_state_csv: unexpected header in " + path);

    InitialState s;
    s.inf_mu = std::numeric_limits<double>::infinity();
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tok;
        double v[10];
        for (int k = 0; k < 10; ++k) {
            if (!std::getline(ls, tok, ','))
                throw std::runtime_error("read_state_csv: short row in " + path);
            v[k] = std::stod(tok);
        }
        s.u.push_back(v[0]);
        s.phi1.push_back(v[1]);
        s.phi2.push_back(v[2]);
        s.Lphi1.push_back(v[3]);
        s.Lphi2.push_back(v[4]);
        s.Lbphi1.push_back(v[5]);
        s.Lbphi2.push_back(v[6]);
        s.mu.push_back(v[7]);
        s.L1.push_back(v[8]);
        s.x.push_back(v[9]);
        s.inf_mu = std::min(s.inf_mu, v[7]);
    }
    if (s.size() < 2)
        throw std::runtime_error("read_state_csv: need at least 2 rows in " + path);
    s.du = s.u[1] - s.u[0];
    return s;
}

}  // namespace machfront
