#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "machfront/errors.hpp"
#include "charsolver.hpp"
#include "data.hpp"
#include "diagnostics.hpp"
#include "nullframe.hpp"

using namespace machfront;

namespace {

const GasModel gas;
const double K15 = 1.2456821978060995324;  // speed at M = 1.5
const double LP15 = 1.1180339887498948;    // plus slope of that state at zero angle

RunConfig wave_config(int n) {
    RunConfig c;
    c.data.mode = "simple_wave";
    c.data.phi1 = {1.5e-3, 0.05, 0.01578530430292566};
    c.data.N = n;
    c.validate();
    return c;
}

RunConfig sonic_config(int n) {
    RunConfig c;
    c.data.epsilon = 0.05;
    c.data.delta = 0.1;
    const double q_cr = c.gas_model().critical_speed();
    c.data.K = std::sqrt(q_cr * q_cr + 0.2);
    c.data.U_min = -8.0;
    c.data.U_0 = -5.9;
    c.data.U_c = -5.8;
    c.data.U = 6.0;
    c.data.N = n;
    c.data.Lphi2 = {-1.0 / c.data.K, -0.5, 5.2};
    c.solver.t_max = 4.0;
    c.validate();
    return c;
}

RunConfig constant_config(int n) {
    RunConfig c;
    c.data.N = n;
    c.data.phi1 = {0.0, 0.13, 0.1};
    c.data.phi2 = {0.0, 0.13, 0.1};
    c.data.Lphi1 = {0.0, 0.13, 0.1};
    c.data.Lphi2 = {0.0, 0.13, 0.1};
    c.solver.t_max = 0.3;
    c.validate();
    return c;
}

// the shock fixture run to collapse, shared across cases
struct Shock512 {
    RunConfig cfg;
    InitialState state;
    LifespanPrediction pred;
    RunReport rep;
};

const Shock512& shock512() {
    static const Shock512 f = [] {
        Shock512 r;
        r.cfg = wave_config(512);
        r.state = synthesize_data(r.cfg);
        r.pred = predict(r.state, gas);
        r.rep = run(r.state, r.cfg);
        return r;
    }();
    return f;
}

// both backends on the same smooth stretch of the shock fixture
struct DualWave {
    RunConfig cfg;
    InitialState state;
    RunReport rep;
    CharMesh mesh;
};

const DualWave& dual1024() {
    static const DualWave f = [] {
        DualWave r;
        r.cfg = wave_config(1024);
        r.cfg.solver.t_max = 0.1;
        r.cfg.solver.dump_interval = 0.05;
        r.state = synthesize_data(r.cfg);
        r.rep = run(r.state, r.cfg);
        CharControls ctl;
        ctl.y_max = 0.15;
        r.mesh = march(front_from_trace(frame_to_cartesian_data(r.state, gas), gas),
                       gas, ctl);
        return r;
    }();
    return f;
}

const RunReport& constant_run() {
    static const RunReport rep = run(synthesize_data(constant_config(256)),
                                     constant_config(256));
    return rep;
}

}  // namespace

TEST_CASE("negative part of a number") {
    CHECK(negative_part(-3.0) == 3.0);
    CHECK(negative_part(2.0) == 0.0);
    CHECK(negative_part(0.0) == 0.0);
}

TEST_CASE("deltas vanish on constant data") {
    const InitialState s = synthesize_data(constant_config(256));
    const Deltas d = compute_deltas(s, gas);
    CHECK(d.delta1 == 0.0);
    CHECK(d.delta2 == 0.0);
}

TEST_CASE("deltas of the shock fixture: compression strength, no decay drive") {
    {
        const Deltas d = compute_deltas(shock512().state, gas);
        CHECK(d.delta1 == doctest::Approx(0.5002545820).epsilon(1e-8));
        CHECK(d.delta2 == 0.0);
    }
    {
        const RunConfig c = wave_config(1024);
        const Deltas d = compute_deltas(synthesize_data(c), gas);
        CHECK(d.delta1 == doctest::Approx(0.4977276873).epsilon(1e-8));
        CHECK(d.delta2 == 0.0);
    }
}

TEST_CASE("deltas of the sonic fixture: decay drive, no compression") {
    const RunConfig c = sonic_config(512);
    const Deltas d = compute_deltas(synthesize_data(c), c.gas_model());
    CHECK(d.delta1 == 0.0);
    CHECK(d.delta2 == doctest::Approx(0.0499999133).epsilon(1e-7));
}

TEST_CASE("prediction picks the earlier branch and respects the a priori bound") {
    SUBCASE("compression-dominated data predicts a shock") {
        const LifespanPrediction& p = shock512().pred;
        CHECK(p.type == "shock");
        CHECK(p.inf_mu0 == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(p.T_star_pred == doctest::Approx(1.99898219).epsilon(1e-7));
        CHECK(p.bound == doctest::Approx(3.99796438).epsilon(1e-7));
        CHECK(p.T_star_pred <= p.bound);
        CHECK(std::isinf(p.T_sonic_pred));
    }
    SUBCASE("decay-dominated data predicts a sonic degeneration") {
        const RunConfig c = sonic_config(512);
        const LifespanPrediction p = predict(synthesize_data(c), c.gas_model());
        CHECK(p.type == "sonic");
        CHECK(p.margin0 == doctest::Approx(0.2).epsilon(1e-12));
        CHECK(p.T_sonic_pred == doctest::Approx(1.00000173).epsilon(1e-7));
        CHECK(p.bound == doctest::Approx(2.00000347).epsilon(1e-7));
        CHECK(std::isinf(p.T_shock_pred));
    }
    SUBCASE("constant data predicts nothing") {
        const LifespanPrediction p =
            predict(synthesize_data(constant_config(256)), gas);
        CHECK(p.type == "none");
        CHECK(std::isinf(p.T_star_pred));
        CHECK(std::isinf(p.bound));
    }
}

TEST_CASE("lifespan verification against the measured collapse") {
    const LifespanPrediction& p = shock512().pred;
    const RunReport& rep = shock512().rep;
    REQUIRE(rep.type == "shock");

    SUBCASE("the shock fixture lands inside the tolerance band") {
        const VerificationVerdict v = verify_lifespan(p, rep, 1e-3, 10.0, 50.0);
        CHECK(v.pass);
        CHECK(v.tol == doctest::Approx(0.01).epsilon(1e-12));
        CHECK(v.rel_err == doctest::Approx(0.002555).epsilon(1e-3));
        CHECK(v.predicted_type == "shock");
        CHECK(v.measured_type == "shock");
    }
    SUBCASE("a tampered prediction falls outside the band") {
        LifespanPrediction bad = p;
        bad.T_star_pred *= 0.5;
        const VerificationVerdict v = verify_lifespan(bad, rep, 1e-3, 10.0, 50.0);
        CHECK_FALSE(v.pass);
        CHECK(v.note == "measured time outside the tolerance band");
    }
    SUBCASE("a wrong predicted mechanism is a failure") {
        LifespanPrediction bad = p;
        bad.type = "sonic";
        const VerificationVerdict v = verify_lifespan(bad, rep, 1e-3, 10.0, 50.0);
        CHECK_FALSE(v.pass);
        CHECK(v.note == "detected type differs from the prediction");
    }
    SUBCASE("a detection despite a no-blowup prediction is a failure") {
        LifespanPrediction none = p;
        none.type = "none";
        const VerificationVerdict v = verify_lifespan(none, rep, 1e-3, 10.0, 50.0);
        CHECK_FALSE(v.pass);
        CHECK(v.note == "detection despite a no-blowup prediction");
    }
    SUBCASE("no prediction and no detection is a pass") {
        LifespanPrediction none = p;
        none.type = "none";
        const VerificationVerdict v =
            verify_lifespan(none, constant_run(), 1e-3, 10.0, 50.0);
        CHECK(v.pass);
        CHECK(v.measured_type == "tmax");
    }
    SUBCASE("a run that never detects fails a finite prediction") {
        const VerificationVerdict v =
            verify_lifespan(p, constant_run(), 1e-3, 10.0, 50.0);
        CHECK_FALSE(v.pass);
        CHECK(v.note == "no detection before the time horizon");
    }
}

TEST_CASE("interface energy of a data slice") {
    SUBCASE("constant data carries no energy") {
        const RunConfig c = constant_config(256);
        const FrameField f = field_from_state(synthesize_data(c));
        const EnergyRecord e = energy(f, c.data.U, c.data.K, gas);
        CHECK(e.E1 == 0.0);
        CHECK(e.E2 == 0.0);
        CHECK(e.flux1 == 0.0);
        CHECK(e.deform == 0.0);
        CHECK(e.ratio == 0.0);
    }
    SUBCASE("bump data against the frozen quadrature") {
        RunConfig c;
        c.data.epsilon = 0.01;
        c.data.N = 1024;
        c.data.phi1 = {1.0, 0.13, 0.1};
        c.data.phi2 = {0.7, 0.13, 0.1};
        c.data.Lphi1 = {0.8, 0.13, 0.1};
        c.data.Lphi2 = {0.6, 0.13, 0.1};
        c.validate();
        const FrameField f = field_from_state(synthesize_data(c));
        const EnergyRecord e = energy(f, c.data.U, c.data.K, gas);
        CHECK(e.E1 == doctest::Approx(5.979254258469e-03).epsilon(1e-10));
        CHECK(e.E2 == doctest::Approx(2.930535413649e-03).epsilon(1e-10));
        CHECK(e.flux1 == 0.0);
        CHECK(e.deform < 1e-6);
        // a cut left of the bump support sees nothing
        const EnergyRecord far = energy(f, c.data.U_0, c.data.K, gas);
        CHECK(far.E1 == 0.0);
        CHECK(far.E2 == 0.0);
    }
    SUBCASE("degenerate stretching factor inside the cut is rejected") {
        const RunConfig c = constant_config(256);
        FrameField f = field_from_state(synthesize_data(c));
        f.mu[3] = -0.1;
        CHECK_THROWS_AS(energy(f, c.data.U, c.data.K, gas), DegeneracyError);
    }
    SUBCASE("a cut below the grid is rejected") {
        const RunConfig c = constant_config(256);
        const FrameField f = field_from_state(synthesize_data(c));
        CHECK_THROWS_AS(energy(f, c.data.U_min - 1.0, c.data.K, gas),
                        std::invalid_argument);
    }
}

TEST_CASE("slicing a constant-state characteristic mesh") {
    const int n = 21;
    const double h = 0.04;
    std::vector<double> x(n), p1(n, 0.0), p2(n, K15);
    for (int i = 0; i < n; ++i) x[i] = h * i;
    CharControls ctl;
    ctl.y_max = 0.15;
    const CharMesh mesh = march(front_from_profile(x, p1, p2, gas), gas, ctl);

    SUBCASE("the base front is returned exactly") {
        const auto s = slice_mesh(mesh, 0.0);
        REQUIRE(s.size() == static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) {
            CHECK(s[j].x == x[j]);
            CHECK(s[j].u == 1.0 - x[j]);
            CHECK(s[j].phi2 == K15);
        }
    }
    SUBCASE("an interior height lands on the straight chains") {
        const double yq = 0.1;
        const auto s = slice_mesh(mesh, yq);
        REQUIRE(s.size() >= 8);
        for (const SliceSample& q : s) {
            CHECK(q.x == doctest::Approx((1.0 - q.u) + LP15 * yq).epsilon(1e-12));
            CHECK(q.phi1 == doctest::Approx(0.0).scale(1.0).epsilon(1e-13));
            CHECK(q.phi2 == doctest::Approx(K15).epsilon(1e-13));
        }
        for (std::size_t j = 1; j < s.size(); ++j) {
            CHECK(s[j].x > s[j - 1].x);
            CHECK(s[j].u < s[j - 1].u);
        }
    }
    SUBCASE("a height past the mesh top yields nothing") {
        CHECK(slice_mesh(mesh, 1.0).empty());
    }
}

TEST_CASE("the two backends agree on the stretching factor") {
    const DualWave& d = dual1024();

    SUBCASE("straight comparison passes with margin") {
        const OracleVerdict v = mu_oracle_check(d.mesh, d.rep, gas, 0.1, 0.01);
        CHECK(v.pass);
        CHECK(v.max_rel_diff == doctest::Approx(2.2556e-3).epsilon(1e-3));
        CHECK(v.points >= 600);
        CHECK(v.t == doctest::Approx(0.1).epsilon(1e-12));
    }
    SUBCASE("a flipped compression sign is caught") {
        RunConfig cf = d.cfg;
        cf.solver.omega1_sign = -1.0;
        const RunReport repf = run(d.state, cf);
        const OracleVerdict v = mu_oracle_check(d.mesh, repf, gas, 0.1, 0.01);
        CHECK_FALSE(v.pass);
        CHECK(v.max_rel_diff > 0.05);
    }
    SUBCASE("a mesh that stops short of the requested height is rejected") {
        CharControls ctl;
        ctl.y_max = 0.04;
        const CharMesh low =
            march(front_from_trace(frame_to_cartesian_data(d.state, gas), gas),
                  gas, ctl);
        CHECK_THROWS_AS(mu_oracle_check(low, d.rep, gas, 0.1, 0.01),
                        std::runtime_error);
    }
    SUBCASE("the initial instant leaves no room for a centered difference") {
        CHECK_THROWS_AS(mu_oracle_check(d.mesh, d.rep, gas, 0.0, 0.01),
                        std::runtime_error);
    }
}

TEST_CASE("cross-backend field comparison") {
    SUBCASE("smooth shock fixture stays within discretization error") {
        const DualWave& d = dual1024();
        const ComparisonReport r = compare_backends(d.mesh, d.rep, gas, 0.1);
        CHECK(r.points >= 600);
        CHECK(r.linf1 < 1e-4);
        CHECK(r.linf2 < 1e-4);
        CHECK(r.rms1 <= r.linf1);
        CHECK(r.rms2 <= r.linf2);
    }
    SUBCASE("constant state matches exactly") {
        const RunConfig c = constant_config(256);
        const InitialState s = synthesize_data(c);
        CharControls ctl;
        ctl.y_max = 0.2;
        const CharMesh mesh =
            march(front_from_trace(frame_to_cartesian_data(s, gas), gas), gas, ctl);
        const ComparisonReport r = compare_backends(mesh, constant_run(), gas, 0.15);
        CHECK(r.points >= 8);
        CHECK(r.linf1 <= 1e-14);
        CHECK(r.linf2 <= 1e-14);
    }
    SUBCASE("a height past a characteristic termination is rejected") {
        CharMesh cut = dual1024().mesh;
        cut.term.type = "shock";
        cut.term.y = 0.05;
        CHECK_THROWS_AS(compare_backends(cut, dual1024().rep, gas, 0.1),
                        std::runtime_error);
    }
    SUBCASE("a time past a frame detection is rejected") {
        const RunConfig c = constant_config(256);
        const InitialState s = synthesize_data(c);
        CharControls ctl;
        ctl.y_max = 0.2;
        const CharMesh mesh =
            march(front_from_trace(frame_to_cartesian_data(s, gas), gas), gas, ctl);
        CHECK_THROWS_AS(compare_backends(mesh, shock512().rep, gas, 2.5),
                        std::runtime_error);
    }
}

TEST_CASE("runtime monitor rows and thresholds") {
    SUBCASE("constant run is identically quiet") {
        const RunConfig c = constant_config(256);
        const BootstrapReport b = bootstrap_monitor(constant_run(), c);
        REQUIRE(!b.rows.empty());
        CHECK(b.rows.size() == constant_run().snapshots.size());
        CHECK_FALSE(b.any_violation);
        for (const BootstrapRow& r : b.rows) {
            CHECK(r.sup_phi1 == 0.0);
            CHECK(r.sup_LPhi == 0.0);
            CHECK(r.sup_Q == 0.0);
            CHECK(r.far_phi == 0.0);
            CHECK(r.nonlin == 0.0);
        }
        CHECK(b.thr_phi1 == doctest::Approx(10.0 * c.data.epsilon).epsilon(1e-12));
        CHECK(b.thr_Q == doctest::Approx(10.0 * c.data.delta).epsilon(1e-12));
        CHECK(b.thr_phi2 == doctest::Approx(10.0 * c.data.K).epsilon(1e-12));
        CHECK(b.thr_nonlin ==
              doctest::Approx(10.0 * c.data.K * c.data.delta * c.data.epsilon)
                  .epsilon(1e-12));
    }
    SUBCASE("resolved shock fixture stays under every threshold") {
        RunConfig c = wave_config(2048);
        c.solver.t_max = 0.2;
        c.solver.dump_interval = 0.05;
        const RunReport rep = run(synthesize_data(c), c);
        const BootstrapReport b = bootstrap_monitor(rep, c);
        CHECK_FALSE(b.any_violation);
        CHECK(b.rows.size() >= 4);
    }
    SUBCASE("large data driven deep into collapse trips the coupling row") {
        RunConfig c;
        c.data.epsilon = 0.3;
        c.data.delta = 1.0;
        c.data.U = 3.0;
        c.data.N = 512;
        c.data.phi1 = {1.0, 1.51, 1.45};
        c.data.phi2 = {0.3, 1.51, 1.45};
        c.data.Lphi1 = {1.0, 1.51, 1.45};
        c.data.Lphi2 = {1.0, 1.51, 1.45};
        c.solver.t_max = 2.5;
        c.solver.mu_stop = 0.001;
        c.solver.dump_interval = 0.02;
        c.validate();
        const RunReport rep = run(synthesize_data(c), c);
        REQUIRE(rep.type == "shock");
        const BootstrapReport b = bootstrap_monitor(rep, c);
        CHECK(b.any_violation);
        CHECK(b.first_violation == "nonlin");
        CHECK(b.first_violation_t == doctest::Approx(1.3498).epsilon(1e-2));
    }
}

TEST_CASE("energy history and disk round trips") {
    const Shock512& f = shock512();
    const auto series = energy_series(f.rep, f.cfg.data.U_0, f.cfg.data.K, gas);
    REQUIRE(series.size() >= 4);
    for (std::size_t i = 0; i < series.size(); ++i) {
        // the wave radiates away from the inflow side, so the far half
        // of the interface never charges up
        CHECK(series[i].E1 + series[i].E2 <= 1e-8);
        if (i) CHECK(series[i].t > series[i - 1].t);
    }

    write_energy_csv(series, "diag_energy_tmp.csv");
    std::ifstream in("diag_energy_tmp.csv");
    REQUIRE(in.good());
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "t,E1,E2,flux1,flux2,deform,ratio");
    std::size_t rows = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == series.size());

    const BootstrapReport b = bootstrap_monitor(f.rep, f.cfg);
    write_bootstrap_csv(b, "diag_boot_tmp.csv");
    std::ifstream bin("diag_boot_tmp.csv");
    REQUIRE(bin.good());
    REQUIRE(std::getline(bin, line));
    CHECK(line ==
          "t,sup_phi1,sup_LPhi,sup_Q,sup_phi2,far_phi,far_LPhi,far_Q,nonlin");
    std::remove("diag_energy_tmp.csv");
    std::remove("diag_boot_tmp.csv");
}
