#pragma once
#include <string>
#include <vector>

#include "machfront/gas.hpp"

// Experiment configuration: one flat text file per run, "key = value" lines
// with '#' comments.  Keys are dotted paths; unknown keys are rejected so a
// typo cannot silently fall back to a default.  serialize() emits every key
// in a fixed order with 17 significant digits, and parse(serialize(c)) is
// the identity.

namespace machfront {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct BumpShape {
    double amp = 0.0;
    double center = 0.0;
    double width = 1.0;
};

struct RunConfig {
    struct {
        double gamma = 1.4;
        double c0 = 1.0;
        double rho0 = 1.0;
    } gas;

    struct {
        double h = 0.1;
    } airfoil;

    struct {
        double epsilon = 1e-3;
        double delta = 0.5;
        double K = 1.1952286093343936;  // speed of a Mach sqrt(2) stream
        double U_c = 0.02;
        double U_0 = -0.05;
        double U = 0.25;
        double U_min = -0.35;
        long N = 2048;
        // "bumps" seeds the four fields independently; "simple_wave" slaves
        // phi1 to phi2 through the outgoing Riemann invariant and zeroes the
        // tangential derivatives, so the data is an exact traveling wave.
        std::string mode = "bumps";
        BumpShape phi1, phi2, Lphi1, Lphi2;
    } data;

    struct {
        double cfl = 0.8;
        double mu_stop = 0.01;
        double mu_floor = 1e-4;
        double tol_sonic = 1e-6;
        double t_max = 2.5;
        double dump_interval = 0.1;
        std::string scheme = "upwind3";  // or "centered4"
        double omega1_sign = 1.0;        // -1 is the deliberate-mutation control
    } solver;

    struct {
        double y_max = 5.0;
        double dx = 0.01;
        double h_min_factor = 1e-4;
        double blowup_factor = 1e4;
        double x_lo = 0.0;  // x_lo == x_hi means: derive from the data u-range
        double x_hi = 0.0;
    } charsolver;

    struct {
        double C1 = 10.0;
        double C2 = 50.0;
        double oracle_band = 0.01;
        double boot_C = 10.0;
    } verify;

    struct {
        bool bootstrap = true;
        bool energy = true;
    } diag;

    struct {
        std::string dir = "out";
    } output;

    long seed = 2026;

    GasModel gas_model() const {
        GasModel g;
        g.gamma = gas.gamma;
        g.c0 = gas.c0;
        g.rho0 = gas.rho0;
        return g;
    }

    // empty vector = valid; otherwise one message per violated constraint,
    // each naming the key
    std::vector<std::string> validate() const;
};

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config(const std::string& path);
std::string serialize(const RunConfig& cfg);
void write_config(const RunConfig& cfg, const std::string& path);

// 17-significant-digit formatting used for every number we emit
std::string g17(double v);

}  // namespace machfront
