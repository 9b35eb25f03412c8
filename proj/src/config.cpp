#include "config.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace machfront {

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

struct Field {
    const char* key;
    char kind;  // 'd' double, 'l' long, 'b' bool, 's' string
    void* p;
};

std::vector<Field> field_table(RunConfig& c) {
    return {
        {"gas.gamma", 'd', &c.gas.gamma},
        {"gas.c0", 'd', &c.gas.c0},
        {"gas.rho0", 'd', &c.gas.rho0},
        {"airfoil.h", 'd', &c.airfoil.h},
        {"data.epsilon", 'd', &c.data.epsilon},
        {"data.delta", 'd', &c.data.delta},
        {"data.K", 'd', &c.data.K},
        {"data.U_c", 'd', &c.data.U_c},
        {"data.U_0", 'd', &c.data.U_0},
        {"data.U", 'd', &c.data.U},
        {"data.U_min", 'd', &c.data.U_min},
        {"data.N", 'l', &c.data.N},
        {"data.mode", 's', &c.data.mode},
        {"data.phi1.amp", 'd', &c.data.phi1.amp},
        {"data.phi1.center", 'd', &c.data.phi1.center},
        {"data.phi1.width", 'd', &c.data.phi1.width},
        {"data.phi2.amp", 'd', &c.data.phi2.amp},
        {"data.phi2.center", 'd', &c.data.phi2.center},
        {"data.phi2.width", 'd', &c.data.phi2.width},
        {"data.Lphi1.amp", 'd', &c.data.Lphi1.amp},
        {"data.Lphi1.center", 'd', &c.data.Lphi1.center},
        {"data.Lphi1.width", 'd', &c.data.Lphi1.width},
        {"data.Lphi2.amp", 'd', &c.data.Lphi2.amp},
        {"data.Lphi2.center", 'd', &c.data.Lphi2.center},
        {"data.Lphi2.width", 'd', &c.data.Lphi2.width},
        {"solver.cfl", 'd', &c.solver.cfl},
        {"solver.mu_stop", 'd', &c.solver.mu_stop},
        {"solver.mu_floor", 'd', &c.solver.mu_floor},
        {"solver.tol_sonic", 'd', &c.solver.tol_sonic},
        {"solver.t_max", 'd', &c.solver.t_max},
        {"solver.dump_interval", 'd', &c.solver.dump_interval},
        {"solver.scheme", 's', &c.solver.scheme},
        {"solver.omega1_sign", 'd', &c.solver.omega1_sign},
        {"char.y_max", 'd', &c.charsolver.y_max},
        {"char.dx", 'd', &c.charsolver.dx},
        {"char.h_min_factor", 'd', &c.charsolver.h_min_factor},
        {"char.blowup_factor", 'd', &c.charsolver.blowup_factor},
        {"char.x_lo", 'd', &c.charsolver.x_lo},
        {"char.x_hi", 'd', &c.charsolver.x_hi},
        {"verify.C1", 'd', &c.verify.C1},
        {"verify.C2", 'd', &c.verify.C2},
        {"verify.oracle_band", 'd', &c.verify.oracle_band},
        {"verify.boot_C", 'd', &c.verify.boot_C},
        {"diag.bootstrap", 'b', &c.diag.bootstrap},
        {"diag.energy", 'b', &c.diag.energy},
        {"output.dir", 's', &c.output.dir},
        {"seed", 'l', &c.seed},
    };
}

std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    auto fields = field_table(cfg);
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        const Field* hit = nullptr;
        for (const auto& f : fields)
            if (key == f.key) {
                hit = &f;
                break;
            }
        if (!hit)
            throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        try {
            switch (hit->kind) {
                case 'd': *static_cast<double*>(hit->p) = std::stod(val); break;
                case 'l': *static_cast<long*>(hit->p) = std::stol(val); break;
                case 'b': {
                    if (val == "true")
                        *static_cast<bool*>(hit->p) = true;
                    else if (val == "false")
                        *static_cast<bool*>(hit->p) = false;
                    else
                        throw std::invalid_argument("expected true/false");
                    break;
                }
                case 's': *static_cast<std::string*>(hit->p) = val; break;
            }
        } catch (const std::exception&) {
            throw ConfigError("line " + std::to_string(lineno) + ": bad value for '" + key +
                              "': '" + val + "'");
        }
    }
    const auto errs = cfg.validate();
    if (!errs.empty()) {
        std::string msg = "config validation failed:";
        for (const auto& e : errs) msg += "\n  " + e;
        throw ConfigError(msg);
    }
    return cfg;
}

RunConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

std::string serialize(const RunConfig& cfg) {
    auto& mut = const_cast<RunConfig&>(cfg);
    std::string out;
    for (const auto& f : field_table(mut)) {
        out += f.key;
        out += " = ";
        switch (f.kind) {
            case 'd': out += g17(*static_cast<double*>(f.p)); break;
            case 'l': out += std::to_string(*static_cast<long*>(f.p)); break;
            case 'b': out += *static_cast<bool*>(f.p) ? "true" : "false"; break;
            case 's': out += *static_cast<std::string*>(f.p); break;
        }
        out += '\n';
    }
    return out;
}

void write_config(const RunConfig& cfg, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write config file: " + path);
    out << serialize(cfg);
}

std::vector<std::string> RunConfig::validate() const {
    std::vector<std::string> errs;
    auto pos = [&](double v, const char* key) {
        if (!(v > 0.0)) errs.push_back(std::string(key) + " must be > 0");
    };
    pos(gas.gamma - 1.0, "gas.gamma - 1");
    pos(gas.c0, "gas.c0");
    pos(gas.rho0, "gas.rho0");
    pos(airfoil.h, "airfoil.h");
    pos(data.epsilon, "data.epsilon");
    pos(data.delta, "data.delta");
    pos(solver.cfl, "solver.cfl");
    pos(solver.mu_stop, "solver.mu_stop");
    pos(solver.mu_floor, "solver.mu_floor");
    pos(solver.tol_sonic, "solver.tol_sonic");
    pos(solver.t_max, "solver.t_max");
    pos(charsolver.y_max, "char.y_max");
    pos(charsolver.dx, "char.dx");
    pos(charsolver.h_min_factor, "char.h_min_factor");
    pos(charsolver.blowup_factor, "char.blowup_factor");
    pos(verify.C1, "verify.C1");
    pos(verify.C2, "verify.C2");
    pos(verify.oracle_band, "verify.oracle_band");
    pos(verify.boot_C, "verify.boot_C");
    if (solver.dump_interval < 0.0) errs.push_back("solver.dump_interval must be >= 0");
    if (!(solver.mu_floor < solver.mu_stop))
        errs.push_back("solver.mu_floor must be < solver.mu_stop");
    if (!(data.U_min < data.U_0 && data.U_0 < data.U_c && data.U_c < data.U))
        errs.push_back("need data.U_min < data.U_0 < data.U_c < data.U");
    if (data.N < 16) errs.push_back("data.N must be >= 16");
    if (data.mode != "bumps" && data.mode != "simple_wave")
        errs.push_back("data.mode must be 'bumps' or 'simple_wave'");
    if (solver.scheme != "upwind3" && solver.scheme != "centered4")
        errs.push_back("solver.scheme must be 'upwind3' or 'centered4'");
    if (solver.omega1_sign != 1.0 && solver.omega1_sign != -1.0)
        errs.push_back("solver.omega1_sign must be 1 or -1");
    GasModel g;
    g.gamma = gas.gamma;
    g.c0 = gas.c0;
    g.rho0 = gas.rho0;
    if (gas.gamma > 1.0 && gas.c0 > 0.0) {
        if (!(data.K > g.critical_speed()))
            errs.push_back("data.K must exceed the critical speed (supersonic stream)");
    }
    for (const auto& [b, key] : {std::pair<const BumpShape&, const char*>{data.phi1, "data.phi1"},
                                 {data.phi2, "data.phi2"},
                                 {data.Lphi1, "data.Lphi1"},
                                 {data.Lphi2, "data.Lphi2"}}) {
        if (!(b.width > 0.0)) errs.push_back(std::string(key) + ".width must be > 0");
    }
    return errs;
}

}  // namespace machfront
