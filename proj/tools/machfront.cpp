// Command-line driver for the flow laboratory: reads one experiment config,
// runs the requested stage, writes plot-ready CSV artifacts plus a JSON
// summary on stdout.  Every number is emitted with 17 significant digits so
// repeated runs are byte-identical.
//
// Exit codes: 0 success or PASS verdict, 1 FAIL verdict or runtime failure,
// 2 usage and configuration errors.

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "machfront/errors.hpp"
#include "charsolver.hpp"
#include "config.hpp"
#include "data.hpp"
#include "diagnostics.hpp"
#include "nullframe.hpp"

using namespace machfront;
namespace fs = std::filesystem;

namespace {

// ---- byte-stable JSON emission (insertion order, g17 numbers) ----

std::string jesc(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default: out += c;
        }
    }
    return out;
}

class JsonObj {
  public:
    JsonObj& num(const std::string& k, double v) {
        return raw(k, std::isfinite(v) ? g17(v) : std::string("null"));
    }
    JsonObj& num(const std::string& k, long v) {
        return raw(k, std::to_string(v));
    }
    JsonObj& num(const std::string& k, std::size_t v) {
        return raw(k, std::to_string(v));
    }
    JsonObj& str(const std::string& k, const std::string& v) {
        return raw(k, "\"" + jesc(v) + "\"");
    }
    JsonObj& boolean(const std::string& k, bool v) {
        return raw(k, v ? "true" : "false");
    }
    JsonObj& raw(const std::string& k, const std::string& v) {
        body_ += first_ ? "" : ",";
        body_ += "\"" + jesc(k) + "\":" + v;
        first_ = false;
        return *this;
    }
    std::string dump() const { return "{" + body_ + "}"; }

  private:
    std::string body_;
    bool first_ = true;
};

void print_json(const JsonObj& j) { std::printf("%s\n", j.dump().c_str()); }

// ---- shared plumbing ----

RunConfig load_config(const std::string& path) {
    RunConfig c = parse_config(path);
    const std::vector<std::string> msgs = c.validate();
    if (!msgs.empty()) {
        std::string all = "invalid config " + path + ":";
        for (const std::string& m : msgs) all += "\n  " + m;
        throw ConfigError(all);
    }
    return c;
}

fs::path outdir_for(const RunConfig& cfg, const std::string& override_dir) {
    fs::path d = override_dir.empty() ? fs::path(cfg.output.dir)
                                      : fs::path(override_dir);
    fs::create_directories(d);
    return d;
}

CharControls char_controls(const RunConfig& cfg) {
    CharControls ctl;
    ctl.y_max = cfg.charsolver.y_max;
    ctl.h_min_factor = cfg.charsolver.h_min_factor;
    ctl.blowup_factor = cfg.charsolver.blowup_factor;
    return ctl;
}

// char.x_lo < char.x_hi asks for the configured profile resampled on a
// uniform grid of spacing char.dx over that window; the data chart u = 1 - x
// makes this a plain re-synthesis with a widened label range.
InitialState char_front_data(const RunConfig& cfg) {
    if (cfg.charsolver.x_lo < cfg.charsolver.x_hi) {
        RunConfig wide = cfg;
        wide.data.U = 1.0 - cfg.charsolver.x_lo;
        wide.data.U_min = 1.0 - cfg.charsolver.x_hi;
        const double span = cfg.charsolver.x_hi - cfg.charsolver.x_lo;
        wide.data.N = std::lround(span / cfg.charsolver.dx) + 1;
        return synthesize_data(wide);
    }
    return synthesize_data(cfg);
}

std::string checks_json(const ValidationReport& vr) {
    std::string arr = "[";
    for (std::size_t i = 0; i < vr.checks.size(); ++i) {
        const BoundCheck& b = vr.checks[i];
        JsonObj row;
        row.str("name", b.name)
            .num("measured", b.measured)
            .num("bound", b.bound)
            .boolean("pass", b.pass);
        arr += (i ? "," : "") + row.dump();
    }
    return arr + "]";
}

JsonObj prediction_json(const LifespanPrediction& p) {
    JsonObj j;
    j.num("delta1", p.delta1)
        .num("delta2", p.delta2)
        .num("inf_mu0", p.inf_mu0)
        .num("margin0", p.margin0)
        .num("T_shock_pred", p.T_shock_pred)
        .num("T_sonic_pred", p.T_sonic_pred)
        .num("T_star_pred", p.T_star_pred)
        .num("bound", p.bound)
        .str("type", p.type);
    return j;
}

JsonObj report_json(const RunReport& rep) {
    JsonObj j;
    j.str("type", rep.type)
        .num("t_stop", rep.t_stop)
        .num("T_measured", rep.T_measured)
        .num("u_at_min", rep.u_at_min)
        .num("steps", rep.steps)
        .num("inf_mu0", rep.inf_mu0)
        .boolean("cfl_starved", rep.cfl_starved)
        .boolean("sonic_degenerate", rep.sonic_degenerate);
    return j;
}

std::size_t thread_budget(std::size_t jobs) {
    std::size_t n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    if (const char* env = std::getenv("MACHFRONT_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) n = static_cast<std::size_t>(v);
    }
    return std::min(n, jobs);
}

// ---- subcommands ----

int cmd_synth_data(const RunConfig& cfg, const std::string& out) {
    const fs::path dir = outdir_for(cfg, out);
    const InitialState s = synthesize_data(cfg);
    const fs::path file = dir / "data.csv";
    write_state_csv(s, file.string());
    const ValidationReport vr = validate_data(s, cfg);
    JsonObj j;
    j.str("file", file.string())
        .num("n", s.size())
        .num("du", s.du)
        .num("inf_mu", s.inf_mu)
        .boolean("pass", vr.all_pass())
        .raw("checks", checks_json(vr));
    print_json(j);
    return 0;
}

int cmd_validate(const RunConfig& cfg) {
    InitialState s;
    try {
        s = synthesize_data(cfg);
    } catch (const SynthesisError& e) {
        JsonObj j;
        j.boolean("pass", false).str("error", e.what());
        print_json(j);
        return 1;
    }
    const ValidationReport vr = validate_data(s, cfg);
    JsonObj j;
    j.boolean("pass", vr.all_pass()).raw("checks", checks_json(vr));
    print_json(j);
    return vr.all_pass() ? 0 : 1;
}

int cmd_run_nullframe(const RunConfig& cfg, const std::string& out) {
    const fs::path dir = outdir_for(cfg, out);
    const InitialState s = synthesize_data(cfg);
    const RunReport rep = run(s, cfg, dir.string());
    bool boot_violation = false;
    if (cfg.diag.bootstrap) {
        const BootstrapReport b = bootstrap_monitor(rep, cfg);
        write_bootstrap_csv(b, (dir / "bootstrap.csv").string());
        boot_violation = b.any_violation;
    }
    if (cfg.diag.energy) {
        const auto series =
            energy_series(rep, cfg.data.U_0, cfg.data.K, cfg.gas_model());
        write_energy_csv(series, (dir / "energy.csv").string());
    }
    JsonObj j = report_json(rep);
    j.boolean("bootstrap_violation", boot_violation);
    std::ofstream rf(dir / "run.json", std::ios::binary);
    rf << j.dump() << "\n";
    print_json(j);
    return 0;
}

int cmd_run_char(const RunConfig& cfg, const std::string& out) {
    const fs::path dir = outdir_for(cfg, out);
    const InitialState s = char_front_data(cfg);
    const GasModel gas = cfg.gas_model();
    const CharMesh mesh =
        march(front_from_trace(frame_to_cartesian_data(s, gas), gas), gas,
              char_controls(cfg));
    const fs::path file = dir / "fronts.csv";
    write_fronts_csv(mesh, file.string());
    JsonObj j;
    j.str("type", mesh.term.type)
        .str("detail", mesh.term.detail)
        .num("x", mesh.term.x)
        .num("y", mesh.term.y)
        .num("fronts", mesh.fronts.size())
        .num("h0", mesh.h0)
        .num("g0", mesh.g0)
        .str("file", file.string());
    print_json(j);
    return 0;
}

int cmd_predict(const RunConfig& cfg) {
    const InitialState s = synthesize_data(cfg);
    print_json(prediction_json(predict(s, cfg.gas_model())));
    return 0;
}

int cmd_verify(const RunConfig& cfg, const std::string& out, double grid_err,
               bool rerun) {
    const InitialState s = synthesize_data(cfg);
    const LifespanPrediction p = predict(s, cfg.gas_model());

    RunReport rep;
    const fs::path saved = fs::path(out.empty() ? cfg.output.dir : out) / "run.json";
    bool from_disk = false;
    if (!rerun && fs::exists(saved)) {
        std::ifstream in(saved);
        nlohmann::json j = nlohmann::json::parse(in);
        rep.type = j.at("type").get<std::string>();
        rep.T_measured = j.at("T_measured").get<double>();
        rep.t_stop = j.at("t_stop").get<double>();
        from_disk = true;
    } else {
        rep = run(s, cfg);
    }

    const VerificationVerdict v = verify_lifespan(
        p, rep, cfg.data.epsilon, cfg.verify.C1, cfg.verify.C2, grid_err);
    JsonObj j;
    j.boolean("pass", v.pass)
        .str("predicted_type", v.predicted_type)
        .str("measured_type", v.measured_type)
        .num("T_pred", v.T_pred)
        .num("T_meas", v.T_meas)
        .num("rel_err", v.rel_err)
        .num("tol", v.tol)
        .str("note", v.note)
        .boolean("run_from_disk", from_disk);
    print_json(j);
    return v.pass ? 0 : 1;
}

int cmd_energy(const RunConfig& cfg, const std::string& out) {
    const fs::path dir = outdir_for(cfg, out);
    const InitialState s = synthesize_data(cfg);
    const RunReport rep = run(s, cfg);
    const auto series =
        energy_series(rep, cfg.data.U_0, cfg.data.K, cfg.gas_model());
    const fs::path file = dir / "energy.csv";
    write_energy_csv(series, file.string());
    double e0 = 0.0, emax = 0.0;
    if (!series.empty()) e0 = series.front().E1 + series.front().E2;
    for (const EnergyRecord& r : series) emax = std::max(emax, r.E1 + r.E2);
    const double eps = cfg.data.epsilon;
    const double bound = 4.0 * e0 + 100.0 * eps * eps * eps;
    const bool pass = emax <= bound;
    JsonObj j;
    j.num("records", series.size())
        .num("E0", e0)
        .num("E_max", emax)
        .num("bound", bound)
        .boolean("pass", pass)
        .str("file", file.string());
    print_json(j);
    return pass ? 0 : 1;
}

int cmd_compare(const RunConfig& cfg, double t_target) {
    const InitialState s = synthesize_data(cfg);
    const GasModel gas = cfg.gas_model();
    const RunReport rep = run(s, cfg);
    const CharMesh mesh =
        march(front_from_trace(frame_to_cartesian_data(s, gas), gas), gas,
              char_controls(cfg));
    const OracleVerdict ov =
        mu_oracle_check(mesh, rep, gas, t_target, cfg.verify.oracle_band);
    const ComparisonReport cr = compare_backends(mesh, rep, gas, t_target);
    JsonObj oj;
    oj.boolean("pass", ov.pass)
        .num("max_rel_diff", ov.max_rel_diff)
        .num("band", ov.band)
        .num("t", ov.t)
        .num("points", ov.points);
    JsonObj fj;
    fj.num("t", cr.t)
        .num("linf1", cr.linf1)
        .num("linf2", cr.linf2)
        .num("rms1", cr.rms1)
        .num("rms2", cr.rms2)
        .num("points", cr.points);
    JsonObj j;
    j.raw("stretching", oj.dump()).raw("fields", fj.dump());
    print_json(j);
    return ov.pass ? 0 : 1;
}

int cmd_rate_fit(const RunConfig& cfg) {
    const InitialState s = char_front_data(cfg);
    const GasModel gas = cfg.gas_model();
    const CharMesh mesh =
        march(front_from_trace(frame_to_cartesian_data(s, gas), gas), gas,
              char_controls(cfg));
    JsonObj j;
    j.str("term_type", mesh.term.type).num("term_y", mesh.term.y);
    try {
        const RateFit fit = blowup_rate_fit(mesh, gas);
        j.num("slope", fit.slope)
            .num("residual", fit.residual)
            .num("y0", fit.y0)
            .num("points", fit.points);
    } catch (const std::runtime_error& e) {
        j.str("rate_fit_error", e.what());
        print_json(j);
        return 1;
    }
    print_json(j);
    return 0;
}

std::vector<double> parse_list(const std::string& csv, const std::string& flag) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= csv.size()) {
        const std::size_t comma = csv.find(',', pos);
        const std::string tok =
            csv.substr(pos, comma == std::string::npos ? comma : comma - pos);
        try {
            std::size_t used = 0;
            out.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw ConfigError(flag + ": cannot parse '" + tok + "' as a number");
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

struct SweepRow {
    double eps = 0.0, delta = 0.0;
    LifespanPrediction pred;
    std::string type_meas;
    double T_meas = 0.0, t_stop = 0.0;
    bool ok = false;
    std::string error;
};

int cmd_sweep(const RunConfig& base, const std::string& out,
              const std::string& eps_csv, const std::string& delta_csv) {
    const std::vector<double> eps_list = parse_list(eps_csv, "--eps");
    const std::vector<double> delta_list = parse_list(delta_csv, "--delta");
    const fs::path dir = outdir_for(base, out);

    std::vector<SweepRow> rows(eps_list.size() * delta_list.size());
    for (std::size_t i = 0; i < eps_list.size(); ++i)
        for (std::size_t k = 0; k < delta_list.size(); ++k) {
            rows[i * delta_list.size() + k].eps = eps_list[i];
            rows[i * delta_list.size() + k].delta = delta_list[k];
        }

    std::atomic<std::size_t> cursor{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t idx = cursor.fetch_add(1);
            if (idx >= rows.size()) return;
            SweepRow& r = rows[idx];
            try {
                RunConfig c = base;
                c.data.epsilon = r.eps;
                c.data.delta = r.delta;
                const InitialState s = synthesize_data(c);
                r.pred = predict(s, c.gas_model());
                const RunReport rep = run(s, c);
                r.type_meas = rep.type;
                r.T_meas = rep.T_measured;
                r.t_stop = rep.t_stop;
                // the theorem's bound is an upper limit on the lifespan: a
                // detection must not land past it, and a run that reaches the
                // horizon without detecting must have stopped short of it
                r.ok = rep.type == "tmax"
                           ? rep.t_stop < r.pred.bound
                           : rep.T_measured <= r.pred.bound * (1.0 + 1e-12);
            } catch (const std::exception& e) {
                r.error = e.what();
            }
        }
    };
    const std::size_t nthreads = thread_budget(rows.size());
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();

    const fs::path file = dir / "sweep.csv";
    {
        std::ofstream csv(file, std::ios::binary);
        csv << "eps,delta,delta1,delta2,type_pred,T_star_pred,bound,"
               "type_meas,T_meas,ok\n";
        for (const SweepRow& r : rows) {
            if (!r.error.empty()) {
                csv << g17(r.eps) << "," << g17(r.delta)
                    << ",,,error,,,error,,0\n";
                continue;
            }
            csv << g17(r.eps) << "," << g17(r.delta) << ","
                << g17(r.pred.delta1) << "," << g17(r.pred.delta2) << ","
                << r.pred.type << "," << g17(r.pred.T_star_pred) << ","
                << g17(r.pred.bound) << "," << r.type_meas << ","
                << g17(r.T_meas) << "," << (r.ok ? 1 : 0) << "\n";
        }
    }

    std::size_t violations = 0, errors = 0;
    for (const SweepRow& r : rows) {
        if (!r.error.empty()) {
            ++errors;
            std::fprintf(stderr, "sweep eps=%s delta=%s: %s\n", g17(r.eps).c_str(),
                         g17(r.delta).c_str(), r.error.c_str());
        } else if (!r.ok) {
            ++violations;
        }
    }
    JsonObj j;
    j.num("runs", rows.size())
        .num("violations", violations)
        .num("errors", errors)
        .num("threads", nthreads)
        .str("file", file.string());
    print_json(j);
    return (violations || errors) ? 1 : 0;
}

int cmd_inspect(const RunConfig& cfg) {
    std::fputs(serialize(cfg).c_str(), stdout);
    const GasModel gas = cfg.gas_model();
    const double q_cr = gas.critical_speed();
    std::printf("# derived: q_cr = %s\n", g17(q_cr).c_str());
    std::printf("# derived: q_max = %s\n", g17(gas.q_max()).c_str());
    std::printf("# derived: margin0 = %s\n",
                g17(cfg.data.K * cfg.data.K - q_cr * q_cr).c_str());
    std::printf("# derived: mach_of_K = %s\n",
                g17(gas.mach(0.0, cfg.data.K)).c_str());
    std::printf("# derived: du = %s\n",
                g17((cfg.data.U - cfg.data.U_min) / double(cfg.data.N - 1)).c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"steady supersonic flow laboratory"};
    app.require_subcommand(1);

    std::string config_path, out_dir, eps_csv = "0.0005,0.001,0.002",
                                      delta_csv = "0.25,0.5,1";
    double grid_err = 0.0, t_target = 0.1;
    bool rerun = false;

    auto add_config = [&](CLI::App* sc) {
        sc->add_option("-c,--config", config_path, "experiment config file")
            ->required();
    };
    auto add_out = [&](CLI::App* sc) {
        sc->add_option("-o,--out", out_dir,
                       "output directory (default: output.dir from the config)");
    };

    CLI::App* synth = app.add_subcommand(
        "synth-data", "build the initial data and write it as CSV");
    add_config(synth);
    add_out(synth);

    CLI::App* val = app.add_subcommand(
        "validate", "check the data against its size bounds");
    add_config(val);

    CLI::App* rnf = app.add_subcommand(
        "run-nullframe", "march the frame system until detection or t_max");
    add_config(rnf);
    add_out(rnf);

    CLI::App* rch = app.add_subcommand(
        "run-char", "march the characteristic mesh until detection or y_max");
    add_config(rch);
    add_out(rch);

    CLI::App* prd = app.add_subcommand(
        "predict", "lifespan prediction from the initial data alone");
    add_config(prd);

    CLI::App* ver = app.add_subcommand(
        "verify", "compare the prediction against the measured lifespan");
    add_config(ver);
    add_out(ver);
    ver->add_option("--grid-err", grid_err,
                    "measured grid error folded into the tolerance");
    ver->add_flag("--rerun", rerun,
                  "ignore a saved run.json and march afresh");

    CLI::App* ene = app.add_subcommand(
        "energy", "far-field energy history of a frame run");
    add_config(ene);
    add_out(ene);

    CLI::App* cmp = app.add_subcommand(
        "compare", "cross-check the two backends on a smooth stretch");
    add_config(cmp);
    cmp->add_option("-t,--t", t_target, "comparison height (default 0.1)");

    CLI::App* rft = app.add_subcommand(
        "rate-fit", "gradient growth exponent of a characteristic march");
    add_config(rft);

    CLI::App* swp = app.add_subcommand(
        "sweep", "run a grid of (eps, delta) pairs and check every bound");
    add_config(swp);
    add_out(swp);
    swp->add_option("--eps", eps_csv, "comma-separated eps values");
    swp->add_option("--delta", delta_csv, "comma-separated delta values");

    CLI::App* ins = app.add_subcommand(
        "inspect", "echo the parsed config with derived gas quantities");
    add_config(ins);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const RunConfig cfg = load_config(config_path);
        if (synth->parsed()) return cmd_synth_data(cfg, out_dir);
        if (val->parsed()) return cmd_validate(cfg);
        if (rnf->parsed()) return cmd_run_nullframe(cfg, out_dir);
        if (rch->parsed()) return cmd_run_char(cfg, out_dir);
        if (prd->parsed()) return cmd_predict(cfg);
        if (ver->parsed()) return cmd_verify(cfg, out_dir, grid_err, rerun);
        if (ene->parsed()) return cmd_energy(cfg, out_dir);
        if (cmp->parsed()) return cmd_compare(cfg, t_target);
        if (rft->parsed()) return cmd_rate_fit(cfg);
        if (swp->parsed()) return cmd_sweep(cfg, out_dir, eps_csv, delta_csv);
        if (ins->parsed()) return cmd_inspect(cfg);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
