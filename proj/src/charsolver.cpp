#include "charsolver.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "config.hpp"

namespace machfront {

namespace {

double speed(const CharNode& n) { return std::hypot(n.phi1, n.phi2); }

CharNode node_from_velocity(const GasModel& gas, double x, double y, double p1, double p2,
                            double u) {
    CharNode n;
    n.x = x;
    n.y = y;
    n.phi1 = p1;
    n.phi2 = p2;
    const Invariants v = invariants(gas, p1, p2);
    n.v1 = v.v1;
    n.v2 = v.v2;
    n.u = u;
    return n;
}

}  // namespace

CharNode advance_node(const CharNode& left, const CharNode& right, const GasModel& gas,
                      double tol_sonic) {
    const double q_floor = gas.critical_speed() * (1.0 + tol_sonic);
    if (speed(left) <= q_floor || speed(right) <= q_floor)
        throw SonicError("advance_node: parent state at or below the critical speed");

    // the plus-family invariant (and the eikonal label) arrive from the left
    // parent, the minus-family invariant from the right parent
    Invariants v;
    v.v1 = right.v1;
    v.v2 = left.v2;
    if (!(v.v1 - v.v2 > 0.0))
        throw SonicError("advance_node: invariant gap closed, flow reached sonic");

    double p1 = 0.0, p2 = 0.0;
    try {
        std::tie(p1, p2) = velocity_from_invariants(gas, v);
    } catch (const std::domain_error&) {
        throw SonicError("advance_node: transported invariants leave the supersonic range");
    }
    if (std::hypot(p1, p2) <= q_floor)
        throw SonicError("advance_node: solved state at or below the critical speed");

    // intersection of the two characteristic segments with trapezoidal
    // slopes; the state is position-independent, so one corrected pass
    // integrates both segments at second order
    const double a = 0.5 * (char_slopes(gas, left.phi1, left.phi2).second +
                            char_slopes(gas, p1, p2).second);
    const double b = 0.5 * (char_slopes(gas, right.phi1, right.phi2).first +
                            char_slopes(gas, p1, p2).first);
    const double den = a - b;
    if (!(den > 0.0))
        throw CrossingError("advance_node: characteristics do not converge");
    const double y = (right.x - left.x + a * left.y - b * right.y) / den;
    // an intersection below either parent means the plus characteristic from
    // the left parent has already overtaken the right one at its own height,
    // so the crossing is behind the front, not ahead of it
    if (!(y > std::max(left.y, right.y)))
        throw CrossingError("advance_node: intersection behind the front");
    const double x = left.x + a * (y - left.y);

    CharNode child = node_from_velocity(gas, x, y, p1, p2, left.u);
    if (std::abs(child.v1 - v.v1) > 1e-10 || std::abs(child.v2 - v.v2) > 1e-10)
        throw std::runtime_error("advance_node: invariant system residual above 1e-10");
    return child;
}

std::vector<CharNode> front_from_trace(const CartesianTrace& trace, const GasModel& gas) {
    const std::size_t n = trace.size();
    std::vector<CharNode> front;
    front.reserve(n);
    for (std::size_t k = n; k-- > 0;)
        front.push_back(node_from_velocity(gas, trace.x[k], 0.0, trace.phi1[k],
                                           trace.phi2[k], 1.0 - trace.x[k]));
    return front;
}

std::vector<CharNode> front_from_profile(const std::vector<double>& x,
                                         const std::vector<double>& phi1,
                                         const std::vector<double>& phi2,
                                         const GasModel& gas) {
    if (x.size() != phi1.size() || x.size() != phi2.size())
        throw std::invalid_argument("front_from_profile: mismatched array lengths");
    std::vector<CharNode> front;
    front.reserve(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        front.push_back(node_from_velocity(gas, x[i], 0.0, phi1[i], phi2[i], 1.0 - x[i]));
    return front;
}

namespace {

struct FrontStats {
    double q_min = std::numeric_limits<double>::infinity();
    std::size_t i_q = 0;
    double s_min = std::numeric_limits<double>::infinity();  // adjacent separation
    std::size_t i_s = 0;
    double g_max = 0.0;  // |dv/dx| over both invariants
    std::size_t i_g = 0;
    double y_min = std::numeric_limits<double>::infinity();
};

// Adjacent separation is measured at a common height: converging pairs advance
// more slowly, so the front skews in y, and the raw x gap across a skewed
// front over-reads how close the two characteristics actually are.  Sliding
// the left node up its own plus slope to the right node's height removes the
// skew; for straight simple-wave characteristics the projected gap is exact.
FrontStats front_stats(const std::vector<CharNode>& f, const GasModel& gas) {
    FrontStats s;
    double lp_prev = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double q = speed(f[i]);
        if (q < s.q_min) {
            s.q_min = q;
            s.i_q = i;
        }
        s.y_min = std::min(s.y_min, f[i].y);
        const double lp = char_slopes(gas, f[i].phi1, f[i].phi2).second;
        if (i > 0) {
            const double gap = (f[i].x - f[i - 1].x) -
                               0.5 * (lp_prev + lp) * (f[i].y - f[i - 1].y);
            if (gap < s.s_min) {
                s.s_min = gap;
                s.i_s = i - 1;
            }
            if (gap > 0.0) {
                const double g = std::max(std::abs(f[i].v1 - f[i - 1].v1),
                                          std::abs(f[i].v2 - f[i - 1].v2)) / gap;
                if (g > s.g_max) {
                    s.g_max = g;
                    s.i_g = i - 1;
                }
            }
        }
        lp_prev = lp;
    }
    return s;
}

}  // namespace

CharMesh march(std::vector<CharNode> front0, const GasModel& gas, const CharControls& ctl) {
    if (front0.size() < 3)
        throw std::invalid_argument("march: initial front needs at least 3 nodes");
    for (std::size_t i = 0; i + 1 < front0.size(); ++i)
        if (!(front0[i + 1].x > front0[i].x))
            throw std::invalid_argument("march: initial front must be strictly increasing in x");

    const double q_floor = gas.critical_speed() * (1.0 + ctl.tol_sonic);
    for (const CharNode& nd : front0)
        if (std::hypot(nd.phi1, nd.phi2) <= q_floor)
            throw SonicError("march: initial front contains a sonic state");
    CharMesh mesh;
    {
        const FrontStats s0 = front_stats(front0, gas);
        mesh.h0 = s0.s_min;
        mesh.g0 = s0.g_max;
    }
    const double h_min = ctl.h_min_factor * mesh.h0;
    const double g_thresh = mesh.g0 > 0.0 ? ctl.blowup_factor * mesh.g0
                                          : std::numeric_limits<double>::infinity();
    mesh.fronts.push_back(std::move(front0));

    auto pair_mid = [&](const std::vector<CharNode>& f, std::size_t i, const char* type,
                        const char* detail) {
        mesh.term.type = type;
        mesh.term.detail = detail;
        mesh.term.x = 0.5 * (f[i].x + f[i + 1].x);
        mesh.term.y = 0.5 * (f[i].y + f[i + 1].y);
        mesh.term.front_index = mesh.fronts.size() - 1;
    };

    while (true) {
        const std::vector<CharNode>& cur = mesh.fronts.back();
        const std::size_t m = cur.size();
        if (m < 3)
            throw std::runtime_error(
                "march: mesh narrowed below 3 nodes with no detection; widen the domain");
        if (ctl.max_fronts && mesh.fronts.size() >= ctl.max_fronts) {
            mesh.term.type = "ymax";
            mesh.term.detail = "front_cap";
            mesh.term.x = cur[m / 2].x;
            mesh.term.y = cur[m / 2].y;
            mesh.term.front_index = mesh.fronts.size() - 1;
            return mesh;
        }

        std::vector<CharNode> next;
        next.reserve(m - 1);
        for (std::size_t i = 0; i + 1 < m; ++i) {
            try {
                next.push_back(advance_node(cur[i], cur[i + 1], gas, ctl.tol_sonic));
            } catch (const SonicError&) {
                pair_mid(cur, i, "sonic", "advance");
                return mesh;
            } catch (const CrossingError&) {
                pair_mid(cur, i, "shock", "crossing");
                return mesh;
            }
        }
        mesh.fronts.push_back(std::move(next));
        const std::vector<CharNode>& f = mesh.fronts.back();
        const FrontStats s = front_stats(f, gas);

        if (s.q_min <= q_floor) {
            mesh.term.type = "sonic";
            mesh.term.detail = "state";
            mesh.term.x = f[s.i_q].x;
            mesh.term.y = f[s.i_q].y;
            mesh.term.front_index = mesh.fronts.size() - 1;
            return mesh;
        }
        if (s.s_min <= 0.0) {
            pair_mid(f, s.i_s, "shock", "fold");
            return mesh;
        }
        if (s.s_min <= h_min) {
            pair_mid(f, s.i_s, "shock", "spacing");
            return mesh;
        }
        if (s.g_max >= g_thresh) {
            pair_mid(f, s.i_g, "shock", "gradient");
            return mesh;
        }
        if (s.y_min >= ctl.y_max) {
            mesh.term.type = "ymax";
            mesh.term.detail = "reached";
            mesh.term.x = f[f.size() / 2].x;
            mesh.term.y = s.y_min;
            mesh.term.front_index = mesh.fronts.size() - 1;
            return mesh;
        }
    }
}

RateFit blowup_rate_fit(const CharMesh& mesh, const GasModel& gas) {
    if (mesh.term.type != "shock")
        throw std::runtime_error("blowup_rate_fit: mesh did not terminate in a shock");

    std::vector<double> ys, ss, yg, gg;
    for (const auto& f : mesh.fronts) {
        if (f.size() < 2) continue;
        const FrontStats s = front_stats(f, gas);
        if (s.s_min > 0.0) {
            ys.push_back(0.5 * (f[s.i_s].y + f[s.i_s + 1].y));
            ss.push_back(s.s_min);
        }
        if (s.g_max > 0.0) {
            yg.push_back(0.5 * (f[s.i_g].y + f[s.i_g + 1].y));
            gg.push_back(s.g_max);
        }
    }

    // focusing time from the collapsing spacing: straight-line extrapolation
    // to zero over the fronts where the spacing has clearly started to drop
    double st = 0, stt = 0, sv = 0, stv = 0;
    long cnt = 0;
    for (std::size_t k = 0; k < ss.size(); ++k) {
        if (ss[k] > 0.1 * mesh.h0) continue;
        st += ys[k];
        stt += ys[k] * ys[k];
        sv += ss[k];
        stv += ys[k] * ss[k];
        ++cnt;
    }
    if (cnt < 3)
        throw std::runtime_error("blowup_rate_fit: spacing never entered the collapse range");
    const double det = cnt * stt - st * st;
    const double slope_s = (cnt * stv - st * sv) / det;
    if (!(slope_s < 0.0))
        throw std::runtime_error("blowup_rate_fit: spacing is not collapsing");
    const double y0 = -(sv * stt - st * stv) / det / slope_s;

    // gradient growth against the distance to the focusing time, one decade
    const double tail = y0 - yg.back();
    if (!(tail > 0.0))
        throw std::runtime_error("blowup_rate_fit: extrapolated focusing time behind the mesh");
    double a = 0, b = 0, c = 0, d = 0;
    std::size_t n = 0;
    for (std::size_t k = 0; k < yg.size(); ++k) {
        const double dy = y0 - yg[k];
        if (!(dy > 0.0) || dy > 10.0 * tail) continue;
        const double lx = std::log(dy), ly = std::log(gg[k]);
        a += lx;
        b += lx * lx;
        c += ly;
        d += lx * ly;
        ++n;
    }
    if (n < 8) throw std::runtime_error("blowup_rate_fit: fewer than 8 fronts in the fit window");

    RateFit fit;
    fit.y0 = y0;
    fit.points = n;
    const double det2 = double(n) * b - a * a;
    fit.slope = (double(n) * d - a * c) / det2;
    const double icept = (c * b - a * d) / det2;
    double ssq = 0.0;
    for (std::size_t k = 0; k < yg.size(); ++k) {
        const double dy = y0 - yg[k];
        if (!(dy > 0.0) || dy > 10.0 * tail) continue;
        const double r = std::log(gg[k]) - (icept + fit.slope * std::log(dy));
        ssq += r * r;
    }
    fit.residual = std::sqrt(ssq / double(n));
    return fit;
}

void write_fronts_csv(const CharMesh& mesh, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_fronts_csv: cannot open " + path);
    out << "y,x,q,theta,v1,v2\n";
    for (const auto& f : mesh.fronts)
        for (const auto& n : f)
            out << g17(n.y) << ',' << g17(n.x) << ',' << g17(speed(n)) << ','
                << g17(flow_angle(n.phi1, n.phi2)) << ',' << g17(n.v1) << ','
                << g17(n.v2) << '\n';
}

}  // namespace machfront
