#pragma once
#include <string>
#include <vector>

#include "machfront/errors.hpp"
#include "machfront/gas.hpp"
#include "machfront/riemann.hpp"
#include "data.hpp"

// Two-family method of characteristics for the steady supersonic system,
// marching in y.  A front is an x-ordered list of nodes; each new node sits
// at the intersection of the plus-characteristic from its left parent and
// the minus-characteristic from its right parent, so fronts shrink by one
// node per level and the mesh is a triangle.  The invariant riding each
// family transfers to the child unchanged, which makes shock formation
// visible as characteristic focusing (front spacing collapsing) and sonic
// degeneration visible as the invariant gap closing.

namespace machfront {

// Thrown when the parent characteristics fail to intersect ahead of the
// front; the marcher treats it as a completed focusing event.
struct CrossingError : std::runtime_error {
    explicit CrossingError(const std::string& what) : std::runtime_error(what) {}
};

struct CharNode {
    double x = 0.0;
    double y = 0.0;
    double phi1 = 0.0;  // vertical velocity component
    double phi2 = 0.0;  // horizontal velocity component
    double v1 = 0.0;    // theta + nu, rides the minus family
    double v2 = 0.0;    // theta - nu, rides the plus family
    double u = 0.0;     // eikonal label, rides the plus family
};

struct CharControls {
    double y_max = 10.0;
    double tol_sonic = 1e-6;
    double h_min_factor = 1e-4;   // spacing collapse threshold, x initial spacing
    double blowup_factor = 1e4;   // gradient threshold, x initial max |dv/dx|
    std::size_t max_fronts = 0;   // 0 means limited only by mesh width
};

struct TerminationRecord {
    std::string type;     // "shock" | "sonic" | "ymax"
    std::string detail;   // what tripped: "spacing" | "gradient" | "fold" | ...
    double x = 0.0;
    double y = 0.0;
    std::size_t front_index = 0;
};

struct CharMesh {
    std::vector<std::vector<CharNode>> fronts;
    TerminationRecord term;
    double h0 = 0.0;  // initial front spacing (minimum)
    double g0 = 0.0;  // initial max |dv/dx| over both invariants
};

struct RateFit {
    double slope = 0.0;     // d log max|dv/dx| / d log (y0 - y)
    double residual = 0.0;  // rms misfit of the log-log line
    double y0 = 0.0;        // extrapolated focusing time
    std::size_t points = 0;
};

// Child of two adjacent supersonic parents.  Position from the trapezoidal
// predictor-corrector on the two characteristic segments, state solved from
// the transported invariant pair.
CharNode advance_node(const CharNode& left, const CharNode& right, const GasModel& gas,
                      double tol_sonic);

// Initial front from a Cartesian data trace (reverses the stored order so x
// increases) or from explicit velocity profiles already ordered in x.
std::vector<CharNode> front_from_trace(const CartesianTrace& trace, const GasModel& gas);
std::vector<CharNode> front_from_profile(const std::vector<double>& x,
                                         const std::vector<double>& phi1,
                                         const std::vector<double>& phi2,
                                         const GasModel& gas);

// March fronts until shock focusing, sonic degeneration, or y_max.  Throws
// std::runtime_error if the mesh narrows below 3 nodes with no detection.
CharMesh march(std::vector<CharNode> front0, const GasModel& gas, const CharControls& ctl);

// Least-squares growth exponent of the front gradient against the distance
// to the extrapolated focusing time, over the last decade before detection.
RateFit blowup_rate_fit(const CharMesh& mesh, const GasModel& gas);

void write_fronts_csv(const CharMesh& mesh, const std::string& path);

}  // namespace machfront
