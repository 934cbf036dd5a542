#pragma once

// Turning points of q0, Stokes (Im W = 0) and anti-Stokes (Re W = 0) lines,
// the Stokes graph and its central-strip chain.

#include "adiabat/contours.hpp"
#include "adiabat/roots.hpp"

#include <optional>
#include <string>
#include <vector>

namespace adiabat {

struct TurningPoint {
    cplx location;
    double residual = 0.0;
    int multiplicity = 1;
    cplx slope;                        // q0'(location)
    std::array<cplx, 3> stokes_dirs;   // unit directions of Im W = 0
    std::array<cplx, 3> anti_dirs;     // unit directions of Re W = 0
};

enum class LineKind { stokes, anti_stokes };
enum class Terminus { infinity_direction, pole, turning_point, length_limit };

std::string_view to_string(LineKind k);
std::string_view to_string(Terminus t);

struct StokesLine {
    int origin = -1;          // index into the turning-point list
    int direction_index = 0;
    LineKind kind = LineKind::stokes;
    std::vector<cplx> points;
    Terminus terminus = Terminus::length_limit;
    int end_index = -1;       // turning point or pole index for those termini
    double max_drift = 0.0;   // max |Im W| (stokes) or |Re W| (anti) along the line
    double arclength = 0.0;
};

struct TraceOptions {
    Box box;
    double initial_offset = 1e-3; // first step away from the turning point
    double max_step = 0.05;
    double min_step = 1e-13;
    double sagitta_tol = 1e-8;    // chord-to-curve deviation per step
    double capture_radius = 1e-6;
    double max_length = 200.0;
};

struct Sector {
    std::vector<int> lines;       // stokes lines on the boundary cycle
    std::vector<cplx> polygon;
    std::string singular_point;   // "pole k", "infinity" or "none"
    bool contains_origin = false;
};

struct NedChain {
    int lower_first = -1;               // index of s1-bar
    std::vector<int> upper;             // indices of s1..sn
    std::vector<int> lower;             // indices of the lower chain s1-bar..sn-bar
    std::vector<cplx> upper_points;
    std::vector<cplx> lower_points;
    // Strip boundaries, left to right: infinite line, chain connections,
    // infinite line.
    std::vector<cplx> upper_boundary;
    std::vector<cplx> lower_boundary;

    // Whether z lies strictly between the two boundaries.
    bool in_strip(cplx z) const;
};

struct StokesGraph {
    Box box;
    std::vector<TurningPoint> turning_points;
    std::vector<Pole> poles;
    std::vector<StokesLine> lines;
    std::vector<Sector> sectors;
};

std::vector<TurningPoint> find_turning_points(const EffectivePotential& ep, const Box& box,
                                              const RootSearchOptions& opts = {});

// Local data at a simple zero s0 with q0'(s0) = slope.
TurningPoint make_turning_point(cplx location, cplx slope, double residual = 0.0);

// Default search box [-L, L]^2 with L = 4 (1 + max |s_k|) over the turning
// points found in [-4, 4]^2 (L = 4 if none).
Box default_search_box(const EffectivePotential& ep);

StokesLine trace_stokes_line(const EffectivePotential& ep, const std::vector<TurningPoint>& tps,
                             int origin, int direction_index, LineKind kind,
                             const TraceOptions& opts = {});

// Same tracer for an arbitrary analytic potential given by value/derivative.
StokesLine trace_line(const ValueAndDerivative& q, const std::vector<TurningPoint>& tps,
                      const std::vector<Pole>& poles, int origin, int direction_index,
                      LineKind kind, const TraceOptions& opts = {});

struct GraphOptions {
    TraceOptions trace;
    bool anti_stokes = true;
    // Lower-half-plane lines are conjugates of the upper ones (real fields).
    bool enforce_symmetry = true;
};

StokesGraph build_graph(const EffectivePotential& ep, const Box& box, const GraphOptions& opts = {});

// Errors: structure-not-ned.
NedChain identify_ned_chain(const StokesGraph& g);

// Symmetric Hausdorff distance between two sets of polylines.
double hausdorff_distance(const std::vector<std::vector<cplx>>& a,
                          const std::vector<std::vector<cplx>>& b);

std::string graph_to_json(const StokesGraph& g, const std::optional<NedChain>& chain);

} // namespace adiabat
