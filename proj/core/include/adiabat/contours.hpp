#pragma once

// Paths in the complex s-plane, action integrals along them with sqrt
// endpoint singularities, and winding numbers of the F-map.

#include "adiabat/potential.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace adiabat {

enum class EndpointTag { generic, turning_point, origin };

struct ContourPath {
    std::vector<cplx> points;
    bool closed = false;
    EndpointTag start_tag = EndpointTag::generic;
    EndpointTag end_tag = EndpointTag::generic;
    std::vector<cplx> obstacles;
    double clearance = 0.05;

    static ContourPath segment(cplx a, cplx b);
    double length() const;
    ContourPath reversed() const;
    ContourPath conjugated() const;
    // Each segment split into k equal pieces.
    ContourPath refined(int k) const;
    double min_obstacle_distance() const;
    cplx front() const { return points.front(); }
    cplx back() const { return points.back(); }
};

enum class DetourSide { upper, lower };

// Straight segment with semicircular detours around obstacles closer than
// `clearance`. Detour radius starts at 2*clearance and grows until clear.
ContourPath build_avoiding_path(cplx from, cplx to, const std::vector<cplx>& obstacles,
                                double clearance = 0.05, DetourSide side = DetourSide::upper);

// Closed stadium of half-width r around the segment a->b: runs from a to b
// along the left of the directed segment and returns along the right
// (clockwise for a left-to-right segment).
ContourPath stadium_around(cplx a, cplx b, double r, int arc_points = 48);

// A function with up to two square-root branches. `radicands` gives the
// squares; `value` receives the roots chosen by continuity along the path.
struct BranchedFunction {
    int n_roots = 0;
    std::function<std::array<cplx, 2>(cplx)> radicands;
    std::function<cplx(cplx, const std::array<cplx, 2>&)> value;
};

enum class IntegrandTag { mu_T_B, phidot_cos_theta, thetadot_over_sin, sqrt_q2, sqrt_q0, custom };

struct ActionValue {
    cplx value;
    double error = 0.0;
    IntegrandTag tag = IntegrandTag::custom;
    int evaluations = 0;
};

struct ActionOptions {
    double abs_tol = 1e-12;
    double rel_tol = 1e-11;
    int max_intervals = 20000;
    // Roots at the first path point; if absent they are continued from the
    // real axis to the path point closest to it.
    std::optional<std::array<cplx, 2>> start_roots;
};

ActionValue action_integral(const ContourPath& path, const BranchedFunction& f,
                            const ActionOptions& opts = {});

// Built-in integrands: mu T B, phi' cos(Theta), Theta'/sin(Theta) use the
// field branches (B, rho); sqrt_q2 / sqrt_q0 use the potential.
BranchedFunction make_integrand(const EffectivePotential& ep, IntegrandTag tag, double T);

ActionValue action_integral(const EffectivePotential& ep, const ContourPath& path,
                            IntegrandTag tag, double T, const ActionOptions& opts = {});

// Roots of f's radicands at s, continued along the vertical line from Re s
// (where the principal roots are the physical ones) up or down to s.
std::array<cplx, 2> physical_roots(const BranchedFunction& f, cplx s);

// Roots continued along `path` from `start`; one entry per path vertex.
std::vector<std::array<cplx, 2>> continue_roots(const ContourPath& path, const BranchedFunction& f,
                                                std::array<cplx, 2> start);

struct WindingResult {
    int n = 0;
    double raw = 0.0; // unrounded turns
    int samples = 0;
};

// Turns of F(s) around 0 as s traverses the closed path once.
WindingResult winding_number(const ContourPath& closed, const std::function<cplx(cplx)>& F);

// F-map of the field, with the branch of B continued along the path from
// the physical sheet.
WindingResult winding_number(const FieldProfile& field, const ContourPath& closed);

} // namespace adiabat
