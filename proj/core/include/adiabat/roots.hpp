#pragma once

// Zeros of a meromorphic function in a rectangle by the argument principle:
// recursive subdivision until each cell is small, then Newton polish.

#include "adiabat/field.hpp"

#include <functional>
#include <utility>
#include <vector>

namespace adiabat {

struct Box {
    double re_min = -4, re_max = 4, im_min = -4, im_max = 4;
    bool contains(cplx z, double pad = 0.0) const
    {
        return z.real() >= re_min - pad && z.real() <= re_max + pad &&
               z.imag() >= im_min - pad && z.imag() <= im_max + pad;
    }
    double diameter() const { return std::hypot(re_max - re_min, im_max - im_min); }
    cplx center() const { return {(re_min + re_max) / 2, (im_min + im_max) / 2}; }
};

// f and f' at a point.
using ValueAndDerivative = std::function<std::pair<cplx, cplx>(cplx)>;

struct RootSearchOptions {
    double min_diameter = 1e-3;
    double newton_tol = 1e-12;
    int max_newton = 60;
    int max_cells = 200000;
};

struct Root {
    cplx z;
    int multiplicity = 1; // >1 means a multiple root or an unresolved cluster
    double residual = 0.0;
};

// `poles` must list every pole inside the box with its order; the count of
// zeros is winding + sum of enclosed pole orders.
std::vector<Root> find_roots(const ValueAndDerivative& f, const Box& box,
                             const std::vector<Pole>& poles,
                             const RootSearchOptions& opts = {});

// Winding of f around 0 along the boundary of the box, in turns.
double boundary_winding(const ValueAndDerivative& f, const Box& box);

} // namespace adiabat
