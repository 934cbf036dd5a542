#include "adiabat/roots.hpp"
#include "adiabat/error.hpp"

#include <cmath>
#include <numbers>

namespace adiabat {

namespace {

struct BadBoundary {};

constexpr double two_pi = 2.0 * std::numbers::pi;

// Change of arg f along the straight edge a->b, refined until every step
// turns by less than 0.4 rad.
double edge_arg_change(const ValueAndDerivative& f, cplx a, cplx b)
{
    auto value = [&](cplx z) {
        cplx v;
        try {
            v = f(z).first;
        } catch (const Error&) { // the edge runs through a pole
            throw BadBoundary{};
        }
        if (!std::isfinite(std::abs(v)) || std::abs(v) == 0.0) throw BadBoundary{};
        return v;
    };
    const int base = 16;
    std::vector<std::pair<cplx, cplx>> pts;
    for (int i = 0; i <= base; ++i) {
        cplx z = a + (b - a) * (double(i) / base);
        pts.emplace_back(z, value(z));
    }
    const double min_step = 1e-13 * (1 + std::abs(a) + std::abs(b));
    double total = 0.0;
    std::size_t k = 0;
    int inserted = 0;
    while (k + 1 < pts.size()) {
        cplx f0 = pts[k].second, f1 = pts[k + 1].second;
        double d = std::arg(f1 / f0);
        bool big = std::fabs(d) > 0.4 || std::abs(f1) > 8 * std::abs(f0) ||
                   std::abs(f0) > 8 * std::abs(f1);
        if (big) {
            if (std::abs(pts[k + 1].first - pts[k].first) < min_step || ++inserted > 200000)
                throw BadBoundary{};
            cplx zm = (pts[k].first + pts[k + 1].first) / 2.0;
            pts.insert(pts.begin() + long(k) + 1, {zm, value(zm)});
            continue;
        }
        total += d;
        ++k;
    }
    return total;
}

double box_winding(const ValueAndDerivative& f, const Box& b)
{
    cplx c0(b.re_min, b.im_min), c1(b.re_max, b.im_min), c2(b.re_max, b.im_max),
        c3(b.re_min, b.im_max);
    double t = edge_arg_change(f, c0, c1) + edge_arg_change(f, c1, c2) +
               edge_arg_change(f, c2, c3) + edge_arg_change(f, c3, c0);
    return t / two_pi;
}

int enclosed_pole_order(const std::vector<Pole>& poles, const Box& b)
{
    int n = 0;
    for (auto& p : poles)
        if (b.contains(p.location) &&
            p.location.real() > b.re_min && p.location.real() < b.re_max &&
            p.location.imag() > b.im_min && p.location.imag() < b.im_max)
            n += p.order;
    return n;
}

bool pole_near_boundary(const std::vector<Pole>& poles, const Box& b, double eps)
{
    for (auto& p : poles) {
        double x = p.location.real(), y = p.location.imag();
        bool in_x = x >= b.re_min - eps && x <= b.re_max + eps;
        bool in_y = y >= b.im_min - eps && y <= b.im_max + eps;
        if (in_y && (std::fabs(x - b.re_min) < eps || std::fabs(x - b.re_max) < eps)) return true;
        if (in_x && (std::fabs(y - b.im_min) < eps || std::fabs(y - b.im_max) < eps)) return true;
    }
    return false;
}

class Searcher {
public:
    Searcher(const ValueAndDerivative& f, const std::vector<Pole>& poles,
             const RootSearchOptions& o)
        : f_(f), poles_(poles), o_(o) {}

    // Count zeros in b; throws BadBoundary if the boundary is unusable.
    int zeros(const Box& b)
    {
        if (pole_near_boundary(poles_, b, 1e-9 * (1 + b.diameter()))) throw BadBoundary{};
        double w = box_winding(f_, b);
        long r = std::lround(w);
        if (std::fabs(w - double(r)) > 1e-3) throw BadBoundary{};
        return int(r) + enclosed_pole_order(poles_, b);
    }

    void search(const Box& b, int count, std::vector<Root>& out)
    {
        if (count <= 0) return;
        if (++cells_ > o_.max_cells)
            throw Error(ErrorCode::tolerance_not_met, "root search exceeded cell budget");
        if (b.diameter() <= o_.min_diameter) {
            out.push_back(polish(b.center(), count));
            return;
        }
        // Split into quadrants; shift the cut if it grazes a zero or a pole.
        static const double offsets[] = {0.5, 0.5371, 0.4629, 0.5813, 0.4187, 0.6211};
        for (double fx : offsets) {
            double xm = b.re_min + fx * (b.re_max - b.re_min);
            double ym = b.im_min + (1.0 - fx) * (b.im_max - b.im_min);
            Box q[4] = {{b.re_min, xm, b.im_min, ym}, {xm, b.re_max, b.im_min, ym},
                        {b.re_min, xm, ym, b.im_max}, {xm, b.re_max, ym, b.im_max}};
            int n[4];
            try {
                for (int i = 0; i < 4; ++i) n[i] = zeros(q[i]);
            } catch (const BadBoundary&) {
                continue;
            }
            if (n[0] + n[1] + n[2] + n[3] != count) continue;
            for (int i = 0; i < 4; ++i) search(q[i], n[i], out);
            return;
        }
        throw Error(ErrorCode::argument_tracking,
                    "could not place a clean subdivision cut near (" +
                        std::to_string(b.center().real()) + ", " +
                        std::to_string(b.center().imag()) + ")");
    }

    Root polish(cplx z, int multiplicity)
    {
        for (int it = 0; it < o_.max_newton; ++it) {
            auto [v, d] = f_(z);
            if (d == cplx{}) break;
            cplx step = v / d * double(multiplicity);
            z -= step;
            if (std::abs(step) <= o_.newton_tol * std::max(1.0, std::abs(z))) break;
        }
        return {z, multiplicity, std::abs(f_(z).first)};
    }

private:
    const ValueAndDerivative& f_;
    const std::vector<Pole>& poles_;
    RootSearchOptions o_;
    int cells_ = 0;
};

} // namespace

double boundary_winding(const ValueAndDerivative& f, const Box& box)
{
    try {
        return box_winding(f, box);
    } catch (const BadBoundary&) {
        throw Error(ErrorCode::argument_tracking, "zero or pole on the box boundary");
    }
}

std::vector<Root> find_roots(const ValueAndDerivative& f, const Box& box,
                             const std::vector<Pole>& poles, const RootSearchOptions& opts)
{
    if (!(box.re_max > box.re_min && box.im_max > box.im_min))
        throw Error(ErrorCode::invalid_parameter, "empty search box");
    Searcher s(f, poles, opts);
    // Nudge the outer boundary outward if it grazes a zero or a pole.
    Box b = box;
    for (int attempt = 0; attempt < 8; ++attempt) {
        try {
            int n = s.zeros(b);
            std::vector<Root> out;
            s.search(b, n, out);
            return out;
        } catch (const BadBoundary&) {
            double pad = 1e-4 * (attempt + 1) * box.diameter();
            b = {box.re_min - pad, box.re_max + pad * 1.37, box.im_min - pad * 0.71,
                 box.im_max + pad * 1.13};
        }
    }
    throw Error(ErrorCode::argument_tracking, "search box boundary could not be cleared");
}

} // namespace adiabat
