#include "adiabat/stokes.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <queue>

namespace adiabat {

namespace {

const cplx I(0, 1);
constexpr double pi = std::numbers::pi;

bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

// 8-point Gauss-Legendre on [-1, 1]
const double gl_x[4] = {0.1834346424956498, 0.5255324099163290, 0.7966664774136267,
                        0.9602898564975363};
const double gl_w[4] = {0.3626837833783620, 0.3137066458778873, 0.2223810344533745,
                        0.1012285362903763};

} // namespace

std::string_view to_string(LineKind k) { return k == LineKind::stokes ? "stokes" : "anti_stokes"; }

std::string_view to_string(Terminus t)
{
    switch (t) {
    case Terminus::infinity_direction: return "infinity";
    case Terminus::pole: return "pole";
    case Terminus::turning_point: return "turning_point";
    case Terminus::length_limit: return "length_limit";
    }
    return "?";
}

TurningPoint make_turning_point(cplx location, cplx slope, double residual)
{
    TurningPoint tp;
    tp.location = location;
    tp.slope = slope;
    tp.residual = residual;
    double a = std::arg(slope);
    for (int k = 0; k < 3; ++k) {
        tp.stokes_dirs[k] = std::polar(1.0, (2 * pi * k - a) / 3);
        tp.anti_dirs[k] = std::polar(1.0, ((2 * k + 1) * pi - a) / 3);
    }
    return tp;
}

std::vector<TurningPoint> find_turning_points(const EffectivePotential& ep, const Box& box,
                                              const RootSearchOptions& opts)
{
    auto f = [&ep](cplx s) -> std::pair<cplx, cplx> {
        Jet5 q = ep.q0_jet(s);
        return {q[0], q[1]};
    };
    auto roots = find_roots(f, box, ep.poles(), opts);
    // magnitude scale for the derivative check, from a corner clear of poles
    double scale = 1;
    for (cplx z : {cplx(box.re_min, box.im_min), cplx(box.re_max, box.im_max)}) {
        try {
            scale += std::abs(f(z).first);
            break;
        } catch (const Error&) {
        }
    }
    std::vector<TurningPoint> out;
    for (auto& r : roots) {
        if (r.multiplicity != 1)
            throw Error(ErrorCode::multiplicity,
                        "multiple zero of q0 near (" + std::to_string(r.z.real()) + ", " +
                            std::to_string(r.z.imag()) + ")");
        auto [v, d] = f(r.z);
        if (std::abs(d) < 1e-10 * scale)
            throw Error(ErrorCode::multiplicity, "q0' vanishes at a turning point");
        out.push_back(make_turning_point(r.z, d, std::abs(v)));
    }
    std::sort(out.begin(), out.end(), [](const TurningPoint& a, const TurningPoint& b) {
        if (std::fabs(a.location.real() - b.location.real()) > 1e-9)
            return a.location.real() < b.location.real();
        return a.location.imag() < b.location.imag();
    });
    return out;
}

Box default_search_box(const EffectivePotential& ep)
{
    double m = 0;
    try {
        for (auto& tp : find_turning_points(ep, Box{-4, 4, -4, 4}))
            m = std::max(m, std::abs(tp.location));
    } catch (const Error&) {
    }
    double L = 4 * (1 + m);
    return {-L, L, -L, L};
}

// ------------------------------------------------------------------ tracer

namespace {

struct Tracer {
    const ValueAndDerivative& q;
    const std::vector<TurningPoint>& tps;
    const std::vector<Pole>& poles;
    const TraceOptions& o;
    LineKind kind;
    cplx c; // 1 for stokes, i for anti-stokes

    cplx root(cplx s, cplx hint) const
    {
        cplx v = q(s).first;
        if (!finite(v)) throw Error(ErrorCode::step_collapse, "potential singular on a traced line");
        return branch_sqrt(v, hint);
    }

    cplx dir(cplx r) const { return c * std::conj(r) / std::abs(r); }

    // int_a^b sqrt(q) along the chord, roots continued from ra
    cplx chord(cplx a, cplx b, cplx ra) const
    {
        cplx m = (a + b) / 2.0, h = (b - a) / 2.0;
        cplx acc = 0;
        for (int k = 0; k < 4; ++k) {
            acc += gl_w[k] * (root(m - h * gl_x[k], ra) + root(m + h * gl_x[k], ra));
        }
        return acc * h;
    }

    // int_{s0}^{s} sqrt(q) from a simple zero s0; sqrt behaves like v there
    cplx from_zero(cplx s0, cplx s, cplx r_at_s) const
    {
        cplx d = s - s0;
        cplx acc = 0;
        for (int k = 0; k < 4; ++k)
            for (int sgn : {-1, 1}) {
                double v = 0.5 + 0.5 * sgn * gl_x[k];
                acc += gl_w[k] * 0.5 * root(s0 + d * v * v, r_at_s * v) * 2.0 * v;
            }
        return acc * d;
    }

    double residual(cplx W) const { return kind == LineKind::stokes ? W.imag() : W.real(); }
};

bool outside(const Box& b, cplx z)
{
    return z.real() < b.re_min || z.real() > b.re_max || z.imag() < b.im_min || z.imag() > b.im_max;
}

cplx clip_to_box(const Box& b, cplx in, cplx out)
{
    double t = 1.0;
    cplx d = out - in;
    auto upd = [&](double lim, double p0, double dp) {
        if (dp == 0) return;
        double tt = (lim - p0) / dp;
        if (tt >= 0 && tt < t) t = tt;
    };
    if (out.real() < b.re_min) upd(b.re_min, in.real(), d.real());
    if (out.real() > b.re_max) upd(b.re_max, in.real(), d.real());
    if (out.imag() < b.im_min) upd(b.im_min, in.imag(), d.imag());
    if (out.imag() > b.im_max) upd(b.im_max, in.imag(), d.imag());
    return in + t * d;
}

} // namespace

StokesLine trace_line(const ValueAndDerivative& q, const std::vector<TurningPoint>& tps,
                      const std::vector<Pole>& poles, int origin, int direction_index,
                      LineKind kind, const TraceOptions& o)
{
    if (origin < 0 || origin >= int(tps.size()))
        throw Error(ErrorCode::precondition, "no turning point to trace from");
    if (direction_index < 0 || direction_index > 2)
        throw Error(ErrorCode::invalid_parameter, "direction index must be 0, 1 or 2");
    const TurningPoint& tp = tps[std::size_t(origin)];
    if (tp.multiplicity != 1) throw Error(ErrorCode::precondition, "turning point is not simple");
    Tracer tr{q, tps, poles, o, kind, kind == LineKind::stokes ? cplx(1) : I};

    StokesLine line;
    line.origin = origin;
    line.direction_index = direction_index;
    line.kind = kind;
    const cplx s0 = tp.location;
    const cplx e = kind == LineKind::stokes ? tp.stokes_dirs[std::size_t(direction_index)]
                                            : tp.anti_dirs[std::size_t(direction_index)];
    cplx s = s0 + o.initial_offset * e;
    // root with (2/3)(s - s0) sqrt(q) pointing along +1 (stokes) or +i (anti)
    cplx r = std::sqrt(q(s).first);
    if (((s - s0) * r / tr.c).real() < 0) r = -r;
    cplx W = tr.from_zero(s0, s, r);
    // Newton steps across the level set; W(z) is rebuilt by `action`
    auto project = [&](cplx& z, cplx& rz, cplx& Wz, const auto& action) {
        for (int it = 0; it < 4; ++it) {
            double res = tr.residual(Wz);
            if (std::fabs(res) <= 1e-15 * (1 + std::abs(Wz))) break;
            z += kind == LineKind::stokes ? -I * res / rz : -res / rz;
            rz = tr.root(z, rz);
            Wz = action(z, rz);
        }
    };
    project(s, r, W, [&](cplx z, cplx rz) { return tr.from_zero(s0, z, rz); });
    line.points = {s0, s};
    line.arclength = o.initial_offset;
    double h = std::min(o.max_step, o.initial_offset);

    for (;;) {
        if (line.arclength > o.max_length) {
            line.terminus = Terminus::length_limit;
            break;
        }
        cplx k1 = tr.dir(r);
        cplx sp = s + h * k1;
        cplx rp = tr.root(sp, r);
        cplx k2 = tr.dir(rp);
        cplx sn = s + h * (k1 + k2) / 2.0;
        double turn = std::fabs(std::arg(k2 / k1));
        cplx rn = tr.root(sn, r);
        bool ok = turn <= 0.2 && h * turn / 8 <= o.sagitta_tol &&
                  std::abs(rn - r) <= 0.2 * std::abs(r);
        if (!ok) {
            h /= 2;
            if (h < o.min_step) throw Error(ErrorCode::step_collapse, "Stokes-line step collapsed");
            continue;
        }
        // project back onto the level set
        cplx Wn = W + tr.chord(s, sn, r);
        project(sn, rn, Wn, [&](cplx z, cplx) { return W + tr.chord(s, z, r); });
        line.max_drift = std::max(line.max_drift, std::fabs(tr.residual(Wn)));

        if (outside(o.box, sn)) {
            line.points.push_back(clip_to_box(o.box, s, sn));
            line.arclength += std::abs(line.points.back() - s);
            line.terminus = Terminus::infinity_direction;
            break;
        }
        line.arclength += std::abs(sn - s);
        s = sn;
        r = rn;
        W = Wn;
        line.points.push_back(s);

        bool done = false;
        for (std::size_t k = 0; k < poles.size() && !done; ++k)
            if (std::abs(s - poles[k].location) < o.capture_radius) {
                line.points.push_back(poles[k].location);
                line.arclength += std::abs(s - poles[k].location);
                line.terminus = Terminus::pole;
                line.end_index = int(k);
                done = true;
            }
        for (std::size_t j = 0; j < tps.size() && !done; ++j) {
            if (int(j) == origin) continue;
            cplx t = tps[j].location;
            double d = std::abs(s - t);
            if (d < o.capture_radius) {
                line.points.push_back(t);
                line.terminus = Terminus::turning_point;
                line.end_index = int(j);
                done = true;
            } else if (d < 0.02) {
                // the level set through t continues this line if W(t) stays on it
                cplx Wt = W - tr.from_zero(t, s, r);
                double ahead = kind == LineKind::stokes ? Wt.real() - W.real() : Wt.imag() - W.imag();
                if (std::fabs(tr.residual(Wt)) <= 1e-9 * (1 + std::abs(Wt)) && ahead > 0) {
                    // bridge the gap with points on the level set, not one chord
                    const int n = 16;
                    cplx p = s, rp = r, Wp = W;
                    for (int k = 1; k < n; ++k) {
                        cplx z = s + (t - s) * (double(k) / n);
                        cplx rz = tr.root(z, rp);
                        cplx Wz = Wp + tr.chord(p, z, rp);
                        project(z, rz, Wz, [&](cplx y, cplx) { return Wp + tr.chord(p, y, rp); });
                        line.points.push_back(z);
                        p = z;
                        rp = rz;
                        Wp = Wz;
                    }
                    line.points.push_back(t);
                    line.arclength += d;
                    line.terminus = Terminus::turning_point;
                    line.end_index = int(j);
                    done = true;
                }
            }
        }
        if (done) break;
        h = std::min(o.max_step, h * 1.5);
    }
    return line;
}

StokesLine trace_stokes_line(const EffectivePotential& ep, const std::vector<TurningPoint>& tps,
                             int origin, int direction_index, LineKind kind, const TraceOptions& o)
{
    ValueAndDerivative q = [&ep](cplx s) -> std::pair<cplx, cplx> {
        Jet5 j = ep.q0_jet(s);
        return {j[0], j[1]};
    };
    return trace_line(q, tps, ep.poles(), origin, direction_index, kind, o);
}

// ------------------------------------------------------------------- graph

namespace {

int find_conjugate(const std::vector<TurningPoint>& tps, std::size_t i)
{
    for (std::size_t j = 0; j < tps.size(); ++j)
        if (std::abs(tps[j].location - std::conj(tps[i].location)) < 1e-8) return int(j);
    return -1;
}

int find_conjugate_pole(const std::vector<Pole>& poles, int k)
{
    if (k < 0) return -1;
    for (std::size_t j = 0; j < poles.size(); ++j)
        if (std::abs(poles[j].location - std::conj(poles[std::size_t(k)].location)) < 1e-12) return int(j);
    return -1;
}

double signed_area(const std::vector<cplx>& p)
{
    double a = 0;
    for (std::size_t i = 0; i + 1 < p.size(); ++i)
        a += p[i].real() * p[i + 1].imag() - p[i + 1].real() * p[i].imag();
    return a / 2;
}

bool point_in_polygon(cplx z, const std::vector<cplx>& p)
{
    bool in = false;
    for (std::size_t i = 0, j = p.size() - 1; i < p.size(); j = i++) {
        if ((p[i].imag() > z.imag()) != (p[j].imag() > z.imag())) {
            double x = (p[j].real() - p[i].real()) * (z.imag() - p[i].imag()) /
                           (p[j].imag() - p[i].imag()) +
                       p[i].real();
            if (z.real() < x) in = !in;
        }
    }
    return in;
}

// Faces of the planar graph made of the Stokes lines and the box boundary.
std::vector<Sector> enumerate_sectors(const StokesGraph& g)
{
    struct Vertex { cplx z; std::string tag; };
    struct Half { int from, to; std::vector<cplx> pts; int line; double angle; };
    std::vector<Vertex> verts;
    auto vertex = [&](cplx z, const std::string& tag) {
        for (std::size_t i = 0; i < verts.size(); ++i)
            if (verts[i].tag == tag && std::abs(verts[i].z - z) < 1e-9) return int(i);
        verts.push_back({z, tag});
        return int(verts.size() - 1);
    };
    std::vector<Half> half;
    auto add_edge = [&](int a, int b, std::vector<cplx> pts, int line) {
        if (pts.size() < 2) return;
        auto ang = [](cplx from, cplx to) { return std::arg(to - from); };
        std::size_t n = pts.size();
        half.push_back({a, b, pts, line, ang(pts[0], pts[std::min<std::size_t>(1, n - 1)])});
        std::reverse(pts.begin(), pts.end());
        half.push_back({b, a, pts, line, ang(pts[0], pts[std::min<std::size_t>(1, n - 1)])});
    };

    const Box& B = g.box;
    auto perimeter = [&](cplx z) {
        double w = B.re_max - B.re_min, h = B.im_max - B.im_min;
        if (std::fabs(z.imag() - B.im_min) < 1e-9) return z.real() - B.re_min;
        if (std::fabs(z.real() - B.re_max) < 1e-9) return w + z.imag() - B.im_min;
        if (std::fabs(z.imag() - B.im_max) < 1e-9) return w + h + B.re_max - z.real();
        return 2 * w + h + B.im_max - z.imag();
    };
    std::vector<std::pair<double, int>> boundary;
    for (auto c : {cplx(B.re_min, B.im_min), cplx(B.re_max, B.im_min), cplx(B.re_max, B.im_max),
                   cplx(B.re_min, B.im_max)}) {
        int v = vertex(c, "corner");
        boundary.push_back({perimeter(c), v});
    }
    for (std::size_t li = 0; li < g.lines.size(); ++li) {
        const StokesLine& L = g.lines[li];
        if (L.kind != LineKind::stokes) continue;
        if (L.terminus == Terminus::turning_point && L.end_index < L.origin) {
            // keep one copy of a connection traced from both ends
            bool twin = false;
            for (auto& M : g.lines)
                if (M.kind == LineKind::stokes && M.origin == L.end_index &&
                    M.terminus == Terminus::turning_point && M.end_index == L.origin)
                    twin = true;
            if (twin) continue;
        }
        int a = vertex(g.turning_points[std::size_t(L.origin)].location, "tp");
        int b;
        switch (L.terminus) {
        case Terminus::turning_point:
            b = vertex(g.turning_points[std::size_t(L.end_index)].location, "tp");
            break;
        case Terminus::pole:
            b = vertex(g.poles[std::size_t(L.end_index)].location, "pole " + std::to_string(L.end_index));
            break;
        case Terminus::infinity_direction:
            b = vertex(L.points.back(), "exit");
            boundary.push_back({perimeter(L.points.back()), b});
            break;
        default:
            b = vertex(L.points.back(), "free");
        }
        add_edge(a, b, L.points, int(li));
    }
    std::sort(boundary.begin(), boundary.end());
    for (std::size_t i = 0; i < boundary.size(); ++i) {
        auto [p0, v0] = boundary[i];
        auto [p1, v1] = boundary[(i + 1) % boundary.size()];
        if (v0 == v1) continue;
        add_edge(v0, v1, {verts[std::size_t(v0)].z, verts[std::size_t(v1)].z}, -1);
    }

    std::vector<std::vector<int>> out_edges(verts.size());
    for (std::size_t e = 0; e < half.size(); ++e) out_edges[std::size_t(half[e].from)].push_back(int(e));
    for (auto& v : out_edges)
        std::sort(v.begin(), v.end(), [&](int a, int b) { return half[std::size_t(a)].angle < half[std::size_t(b)].angle; });

    auto twin = [](int e) { return e ^ 1; };
    std::vector<char> used(half.size(), 0);
    std::vector<Sector> sectors;
    for (std::size_t e0 = 0; e0 < half.size(); ++e0) {
        if (used[e0]) continue;
        Sector sec;
        std::vector<cplx> poly;
        bool at_infinity = false;
        std::string pole_tag;
        int e = int(e0);
        int guard = 0;
        while (!used[std::size_t(e)] && guard++ < 100000) {
            used[std::size_t(e)] = 1;
            const Half& H = half[std::size_t(e)];
            poly.insert(poly.end(), H.pts.begin(), H.pts.end() - 1);
            if (H.line >= 0) sec.lines.push_back(H.line);
            else at_infinity = true;
            const std::string& tag = verts[std::size_t(H.to)].tag;
            if (tag.rfind("pole", 0) == 0) pole_tag = tag;
            // next edge: first one clockwise from the twin at the head vertex
            const auto& outs = out_edges[std::size_t(H.to)];
            int tw = twin(e);
            std::size_t pos = std::size_t(std::find(outs.begin(), outs.end(), tw) - outs.begin());
            e = outs[(pos + outs.size() - 1) % outs.size()];
        }
        if (poly.size() < 3) continue;
        poly.push_back(poly.front());
        if (signed_area(poly) <= 0) continue; // the unbounded outside face
        std::sort(sec.lines.begin(), sec.lines.end());
        sec.lines.erase(std::unique(sec.lines.begin(), sec.lines.end()), sec.lines.end());
        sec.singular_point = !pole_tag.empty() ? pole_tag : (at_infinity ? "infinity" : "none");
        sec.contains_origin = point_in_polygon(0.0, poly);
        sec.polygon = std::move(poly);
        sectors.push_back(std::move(sec));
    }
    return sectors;
}

} // namespace

StokesGraph build_graph(const EffectivePotential& ep, const Box& box, const GraphOptions& opts)
{
    StokesGraph g;
    g.box = box;
    g.poles = ep.poles();
    g.turning_points = find_turning_points(ep, box);
    TraceOptions to = opts.trace;
    to.box = box;
    const auto& tps = g.turning_points;
    std::vector<LineKind> kinds{LineKind::stokes};
    if (opts.anti_stokes) kinds.push_back(LineKind::anti_stokes);

    std::vector<std::vector<StokesLine>> per_tp(tps.size());
    auto trace_all = [&](std::size_t i) {
        for (auto k : kinds)
            for (int d = 0; d < 3; ++d)
                per_tp[i].push_back(trace_stokes_line(ep, tps, int(i), d, k, to));
    };
    for (std::size_t i = 0; i < tps.size(); ++i)
        if (!opts.enforce_symmetry || tps[i].location.imag() >= 0 || find_conjugate(tps, i) < 0)
            trace_all(i);
    if (opts.enforce_symmetry)
        for (std::size_t i = 0; i < tps.size(); ++i) {
            if (tps[i].location.imag() >= 0) continue;
            int j = find_conjugate(tps, i);
            if (j < 0) continue;
            for (const StokesLine& L : per_tp[std::size_t(j)]) {
                StokesLine M = L;
                M.origin = int(i);
                M.direction_index = (3 - L.direction_index) % 3;
                for (auto& z : M.points) z = std::conj(z);
                if (L.terminus == Terminus::turning_point)
                    M.end_index = find_conjugate(tps, std::size_t(L.end_index));
                else if (L.terminus == Terminus::pole)
                    M.end_index = find_conjugate_pole(g.poles, L.end_index);
                per_tp[i].push_back(std::move(M));
            }
        }
    for (auto& v : per_tp)
        for (auto& L : v) g.lines.push_back(std::move(L));
    g.sectors = enumerate_sectors(g);
    return g;
}

// -------------------------------------------------------------- NED chain

namespace {

enum class Side { none, left, right, top, bottom };

Side exit_side(const StokesGraph& g, const StokesLine& L)
{
    if (L.terminus != Terminus::infinity_direction) return Side::none;
    cplx z = L.points.back();
    const Box& b = g.box;
    double tol = 1e-9 * (1 + b.diameter());
    if (std::fabs(z.real() - b.re_min) < tol) return Side::left;
    if (std::fabs(z.real() - b.re_max) < tol) return Side::right;
    if (std::fabs(z.imag() - b.im_max) < tol) return Side::top;
    return Side::bottom;
}

// Height of the polyline above x (the crossing nearest the real axis).
std::optional<double> height_at(const std::vector<cplx>& poly, double x, bool upper)
{
    std::optional<double> best;
    for (std::size_t i = 0; i + 1 < poly.size(); ++i) {
        double x0 = poly[i].real(), x1 = poly[i + 1].real();
        if ((x0 - x) * (x1 - x) > 0 || x0 == x1) continue;
        double t = (x - x0) / (x1 - x0);
        double y = poly[i].imag() + t * (poly[i + 1].imag() - poly[i].imag());
        if (!best || (upper ? y < *best : y > *best)) best = y;
    }
    return best;
}

struct ChainFound {
    std::vector<int> tps;
    std::vector<cplx> boundary;
    double height;
};

std::optional<ChainFound> find_chain(const StokesGraph& g, bool upper)
{
    const auto& tps = g.turning_points;
    auto in_half = [&](int i) {
        double y = tps[std::size_t(i)].location.imag();
        return upper ? y > 0 : y < 0;
    };
    std::map<int, std::vector<std::pair<int, const StokesLine*>>> adj;
    std::map<int, const StokesLine*> left_exit, right_exit;
    for (auto& L : g.lines) {
        if (L.kind != LineKind::stokes || !in_half(L.origin)) continue;
        Side s = exit_side(g, L);
        if (s == Side::left && !left_exit.count(L.origin)) left_exit[L.origin] = &L;
        if (s == Side::right && !right_exit.count(L.origin)) right_exit[L.origin] = &L;
        if (L.terminus == Terminus::turning_point && in_half(L.end_index)) {
            adj[L.origin].push_back({L.end_index, &L});
        }
    }
    std::optional<ChainFound> best;
    for (auto& [a, lline] : left_exit) {
        // BFS from a through connections to any tp with a right exit
        std::map<int, std::pair<int, const StokesLine*>> prev;
        std::queue<int> qu;
        qu.push(a);
        prev[a] = {-1, nullptr};
        while (!qu.empty()) {
            int u = qu.front();
            qu.pop();
            if (right_exit.count(u)) {
                ChainFound c;
                std::vector<std::pair<int, const StokesLine*>> rev;
                for (int v = u; v != -1; v = prev[v].first) rev.push_back({v, prev[v].second});
                std::reverse(rev.begin(), rev.end());
                std::vector<cplx> poly(lline->points.rbegin(), lline->points.rend());
                for (auto& [v, via] : rev) {
                    c.tps.push_back(v);
                    if (via) {
                        // orient the connecting line from the previous tp to v
                        std::vector<cplx> pts = via->points;
                        if (via->origin == v) std::reverse(pts.begin(), pts.end());
                        poly.insert(poly.end(), pts.begin() + 1, pts.end());
                    }
                }
                const StokesLine* rl = right_exit.at(u);
                poly.insert(poly.end(), rl->points.begin() + 1, rl->points.end());
                c.boundary = poly;
                double hsum = 0;
                for (int v : c.tps) hsum += std::fabs(tps[std::size_t(v)].location.imag());
                c.height = hsum / double(c.tps.size());
                if (!best || c.height < best->height) best = c;
                break;
            }
            auto it = adj.find(u);
            if (it == adj.end()) continue;
            for (auto& [v, via] : it->second)
                if (!prev.count(v)) {
                    prev[v] = {u, via};
                    qu.push(v);
                }
        }
    }
    if (!best) return best;
    // the strip between the chain and the real axis must be empty
    for (std::size_t i = 0; i < tps.size(); ++i) {
        if (!in_half(int(i))) continue;
        if (std::find(best->tps.begin(), best->tps.end(), int(i)) != best->tps.end()) continue;
        auto h = height_at(best->boundary, tps[i].location.real(), upper);
        if (h && (upper ? tps[i].location.imag() < *h : tps[i].location.imag() > *h))
            return std::nullopt;
    }
    for (auto z : best->boundary)
        if (upper ? z.imag() <= 0 : z.imag() >= 0) return std::nullopt;
    std::sort(best->tps.begin(), best->tps.end(), [&](int a, int b) {
        cplx za = tps[std::size_t(a)].location, zb = tps[std::size_t(b)].location;
        if (std::fabs(za.real() - zb.real()) > 1e-12) return za.real() < zb.real();
        return za.imag() < zb.imag();
    });
    return best;
}

} // namespace

bool NedChain::in_strip(cplx z) const
{
    // Past the traced ends the boundary lines have left for infinity, so the
    // strip is unbounded on that side. Points on a boundary are outside.
    auto hu = height_at(upper_boundary, z.real(), true);
    auto hl = height_at(lower_boundary, z.real(), false);
    const double eps = 1e-9;
    bool below_upper = !hu || z.imag() < *hu - eps * (1 + std::fabs(*hu));
    bool above_lower = !hl || z.imag() > *hl + eps * (1 + std::fabs(*hl));
    return below_upper && above_lower;
}

NedChain identify_ned_chain(const StokesGraph& g)
{
    auto up = find_chain(g, true);
    auto lo = find_chain(g, false);
    if (!up || !lo)
        throw Error(ErrorCode::structure_not_ned,
                    "no central strip bounded by two infinite Stokes lines was found");
    NedChain c;
    c.upper = up->tps;
    c.lower = lo->tps;
    c.lower_first = lo->tps.front();
    for (int i : c.upper) c.upper_points.push_back(g.turning_points[std::size_t(i)].location);
    for (int i : c.lower) c.lower_points.push_back(g.turning_points[std::size_t(i)].location);
    c.upper_boundary = up->boundary;
    c.lower_boundary = lo->boundary;
    return c;
}

namespace {

// Segments of a polyline set bucketed on a uniform grid for nearest-segment
// queries; a polyline of one point is a degenerate segment.
class SegmentGrid {
public:
    explicit SegmentGrid(const std::vector<std::vector<cplx>>& lines)
    {
        for (const auto& line : lines) {
            if (line.size() == 1) segs_.push_back({line[0], line[0]});
            for (std::size_t i = 0; i + 1 < line.size(); ++i) segs_.push_back({line[i], line[i + 1]});
        }
        if (segs_.empty()) return;
        double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
        for (auto& [u, v] : segs_) {
            x0 = std::min({x0, u.real(), v.real()});
            x1 = std::max({x1, u.real(), v.real()});
            y0 = std::min({y0, u.imag(), v.imag()});
            y1 = std::max({y1, u.imag(), v.imag()});
        }
        origin_ = {x0, y0};
        double span = std::max({x1 - x0, y1 - y0, 1e-12});
        n_ = std::clamp(int(std::sqrt(double(segs_.size()))), 1, 1024);
        h_ = span / n_ * (1 + 1e-9);
        cells_.assign(std::size_t(n_) * std::size_t(n_), {});
        for (std::size_t k = 0; k < segs_.size(); ++k) {
            auto [u, v] = segs_[k];
            int i0 = cell(std::min(u.real(), v.real()) - x0), i1 = cell(std::max(u.real(), v.real()) - x0);
            int j0 = cell(std::min(u.imag(), v.imag()) - y0), j1 = cell(std::max(u.imag(), v.imag()) - y0);
            for (int i = i0; i <= i1; ++i)
                for (int j = j0; j <= j1; ++j) cells_[std::size_t(i) * std::size_t(n_) + std::size_t(j)].push_back(k);
        }
    }

    double nearest(cplx p) const
    {
        if (segs_.empty()) return INFINITY;
        // unclamped cell of p; rings grow until no closer segment can exist
        long ci = long(std::floor((p.real() - origin_.real()) / h_));
        long cj = long(std::floor((p.imag() - origin_.imag()) / h_));
        long far = std::max({std::labs(ci), std::labs(ci - n_), std::labs(cj), std::labs(cj - n_)}) + 1;
        double best = INFINITY;
        for (long k = 0; k <= far; ++k) {
            for (long i = ci - k; i <= ci + k; ++i)
                for (long j = cj - k; j <= cj + k; ++j) {
                    if (std::max(std::labs(i - ci), std::labs(j - cj)) != k) continue;
                    if (i < 0 || j < 0 || i >= n_ || j >= n_) continue;
                    for (std::size_t s : cells_[std::size_t(i) * std::size_t(n_) + std::size_t(j)])
                        best = std::min(best, distance(p, segs_[s].first, segs_[s].second));
                }
            if (best <= double(k) * h_) break;
        }
        return best;
    }

private:
    int cell(double d) const { return std::clamp(int(d / h_), 0, n_ - 1); }

    static double distance(cplx p, cplx u, cplx v)
    {
        cplx d = v - u;
        double L2 = std::norm(d);
        double t = L2 > 0 ? std::clamp(((p - u) * std::conj(d)).real() / L2, 0.0, 1.0) : 0.0;
        return std::abs(p - (u + t * d));
    }

    std::vector<std::pair<cplx, cplx>> segs_;
    std::vector<std::vector<std::size_t>> cells_;
    cplx origin_;
    double h_ = 1;
    int n_ = 1;
};

} // namespace

double hausdorff_distance(const std::vector<std::vector<cplx>>& a,
                          const std::vector<std::vector<cplx>>& b)
{
    auto directed = [](const std::vector<std::vector<cplx>>& x, const std::vector<std::vector<cplx>>& y) {
        SegmentGrid grid(y);
        double worst = 0;
        for (auto& line : x)
            for (auto p : line) worst = std::max(worst, grid.nearest(p));
        return worst;
    };
    return std::max(directed(a, b), directed(b, a));
}

std::string graph_to_json(const StokesGraph& g, const std::optional<NedChain>& chain)
{
    using nlohmann::json;
    auto pt = [](cplx z) { return json::array({z.real(), z.imag()}); };
    json j;
    j["schema_version"] = 1;
    j["box"] = {{"re_min", g.box.re_min}, {"re_max", g.box.re_max},
                {"im_min", g.box.im_min}, {"im_max", g.box.im_max}};
    j["turning_points"] = json::array();
    for (auto& tp : g.turning_points)
        j["turning_points"].push_back({{"location", pt(tp.location)}, {"residual", tp.residual},
                                       {"multiplicity", tp.multiplicity}});
    j["poles"] = json::array();
    for (auto& p : g.poles) j["poles"].push_back({{"location", pt(p.location)}, {"order", p.order}});
    j["lines"] = json::array();
    for (auto& L : g.lines) {
        json pts = json::array();
        for (auto z : L.points) pts.push_back(pt(z));
        j["lines"].push_back({{"origin", L.origin}, {"direction", L.direction_index},
                              {"kind", std::string(to_string(L.kind))},
                              {"terminus", std::string(to_string(L.terminus))},
                              {"end_index", L.end_index}, {"max_drift", L.max_drift},
                              {"points", pts}});
    }
    j["sectors"] = json::array();
    for (auto& s : g.sectors)
        j["sectors"].push_back({{"lines", s.lines}, {"singular_point", s.singular_point},
                                {"contains_origin", s.contains_origin}});
    if (chain) {
        j["chain"] = {{"lower_first", chain->lower_first}, {"upper", chain->upper},
                      {"lower", chain->lower}};
    }
    return j.dump(1);
}

} // namespace adiabat
