#include "adiabat/contours.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>

namespace adiabat {

namespace {

const cplx I(0, 1);
constexpr double pi = std::numbers::pi;

bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

double point_segment_distance(cplx p, cplx a, cplx b)
{
    cplx d = b - a;
    double L2 = std::norm(d);
    if (L2 == 0) return std::abs(p - a);
    double t = std::clamp(((p - a) * std::conj(d)).real() / L2, 0.0, 1.0);
    return std::abs(p - (a + t * d));
}

double polyline_distance(cplx p, const std::vector<cplx>& pts)
{
    double best = INFINITY;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
        best = std::min(best, point_segment_distance(p, pts[i], pts[i + 1]));
    if (pts.size() == 1) best = std::abs(p - pts[0]);
    return best;
}

} // namespace

// ------------------------------------------------------------------ paths

ContourPath ContourPath::segment(cplx a, cplx b)
{
    ContourPath p;
    p.points = {a, b};
    return p;
}

double ContourPath::length() const
{
    double L = 0;
    for (std::size_t i = 0; i + 1 < points.size(); ++i) L += std::abs(points[i + 1] - points[i]);
    return L;
}

ContourPath ContourPath::reversed() const
{
    ContourPath p = *this;
    std::reverse(p.points.begin(), p.points.end());
    std::swap(p.start_tag, p.end_tag);
    return p;
}

ContourPath ContourPath::conjugated() const
{
    ContourPath p = *this;
    for (auto& z : p.points) z = std::conj(z);
    for (auto& z : p.obstacles) z = std::conj(z);
    return p;
}

ContourPath ContourPath::refined(int k) const
{
    if (k <= 1 || points.size() < 2) return *this;
    ContourPath p = *this;
    p.points.clear();
    for (std::size_t i = 0; i + 1 < points.size(); ++i)
        for (int j = 0; j < k; ++j)
            p.points.push_back(points[i] + (points[i + 1] - points[i]) * (double(j) / k));
    p.points.push_back(points.back());
    return p;
}

double ContourPath::min_obstacle_distance() const
{
    double best = INFINITY;
    for (auto o : obstacles) best = std::min(best, polyline_distance(o, points));
    return best;
}

ContourPath build_avoiding_path(cplx from, cplx to, const std::vector<cplx>& obstacles,
                                double clearance, DetourSide side)
{
    if (!(clearance > 0)) throw Error(ErrorCode::invalid_parameter, "clearance must be positive");
    for (auto o : obstacles)
        if (std::abs(o - from) < clearance || std::abs(o - to) < clearance)
            throw Error(ErrorCode::endpoint_too_close, "path endpoint lies within clearance of an obstacle");
    ContourPath path;
    path.obstacles = obstacles;
    path.clearance = clearance;
    const double L = std::abs(to - from);
    if (L == 0) {
        path.points = {from, to};
        return path;
    }
    const cplx u = (to - from) / L;
    cplx n = I * u;
    if (n.imag() < 0 || (n.imag() == 0 && side == DetourSide::lower)) n = -n;
    if (side == DetourSide::lower && n.imag() != 0) n = -n;

    struct Arc { double t, R; };
    std::vector<Arc> arcs;
    auto local = [&](cplx o) { return (o - from) * std::conj(u); }; // (along, across)
    for (auto o : obstacles) {
        cplx w = local(o);
        if (std::fabs(w.imag()) < clearance && w.real() > -clearance && w.real() < L + clearance)
            arcs.push_back({w.real(), 2 * clearance});
    }

    auto build = [&]() {
        std::vector<cplx> pts{from};
        for (auto& a : arcs) {
            int m = std::max(16, int(std::ceil(pi * a.R / (0.1 * clearance))));
            cplx c = from + a.t * u;
            for (int k = 0; k <= m; ++k) {
                double th = pi * k / m;
                pts.push_back(c - a.R * std::cos(th) * u + a.R * std::sin(th) * n);
            }
        }
        pts.push_back(to);
        return pts;
    };

    for (int iter = 0; iter < 200; ++iter) {
        std::sort(arcs.begin(), arcs.end(), [](const Arc& a, const Arc& b) { return a.t < b.t; });
        std::vector<Arc> merged;
        for (auto& a : arcs) {
            if (!merged.empty() && a.t - a.R < merged.back().t + merged.back().R) {
                double lo = std::min(merged.back().t - merged.back().R, a.t - a.R);
                double hi = std::max(merged.back().t + merged.back().R, a.t + a.R);
                merged.back() = {(lo + hi) / 2, (hi - lo) / 2};
            } else {
                merged.push_back(a);
            }
        }
        arcs = merged;
        for (auto& a : arcs)
            if (a.t - a.R < 0 || a.t + a.R > L)
                throw Error(ErrorCode::endpoint_too_close,
                            "detour around an obstacle would pass beyond a path endpoint");
        auto pts = build();
        bool clean = true;
        for (auto o : obstacles) {
            if (polyline_distance(o, pts) >= clearance) continue;
            clean = false;
            double t = local(o).real();
            bool grown = false;
            for (auto& a : arcs)
                if (t >= a.t - a.R - clearance && t <= a.t + a.R + clearance) {
                    a.R *= 1.25;
                    grown = true;
                    break;
                }
            if (!grown) arcs.push_back({t, 2 * clearance});
        }
        if (clean) {
            path.points = std::move(pts);
            return path;
        }
    }
    throw Error(ErrorCode::endpoint_too_close, "could not clear obstacles with detours");
}

ContourPath stadium_around(cplx a, cplx b, double r, int arc_points)
{
    if (!(r > 0)) throw Error(ErrorCode::invalid_parameter, "stadium radius must be positive");
    cplx d = b - a;
    if (std::abs(d) == 0) throw Error(ErrorCode::invalid_parameter, "degenerate stadium");
    cplx u = d / std::abs(d), n = I * u;
    ContourPath p;
    p.closed = true;
    p.points.push_back(a + r * n);
    p.points.push_back(b + r * n);
    for (int k = 1; k < arc_points; ++k) {
        double th = pi * k / arc_points;
        p.points.push_back(b + r * (std::cos(th) * n + std::sin(th) * u));
    }
    p.points.push_back(b - r * n);
    p.points.push_back(a - r * n);
    for (int k = 1; k < arc_points; ++k) {
        double th = pi * k / arc_points;
        p.points.push_back(a + r * (-std::cos(th) * n - std::sin(th) * u));
    }
    p.points.push_back(p.points.front());
    return p;
}

// ------------------------------------------------------ branch continuation

namespace {

using Roots = std::array<cplx, 2>;

struct TrackPoint {
    double tau; // segment index + local parameter
    cplx s;
    Roots r;
};

Roots pick(const BranchedFunction& f, const Roots& rad, const Roots& hint)
{
    Roots out{};
    for (int k = 0; k < f.n_roots; ++k) out[k] = branch_sqrt(rad[k], hint[k]);
    return out;
}

Roots radicands_at(const BranchedFunction& f, cplx s)
{
    Roots rad = f.radicands(s);
    for (int k = 0; k < f.n_roots; ++k)
        if (!finite(rad[k])) throw Error(ErrorCode::singularity_on_path, "radicand singular on path");
    return rad;
}

// Continue roots from a to b; appends accepted points (excluding a).
void walk(const BranchedFunction& f, cplx a, cplx b, double tau0, double tau1, Roots r,
          std::vector<TrackPoint>& out)
{
    const double len = std::abs(b - a);
    double t = 0, h = 1.0 / 16;
    const double hmin = 1e-13 * std::max(1.0, std::abs(a) + std::abs(b)) / std::max(len, 1e-300);
    while (t < 1.0) {
        double tn = std::min(1.0, t + h);
        cplx s = a + (b - a) * tn;
        Roots rad = radicands_at(f, s);
        Roots rn = pick(f, rad, r);
        bool ok = true;
        for (int k = 0; k < f.n_roots; ++k) {
            double scale = std::max(std::abs(rn[k]), std::abs(r[k]));
            if (std::abs(rn[k] - r[k]) > 0.25 * scale + 1e-300) ok = false;
        }
        if (!ok && h > hmin) {
            h /= 2;
            continue;
        }
        t = tn;
        r = rn;
        out.push_back({tau0 + (tau1 - tau0) * t, s, r});
        h = std::min(h * 1.6, 0.25);
    }
}

struct Track {
    std::vector<TrackPoint> pts; // sorted by tau

    Roots hint(double tau) const
    {
        auto it = std::lower_bound(pts.begin(), pts.end(), tau,
                                   [](const TrackPoint& p, double x) { return p.tau < x; });
        if (it == pts.begin()) return it->r;
        if (it == pts.end()) return pts.back().r;
        const TrackPoint& hi = *it;
        const TrackPoint& lo = *(it - 1);
        double w = (hi.tau > lo.tau) ? (tau - lo.tau) / (hi.tau - lo.tau) : 0.0;
        Roots out;
        for (int k = 0; k < 2; ++k) out[k] = lo.r[k] + w * (hi.r[k] - lo.r[k]);
        return out;
    }
};

// Choose an anchor on the path where the branch is well defined: the
// candidate closest to the real axis that is not a tagged turning point.
std::pair<double, cplx> anchor_point(const ContourPath& path)
{
    std::vector<std::pair<double, cplx>> cand;
    const std::size_t nseg = path.points.size() - 1;
    for (std::size_t i = 0; i < nseg; ++i) {
        cplx a = path.points[i], b = path.points[i + 1];
        for (int j = 0; j < 8; ++j) {
            double t = j / 8.0;
            if (i == 0 && j == 0 && path.start_tag == EndpointTag::turning_point) continue;
            cand.push_back({double(i) + t, a + (b - a) * t});
        }
        // real-axis crossing
        if ((a.imag() < 0 && b.imag() > 0) || (a.imag() > 0 && b.imag() < 0)) {
            double t = a.imag() / (a.imag() - b.imag());
            cand.push_back({double(i) + t, a + (b - a) * t});
        }
    }
    if (path.end_tag != EndpointTag::turning_point) cand.push_back({double(nseg), path.points.back()});
    // stay clear of tagged turning points: continuing the root from the real
    // axis to a point right next to a zero is unreliable
    std::vector<cplx> tps;
    if (path.start_tag == EndpointTag::turning_point) tps.push_back(path.points.front());
    if (path.end_tag == EndpointTag::turning_point) tps.push_back(path.points.back());
    auto clear = [&](cplx z) {
        for (cplx t : tps)
            if (std::abs(z - t) < 0.1) return false;
        return true;
    };
    std::vector<std::pair<double, cplx>> kept;
    for (auto& c : cand)
        if (clear(c.second)) kept.push_back(c);
    if (kept.empty()) kept = cand;
    auto best = kept.front();
    for (auto& c : kept)
        if (std::fabs(c.second.imag()) < std::fabs(best.second.imag()) - 1e-14) best = c;
    return best;
}

cplx path_point(const ContourPath& path, double tau)
{
    std::size_t nseg = path.points.size() - 1;
    std::size_t i = std::min<std::size_t>(std::size_t(std::floor(tau)), nseg - 1);
    double t = tau - double(i);
    return path.points[i] + (path.points[i + 1] - path.points[i]) * t;
}

Track build_track(const ContourPath& path, const BranchedFunction& f, double tau_anchor, Roots r0)
{
    Track tr;
    const std::size_t nseg = path.points.size() - 1;
    cplx s0 = path_point(path, tau_anchor);
    // backward to the start
    std::vector<TrackPoint> back;
    {
        Roots r = r0;
        double tau = tau_anchor;
        cplx s = s0;
        long i = long(std::min<std::size_t>(std::size_t(std::floor(tau_anchor)), nseg - 1));
        for (; i >= 0; --i) {
            double ta = double(i);
            if (tau <= ta) continue;
            cplx a = path.points[std::size_t(i)];
            std::vector<TrackPoint> seg;
            walk(f, s, a, tau, ta, r, seg);
            if (!seg.empty()) r = seg.back().r;
            back.insert(back.end(), seg.begin(), seg.end());
            tau = ta;
            s = a;
        }
    }
    std::reverse(back.begin(), back.end());
    tr.pts = std::move(back);
    tr.pts.push_back({tau_anchor, s0, r0});
    {
        Roots r = r0;
        double tau = tau_anchor;
        cplx s = s0;
        for (std::size_t i = std::size_t(std::floor(tau_anchor)); i < nseg; ++i) {
            double tb = double(i + 1);
            if (tau >= tb) continue;
            cplx b = path.points[i + 1];
            std::vector<TrackPoint> seg;
            walk(f, s, b, tau, tb, r, seg);
            if (!seg.empty()) r = seg.back().r;
            tr.pts.insert(tr.pts.end(), seg.begin(), seg.end());
            tau = tb;
            s = b;
        }
    }
    return tr;
}

} // namespace

std::array<cplx, 2> physical_roots(const BranchedFunction& f, cplx s)
{
    cplx x = s.real();
    Roots rad = radicands_at(f, x);
    Roots r{};
    for (int k = 0; k < f.n_roots; ++k) r[k] = std::sqrt(rad[k]);
    if (s.imag() == 0) return r;
    std::vector<TrackPoint> pts;
    walk(f, x, s, 0, 1, r, pts);
    return pts.back().r;
}

std::vector<std::array<cplx, 2>> continue_roots(const ContourPath& path, const BranchedFunction& f,
                                                std::array<cplx, 2> start)
{
    Track tr = build_track(path, f, 0.0, start);
    std::vector<std::array<cplx, 2>> out;
    for (std::size_t i = 0; i < path.points.size(); ++i) out.push_back(tr.hint(double(i)));
    return out;
}

// ------------------------------------------------------------- quadrature

namespace {

const double xgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                       0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                       0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                       0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
const double wgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                       0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                       0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                       0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
const double wg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                      0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Interval {
    std::size_t seg;
    double a, b;
    cplx value;
    double err;
    bool operator<(const Interval& o) const { return err < o.err; }
};

// Map v in [0,1] to the segment parameter t; smooth where the endpoint is a
// simple zero of the radicand (u^2 = s - s0 there).
struct SegMap {
    bool sing_a = false, sing_b = false;
    void eval(double v, double& t, double& dt) const
    {
        if (sing_a && sing_b) {
            t = v * v * (3 - 2 * v);
            dt = 6 * v * (1 - v);
        } else if (sing_a) {
            t = v * v;
            dt = 2 * v;
        } else if (sing_b) {
            t = 1 - (1 - v) * (1 - v);
            dt = 2 * (1 - v);
        } else {
            t = v;
            dt = 1;
        }
    }
};

} // namespace

ActionValue action_integral(const ContourPath& path, const BranchedFunction& f,
                            const ActionOptions& opts)
{
    if (path.points.size() < 2) throw Error(ErrorCode::invalid_parameter, "path needs two points");
    const std::size_t nseg = path.points.size() - 1;
    Track track;
    if (f.n_roots > 0) {
        if (opts.start_roots) {
            track = build_track(path, f, 0.0, *opts.start_roots);
        } else {
            auto [tau, s] = anchor_point(path);
            track = build_track(path, f, tau, physical_roots(f, s));
        }
    }
    std::vector<SegMap> maps(nseg);
    maps.front().sing_a = path.start_tag == EndpointTag::turning_point;
    maps.back().sing_b = path.end_tag == EndpointTag::turning_point;

    int evals = 0;
    auto integrand = [&](std::size_t seg, double v) -> cplx {
        double t, dt;
        maps[seg].eval(v, t, dt);
        cplx a = path.points[seg], b = path.points[seg + 1];
        cplx s = a + (b - a) * t;
        Roots roots{};
        if (f.n_roots > 0) {
            Roots rad = radicands_at(f, s);
            roots = pick(f, rad, track.hint(double(seg) + t));
        }
        cplx val;
        try {
            val = f.value(s, roots);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::pole_at_point || e.code() == ErrorCode::branch_ambiguity)
                throw Error(ErrorCode::singularity_on_path, e.what());
            throw;
        }
        ++evals;
        if (dt == 0.0) return 0.0;
        cplx r = val * (b - a) * dt;
        if (!finite(r)) throw Error(ErrorCode::singularity_on_path, "integrand not finite on path");
        return r;
    };
    auto gk = [&](std::size_t seg, double a, double b) {
        double c = (a + b) / 2, h = (b - a) / 2;
        cplx fc = integrand(seg, c);
        cplx rk = fc * wgk[7], rg = fc * wg[3];
        for (int j = 0; j < 7; ++j) {
            cplx f1 = integrand(seg, c - h * xgk[j]);
            cplx f2 = integrand(seg, c + h * xgk[j]);
            rk += (f1 + f2) * wgk[j];
            if (j % 2 == 1) rg += (f1 + f2) * wg[j / 2];
        }
        Interval iv{seg, a, b, rk * h, std::abs((rk - rg) * h)};
        return iv;
    };

    std::priority_queue<Interval> heap;
    cplx total = 0;
    double err = 0;
    for (std::size_t s = 0; s < nseg; ++s)
        for (int k = 0; k < 2; ++k) {
            Interval iv = gk(s, k / 2.0, (k + 1) / 2.0);
            total += iv.value;
            err += iv.err;
            heap.push(iv);
        }
    int n = int(heap.size());
    while (err > std::max(opts.abs_tol, opts.rel_tol * std::abs(total))) {
        if (n >= opts.max_intervals)
            throw Error(ErrorCode::tolerance_not_met,
                        "action integral did not converge (error " + std::to_string(err) + ")");
        Interval iv = heap.top();
        heap.pop();
        double m = (iv.a + iv.b) / 2;
        Interval l = gk(iv.seg, iv.a, m), r = gk(iv.seg, m, iv.b);
        total += l.value + r.value - iv.value;
        err += l.err + r.err - iv.err;
        heap.push(l);
        heap.push(r);
        ++n;
    }
    // recompute the sum to shed accumulated rounding from the updates
    cplx sum = 0;
    double esum = 0;
    while (!heap.empty()) {
        sum += heap.top().value;
        esum += heap.top().err;
        heap.pop();
    }
    return {sum, esum, IntegrandTag::custom, evals};
}

BranchedFunction make_integrand(const EffectivePotential& ep, IntegrandTag tag, double T)
{
    const FieldProfile& field = ep.field();
    const double mu = field.mu();
    BranchedFunction f;
    f.n_roots = 1;
    auto B2 = [&field](cplx s) -> Roots {
        Vec3c B = field.components(s);
        return {B[0] * B[0] + B[1] * B[1] + B[2] * B[2], 0.0};
    };
    switch (tag) {
    case IntegrandTag::mu_T_B:
        f.radicands = B2;
        f.value = [mu, T](cplx, const Roots& r) { return mu * T * r[0]; };
        break;
    case IntegrandTag::phidot_cos_theta:
        f.radicands = B2;
        f.value = [&field](cplx s, const Roots& r) -> cplx {
            JetVec j = field.jets(s, 1);
            cplx rho2 = j[0][0] * j[0][0] + j[1][0] * j[1][0];
            if (std::abs(rho2) < 1e-300) return 0.0;
            cplx num = j[0][0] * j[1][1] - j[1][0] * j[0][1];
            if (num == cplx{}) return 0.0;
            return num / rho2 * j[2][0] / r[0];
        };
        break;
    case IntegrandTag::thetadot_over_sin:
        f.radicands = B2;
        f.value = [&field](cplx s, const Roots& r) -> cplx {
            JetVec j = field.jets(s, 1);
            cplx rho2 = j[0][0] * j[0][0] + j[1][0] * j[1][0];
            cplx b2 = j[0][0] * j[0][0] + j[1][0] * j[1][0] + j[2][0] * j[2][0];
            cplx bdb = j[0][0] * j[0][1] + j[1][0] * j[1][1] + j[2][0] * j[2][1];
            if (std::abs(rho2) < 1e-300) return 0.0;
            return (j[2][0] * bdb - b2 * j[2][1]) / (r[0] * rho2);
        };
        break;
    case IntegrandTag::sqrt_q2:
        f.radicands = [&ep, T](cplx s) -> Roots { return {ep.eval_q2(s, T), 0.0}; };
        f.value = [](cplx, const Roots& r) { return r[0]; };
        break;
    case IntegrandTag::sqrt_q0:
        f.radicands = [&ep](cplx s) -> Roots { return {ep.eval_q0(s), 0.0}; };
        f.value = [](cplx, const Roots& r) { return r[0]; };
        break;
    case IntegrandTag::custom:
        throw Error(ErrorCode::invalid_parameter, "custom integrands are built by the caller");
    }
    return f;
}

ActionValue action_integral(const EffectivePotential& ep, const ContourPath& path,
                            IntegrandTag tag, double T, const ActionOptions& opts)
{
    BranchedFunction f = make_integrand(ep, tag, T);
    ActionValue v = action_integral(path, f, opts);
    v.tag = tag;
    return v;
}

// ---------------------------------------------------------------- winding

namespace {

WindingResult wind_samples(const std::vector<std::pair<cplx, cplx>>& samples)
{
    double total = 0;
    for (std::size_t i = 0; i + 1 < samples.size(); ++i)
        total += std::arg(samples[i + 1].second / samples[i].second);
    double turns = total / (2 * pi);
    long n = std::lround(turns);
    if (std::fabs(turns - double(n)) > 1e-3)
        throw Error(ErrorCode::argument_tracking,
                    "argument change is not an integer number of turns: " + std::to_string(turns));
    return {int(n), turns, int(samples.size())};
}

// Refine a sampled closed curve until consecutive F values turn by < 0.3 rad.
template <class Eval>
std::vector<std::pair<cplx, cplx>> refine_samples(std::vector<std::pair<double, cplx>> params,
                                                  Eval&& eval)
{
    std::vector<std::pair<double, cplx>> fv; // (tau, F)
    for (auto& p : params) fv.push_back({p.first, eval(p.first)});
    std::vector<std::pair<cplx, cplx>> out;
    std::size_t k = 0;
    int inserted = 0;
    while (k + 1 < fv.size()) {
        cplx f0 = fv[k].second, f1 = fv[k + 1].second;
        double d = std::fabs(std::arg(f1 / f0));
        if (d > 0.3 && fv[k + 1].first - fv[k].first > 1e-12) {
            if (++inserted > 2000000)
                throw Error(ErrorCode::argument_tracking, "winding refinement budget exhausted");
            double tm = (fv[k].first + fv[k + 1].first) / 2;
            fv.insert(fv.begin() + long(k) + 1, {tm, eval(tm)});
            continue;
        }
        if (d > 0.3) throw Error(ErrorCode::argument_tracking, "F changes too fast along the path");
        ++k;
    }
    for (auto& p : fv) out.push_back({p.first, p.second});
    return out;
}

} // namespace

WindingResult winding_number(const ContourPath& closed, const std::function<cplx(cplx)>& F)
{
    if (closed.points.size() < 3 || std::abs(closed.points.front() - closed.points.back()) > 1e-12)
        throw Error(ErrorCode::invalid_parameter, "winding number needs a closed path");
    const std::size_t nseg = closed.points.size() - 1;
    auto eval = [&](double tau) {
        cplx v = F(path_point(closed, tau));
        if (!finite(v) || v == cplx{}) throw Error(ErrorCode::argument_tracking, "F is zero or singular on the path");
        return v;
    };
    std::vector<std::pair<double, cplx>> params;
    for (std::size_t i = 0; i < nseg; ++i)
        for (int j = 0; j < 4; ++j) params.push_back({double(i) + j / 4.0, {}});
    params.push_back({double(nseg), {}});
    return wind_samples(refine_samples(params, eval));
}

WindingResult winding_number(const FieldProfile& field, const ContourPath& closed)
{
    if (closed.points.size() < 3 || std::abs(closed.points.front() - closed.points.back()) > 1e-12)
        throw Error(ErrorCode::invalid_parameter, "winding number needs a closed path");
    BranchedFunction bf;
    bf.n_roots = 1;
    bf.radicands = [&field](cplx s) -> Roots {
        Vec3c B = field.components(s);
        return {B[0] * B[0] + B[1] * B[1] + B[2] * B[2], 0.0};
    };
    // Rotate the loop so it starts at the point nearest the real axis.
    ContourPath loop = closed;
    auto [tau, s0] = anchor_point(closed);
    {
        std::size_t i = std::size_t(std::floor(tau));
        std::vector<cplx> pts{s0};
        const std::size_t nseg = closed.points.size() - 1;
        for (std::size_t k = 1; k <= nseg; ++k) pts.push_back(closed.points[(i + k) % nseg]);
        pts.push_back(s0);
        loop.points = pts;
    }
    Roots r0 = physical_roots(bf, s0);
    Track tr = build_track(loop, bf, 0.0, r0);
    Roots rend = tr.pts.back().r;
    if (std::abs(rend[0] - r0[0]) > 1e-6 * std::abs(r0[0]))
        throw Error(ErrorCode::argument_tracking,
                    "the loop encircles an odd number of branch points of B; F is not single-valued on it");
    auto eval = [&](double t) {
        cplx s = path_point(loop, t);
        Vec3c B = field.components(s);
        cplx b2 = B[0] * B[0] + B[1] * B[1] + B[2] * B[2];
        cplx Bm = branch_sqrt(b2, tr.hint(t)[0]);
        cplx den = Bm + B[2];
        cplx v = (Bm - B[2]) / den;
        if (!finite(v) || v == cplx{} || den == cplx{})
            throw Error(ErrorCode::argument_tracking, "F is zero or singular on the path");
        return v;
    };
    std::vector<std::pair<double, cplx>> params;
    for (auto& p : tr.pts) params.push_back({p.tau, {}});
    return wind_samples(refine_samples(params, eval));
}

} // namespace adiabat
