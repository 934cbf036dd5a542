#include "adiabat/oracle.hpp"

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <numbers>
#include <set>
#include <thread>

namespace adiabat {

namespace {

const cplx I(0, 1);
constexpr double pi = std::numbers::pi;
constexpr int N = 16; // Chebyshev nodes per panel

// Tabulated functions along the path.
enum Fn { f_muB, f_phicos, f_c, f_cstar, f_muBz, f_cplus, f_cminus, n_fn };
// Functions whose running integral is kept.
constexpr int integrated[] = {f_muB, f_phicos, f_muBz};

std::array<cplx, n_fn> raw_values(const FieldSample& f, double mu)
{
    cplx half_phi_sin = 0.5 * I * f.phi_dot * f.sin_theta;
    return {mu * f.B,
            f.phi_dot * f.cos_theta,
            0.5 * f.theta_dot + half_phi_sin,
            0.5 * f.theta_dot - half_phi_sin,
            mu * f.Bvec[2],
            mu * (f.Bvec[0] + I * f.Bvec[1]),
            mu * (f.Bvec[0] - I * f.Bvec[1])};
}

double node(int j) { return std::cos(pi * (j + 0.5) / N); }

std::array<cplx, N> cheb_coefficients(const std::array<cplx, N>& v)
{
    std::array<cplx, N> a{};
    for (int k = 0; k < N; ++k) {
        cplx s = 0;
        for (int j = 0; j < N; ++j) s += v[j] * std::cos(pi * k * (j + 0.5) / N);
        a[k] = s * (2.0 / N);
    }
    a[0] *= 0.5;
    return a;
}

template <std::size_t M>
cplx clenshaw(const std::array<cplx, M>& a, double x)
{
    cplx b1 = 0, b2 = 0;
    for (std::size_t k = M - 1; k >= 1; --k) {
        cplx b = a[k] + 2 * x * b1 - b2;
        b2 = b1;
        b1 = b;
    }
    return a[0] + x * b1 - b2;
}

// Antiderivative in x vanishing at x = -1.
std::array<cplx, N + 1> cheb_integral(const std::array<cplx, N>& a)
{
    std::array<cplx, N + 1> C{};
    C[1] += a[0];
    C[2] += a[1] / 4.0;
    for (int k = 2; k < N; ++k) {
        C[k + 1] += a[k] / (2.0 * (k + 1));
        C[k - 1] -= a[k] / (2.0 * (k - 1));
    }
    cplx at_minus = 0;
    for (int k = 1; k <= N; ++k) at_minus += (k % 2 ? -1.0 : 1.0) * C[k];
    C[0] = -at_minus;
    return C;
}

struct Panel {
    double t0, t1;
    cplx z0, dir; // s(t) = z0 + dir (t - t0)
    std::array<std::array<cplx, N>, n_fn> coef;
    std::array<std::array<cplx, N + 1>, 3> prim;
    std::array<cplx, 3> base; // running integrals at t0
    BranchHint hint;          // branch at the panel midpoint
};

struct TableValue {
    std::array<cplx, n_fn> f;
    std::array<cplx, 3> integral;
};

// Chebyshev panels along a polyline parametrised by arc length, holding the
// field functions and their running integrals from the first vertex.
class PathTable {
public:
    PathTable(const FieldProfile& field, const std::vector<cplx>& path,
              const std::vector<cplx>& singular, double resolution)
        : path_(path)
    {
        vertex_t_.push_back(0.0);
        for (std::size_t i = 0; i + 1 < path.size(); ++i)
            vertex_t_.push_back(vertex_t_.back() + std::abs(path[i + 1] - path[i]));

        BranchHint hint;
        std::array<cplx, 3> running{};
        double mu = field.mu();
        for (std::size_t seg = 0; seg + 1 < path.size(); ++seg) {
            cplx a = path[seg], b = path[seg + 1];
            double L = std::abs(b - a);
            if (L == 0) continue;
            cplx dir = (b - a) / L;
            double t = 0;
            while (t < L) {
                cplx z = a + dir * t;
                double d = INFINITY;
                for (cplx p : singular) d = std::min(d, std::abs(p - z));
                double h = std::min({1.0, resolution * d, L - t});
                if (L - t - h < 1e-3 * h) h = L - t;
                for (int tries = 0;; ++tries) {
                    Panel P;
                    if (build_panel(field, mu, z, dir, h, hint, P)) {
                        P.t0 = vertex_t_[seg] + t;
                        P.t1 = vertex_t_[seg] + t + h;
                        if (t + h >= L) P.t1 = vertex_t_[seg + 1];
                        P.base = running;
                        for (int q = 0; q < 3; ++q)
                            running[q] += dir * (h / 2) * clenshaw(P.prim[q], 1.0);
                        hint = last_hint_;
                        panels_.push_back(std::move(P));
                        break;
                    }
                    if (tries > 40)
                        throw Error(ErrorCode::step_collapse, "phase table: panel refinement failed");
                    h /= 2;
                }
                t += h;
                if (L - t < 1e-12 * L) break;
            }
        }
    }

    const std::vector<double>& vertex_t() const { return vertex_t_; }
    const std::vector<cplx>& path() const { return path_; }
    std::size_t panel_count() const { return panels_.size(); }

    // Largest |Im| of the running integral q at panel boundaries.
    double max_imag(int q) const
    {
        double m = 0;
        for (auto& P : panels_) m = std::max(m, std::fabs(P.base[q].imag()));
        return m;
    }

    std::size_t locate(double t, std::size_t guess) const
    {
        if (guess < panels_.size() && t >= panels_[guess].t0 && t <= panels_[guess].t1) return guess;
        if (guess + 1 < panels_.size() && t >= panels_[guess + 1].t0 && t <= panels_[guess + 1].t1)
            return guess + 1;
        auto it = std::upper_bound(panels_.begin(), panels_.end(), t,
                                   [](double v, const Panel& p) { return v < p.t0; });
        std::size_t k = it == panels_.begin() ? 0 : std::size_t(it - panels_.begin()) - 1;
        return std::min(k, panels_.size() - 1);
    }

    // Values at path parameter t; `cursor` caches the panel index.
    TableValue eval(double t, std::size_t& cursor) const
    {
        cursor = locate(t, cursor);
        const Panel& P = panels_[cursor];
        double x = std::clamp(2 * (t - P.t0) / (P.t1 - P.t0) - 1, -1.0, 1.0);
        TableValue v;
        for (int k = 0; k < n_fn; ++k) v.f[k] = clenshaw(P.coef[k], x);
        double half = (P.t1 - P.t0) / 2;
        for (int q = 0; q < 3; ++q) v.integral[q] = P.base[q] + P.dir * half * clenshaw(P.prim[q], x);
        return v;
    }

    cplx point(double t, std::size_t& cursor) const
    {
        cursor = locate(t, cursor);
        const Panel& P = panels_[cursor];
        return P.z0 + P.dir * (t - P.t0);
    }

    BranchHint hint(double t, std::size_t& cursor) const
    {
        cursor = locate(t, cursor);
        return panels_[cursor].hint;
    }

private:
    std::vector<cplx> path_;
    std::vector<double> vertex_t_;
    std::vector<Panel> panels_;
    BranchHint last_hint_;

    bool build_panel(const FieldProfile& field, double mu, cplx z0, cplx dir, double h,
                     const BranchHint& start, Panel& P)
    {
        std::array<std::array<cplx, N>, n_fn> vals;
        std::array<BranchHint, N> hints;
        BranchHint hint = start;
        auto at = [&](double x) { return z0 + dir * (h / 2) * (x + 1); };
        for (int j = N - 1; j >= 0; --j) {
            FieldSample f = eval_field(field, at(node(j)), hint);
            hint = f.branch();
            hints[j] = hint;
            auto r = raw_values(f, mu);
            for (int k = 0; k < n_fn; ++k) vals[k][j] = r[k];
        }
        for (int k = 0; k < n_fn; ++k) P.coef[k] = cheb_coefficients(vals[k]);

        // accuracy probe between nodes
        for (double x : {-0.93, -0.41, 0.27, 0.88}) {
            int j = 0;
            for (int i = 1; i < N; ++i)
                if (std::fabs(node(i) - x) < std::fabs(node(j) - x)) j = i;
            auto r = raw_values(eval_field(field, at(x), hints[j]), mu);
            for (int k = 0; k < n_fn; ++k) {
                double scale = 0;
                for (int i = 0; i < N; ++i) scale = std::max(scale, std::abs(vals[k][i]));
                if (scale < 1e-300) continue;
                if (std::abs(clenshaw(P.coef[k], x) - r[k]) > 1e-12 * scale) return false;
            }
        }
        for (int q = 0; q < 3; ++q) P.prim[q] = cheb_integral(P.coef[integrated[q]]);
        P.z0 = z0;
        P.dir = dir;
        P.hint = hints[N / 2];
        last_hint_ = hints[0];
        return true;
    }
};

std::vector<cplx> singular_points(const FieldProfile& field)
{
    std::vector<cplx> out;
    for (auto& p : field.poles()) out.push_back(p.location);
    for (cplx o : field.obstacles()) out.push_back(o);
    try {
        EffectivePotential ep(field);
        Box box = default_search_box(ep);
        for (auto& tp : find_turning_points(ep, box)) out.push_back(tp.location);
        for (cplx z : f_map_obstacles(field, box)) out.push_back(z);
    } catch (const Error&) {
        // panel sizes then rely on the accuracy probe alone
    }
    return out;
}

// Estimate of min over lower turning points of -Im int_0^s mu B ds along a
// straight line.
double half_exponent(const FieldProfile& field, const std::vector<cplx>& tps)
{
    static const double gx[] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                0.7966664774136267,  0.9602898564975363};
    static const double gw[] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                0.2223810344533745, 0.1012285362903763};
    double best = INFINITY;
    for (cplx tp : tps) {
        if (tp.imag() >= 0) continue;
        try {
            const int panels = 64;
            BranchHint hint;
            cplx sum = 0, step = tp / double(panels);
            for (int p = 0; p < panels; ++p) {
                cplx mid = step * (p + 0.5);
                for (int j = 0; j < 8; ++j) {
                    FieldSample f = eval_field(field, mid + step * (gx[j] / 2), hint);
                    hint = f.branch();
                    sum += gw[j] / 2 * f.B * step;
                }
            }
            best = std::min(best, std::fabs((field.mu() * sum).imag()));
        } catch (const Error&) {
        }
    }
    return best;
}

ShiftedPathInfo level_path(const FieldProfile& field, double T, const IntegrationSettings& st,
                           const std::vector<cplx>& sing);

struct Prepared {
    bool shifted = false;
    std::vector<cplx> path;
    std::size_t start_vertex = 0;
    double h_D = 0; // expected -log|a_-| / T on shifted paths
    ShiftedPathInfo info;
    std::unique_ptr<PathTable> table;
};

Prepared prepare(const FieldProfile& field, double T, const IntegrationSettings& st, bool want_shifted,
                 const std::vector<cplx>& sing)
{
    Prepared pr;
    if (want_shifted) {
        pr.info = level_path(field, T, st, sing);
        pr.shifted = true;
        pr.path = pr.info.path;
        pr.start_vertex = 1;
        pr.h_D = pr.info.half_exponent;
    } else {
        pr.path = {cplx(st.s_min), cplx(st.s_max)};
    }
    pr.table = std::make_unique<PathTable>(field, pr.path, sing, st.phase_resolution);
    return pr;
}

using State = std::array<cplx, 2>;

std::string fmt_sci(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

// Adiabatic following coefficient i c / omega.
cplx following(const TableValue& v, double T)
{
    cplx omega = T * v.f[f_muB] - v.f[f_phicos];
    return I * v.f[f_c] / omega;
}

OracleTrajectory run(const FieldProfile& field, const Prepared& pr, double T,
                     const IntegrationSettings& st, Representation rep)
{
    namespace ode = boost::numeric::odeint;
    if (!(T > 0)) throw Error(ErrorCode::invalid_parameter, "T must be positive");
    if (rep == Representation::a12 && pr.shifted)
        throw Error(ErrorCode::invalid_parameter, "the a12 representation is integrated on the real axis only");
    const PathTable& tab = *pr.table;
    const auto& vt = tab.vertex_t();

    OracleTrajectory tr;
    tr.representation = rep;
    tr.T = T;
    tr.shifted = pr.shifted;
    tr.path = pr.path;

    // The settings are end-to-end targets; local errors add up over
    // thousands of steps, so each step is held 1000 times tighter.
    constexpr double local = 1e-3;
    double abs_tol = st.abs_tol * local;
    if (pr.shifted) {
        if (T * tab.max_imag(0) > 650 || T * pr.h_D > 650)
            throw Error(ErrorCode::invalid_parameter, "T too large for a double-precision shifted-path run");
        abs_tol *= std::exp(-T * pr.h_D);
    }

    std::size_t cursor = 0;
    double t_start = vt[pr.start_vertex];
    TableValue v0 = tab.eval(t_start, cursor);
    State x;
    if (rep == Representation::a_pm) {
        cplx Phi = T * v0.integral[0] - v0.integral[1];
        x = {1.0, following(v0, T) * std::exp(-I * Phi)};
    } else {
        FieldSample f = eval_field(field, tab.point(t_start, cursor), tab.hint(t_start, cursor));
        cplx cth = std::sqrt((f.B + f.Bvec[2]) / (2.0 * f.B));
        cplx sth = std::sqrt((f.B - f.Bvec[2]) / (2.0 * f.B));
        cplx eph = std::abs(f.rho) > 0 ? (f.Bvec[0] + I * f.Bvec[1]) / f.rho : cplx(1.0);
        cplx k = following(v0, T);
        cplx Phi1 = T * v0.integral[2];
        x = {cth + k * sth, eph * (sth - k * cth) * std::exp(-I * Phi1)};
    }
    if (!pr.shifted) {
        double n = std::sqrt(std::norm(x[0]) + std::norm(x[1]));
        x[0] /= n;
        x[1] /= n;
    }

    cplx dir;
    std::size_t rc = 0;
    auto rhs = [&](const State& a, State& da, double t) {
        TableValue v = tab.eval(t, rc);
        if (rep == Representation::a_pm) {
            cplx e = std::exp(-I * (T * v.integral[0] - v.integral[1]));
            da[0] = -dir * v.f[f_cstar] / e * a[1];
            da[1] = dir * v.f[f_c] * e * a[0];
        } else {
            // c1 = -(i/2) mu (Bx + i By), c1* = (i/2) mu (Bx - i By)
            cplx e = std::exp(-I * (T * v.integral[2]));
            da[0] = -dir * T * (0.5 * I * v.f[f_cminus]) / e * a[1];
            da[1] = dir * T * (-0.5 * I * v.f[f_cplus]) * e * a[0];
        }
    };

    using Stepper = ode::runge_kutta_fehlberg78<State, double, State, double>;
    auto ctrl = ode::make_controlled(abs_tol, st.rel_tol * local, Stepper());
    auto record = [&](double t, const State& a) {
        double n = std::norm(a[0]) + std::norm(a[1]);
        if (!pr.shifted) tr.max_norm_drift = std::max(tr.max_norm_drift, std::fabs(n - 1));
        if (st.store_trajectory) {
            std::size_t c = cursor;
            tr.samples.push_back({tab.point(t, c), a[0], a[1], n});
        }
    };
    record(t_start, x);

    double dt = 1e-3;
    long attempts = 0;
    for (std::size_t seg = pr.start_vertex; seg + 1 < pr.path.size(); ++seg) {
        double t = vt[seg], t_end = vt[seg + 1];
        if (t_end <= t) continue;
        dir = (pr.path[seg + 1] - pr.path[seg]) / (t_end - t);
        while (t < t_end) {
            // the error estimate is unreliable across many oscillations
            TableValue here = tab.eval(t, cursor);
            double cap = 2.0 / std::abs(rep == Representation::a_pm ? T * here.f[f_muB] - here.f[f_phicos]
                                                                      : T * here.f[f_muBz]);
            dt = std::min(dt, cap);
            double remaining = t_end - t;
            if (dt >= remaining) dt = remaining;
            double t_before = t;
            auto res = ctrl.try_step(rhs, x, t, dt);
            if (++attempts > st.max_steps)
                throw Error(ErrorCode::step_collapse, "oracle exceeded max_steps");
            if (res == ode::success) {
                ++tr.steps;
                if (t_end - t < 1e-13 * std::max(1.0, std::fabs(t_end))) t = t_end;
                record(t, x);
            } else if (dt < 1e-13 * std::max(1.0, std::fabs(t_before))) {
                throw Error(ErrorCode::step_collapse, "oracle step size collapsed near s = " +
                                                          std::to_string(tab.point(t, rc).real()) + "+" +
                                                          std::to_string(tab.point(t, rc).imag()) + "i");
            }
        }
    }
    if (tr.max_norm_drift > 1e-8)
        throw Error(ErrorCode::norm_drift, "norm drift " + fmt_sci(tr.max_norm_drift) + " after " + std::to_string(tr.steps) + " steps");

    double t_final = vt.back();
    TableValue vf = tab.eval(t_final, cursor);
    tr.a1 = x[0];
    tr.a2 = x[1];
    tr.end.s = pr.path.back();
    tr.end.phase = rep == Representation::a_pm ? T * vf.integral[0] - vf.integral[1] : T * vf.integral[2];
    tr.end.branch = tab.hint(t_final, cursor);
    return tr;
}

bool has_lower_singularity(const std::vector<cplx>& sing)
{
    for (cplx z : sing)
        if (z.imag() < -1e-9) return true;
    return false;
}

} // namespace

std::string_view to_string(Representation r)
{
    return r == Representation::a12 ? "a12" : "a_pm";
}

std::string_view to_string(OraclePath p)
{
    switch (p) {
    case OraclePath::automatic: return "automatic";
    case OraclePath::real_axis: return "real_axis";
    case OraclePath::shifted: return "shifted";
    }
    return "?";
}

void IntegrationSettings::validate() const
{
    auto bad = [](const std::string& m) { throw Error(ErrorCode::invalid_parameter, m); };
    if (!(s_min < 0 && s_max > 0)) bad("integration range must satisfy s_min < 0 < s_max");
    if (!(rel_tol > 0) || !(abs_tol > 0)) bad("tolerances must be positive");
    if (max_steps <= 0) bad("max_steps must be positive");
    if (!(phase_resolution > 0 && phase_resolution <= 1)) bad("phase_resolution must lie in (0, 1]");
    if (!(level_margin > 0)) bad("level_margin must be positive");
}

namespace {

ShiftedPathInfo level_path(const FieldProfile& field, double T, const IntegrationSettings& st,
                           const std::vector<cplx>& sing)
{
    std::vector<cplx> tps;
    try {
        EffectivePotential ep(field);
        for (auto& tp : find_turning_points(ep, default_search_box(ep))) tps.push_back(tp.location);
    } catch (const Error&) {
    }
    ShiftedPathInfo info;
    info.half_exponent = half_exponent(field, tps);
    if (!std::isfinite(info.half_exponent))
        throw Error(ErrorCode::precondition, "no lower turning point for the shifted oracle path");
    double hD = info.half_exponent;
    info.level = hD - std::min(st.level_margin / T, 0.5 * hD);
    info.end_level = hD + 3.0 / T;

    auto nearest = [&](cplx z) {
        double d = INFINITY;
        for (cplx p : sing) d = std::min(d, std::abs(p - z));
        return d;
    };
    // depth y at which -Im int_0^{x - i y} mu B reaches `target`, marching
    // down from the real axis
    auto depth = [&](double x, double target) {
        static const double gx[] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                                    0.8611363115940526};
        static const double gw[] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                                    0.3478548451374538};
        double mu = field.mu();
        BranchHint hint;
        auto segment = [&](double y0, double y1, BranchHint& hn) {
            double sum = 0;
            for (int j = 0; j < 4; ++j) {
                double y = 0.5 * (y0 + y1) + 0.5 * (y1 - y0) * gx[j];
                FieldSample f = eval_field(field, cplx(x, -y), hn);
                hn = f.branch();
                sum += gw[j] * 0.5 * (y1 - y0) * (mu * f.B).real();
            }
            return sum;
        };
        double y = 0, h = 0;
        for (int it = 0; it < 100000; ++it) {
            double d = nearest(cplx(x, -y));
            if (d < 0.02)
                throw Error(ErrorCode::precondition, "level curve of the shifted oracle path meets a singular point");
            double dy = std::min(0.05, 0.2 * d);
            BranchHint trial = hint;
            double dh = segment(y, y + dy, trial);
            if (h + dh >= target) {
                // Newton inside the last step
                double lo = y;
                double z = y + dy * (target - h) / dh;
                for (int k = 0; k < 30; ++k) {
                    BranchHint hn = hint;
                    double g = h + segment(lo, z, hn) - target;
                    double slope = (mu * eval_field(field, cplx(x, -z), hn).B).real();
                    double step = g / slope;
                    z = std::clamp(z - step, lo, lo + dy);
                    if (std::fabs(step) < 1e-13) break;
                }
                return z;
            }
            h += dh;
            y += dy;
            hint = trial;
        }
        throw Error(ErrorCode::precondition, "level curve of the shifted oracle path not found");
    };

    std::vector<cplx> level;
    double x = st.s_min;
    for (;;) {
        double y = depth(x, info.level);
        level.emplace_back(x, -y);
        if (x >= st.s_max) break;
        double dx = std::clamp(0.2 * nearest(cplx(x, -y)), 0.01, 2.0);
        x = std::min(st.s_max, x + dx);
        if (st.s_max - x < 0.01) x = st.s_max;
    }
    info.path.push_back(cplx(st.s_min));
    info.path.push_back(cplx(st.s_min, -depth(st.s_min, info.end_level)));
    info.path.insert(info.path.end(), level.begin(), level.end());
    info.path.push_back(cplx(st.s_max, -depth(st.s_max, info.end_level)));
    return info;
}

} // namespace

ShiftedPathInfo shifted_path(const FieldProfile& field, double T, const IntegrationSettings& st)
{
    st.validate();
    if (!(T > 0)) throw Error(ErrorCode::invalid_parameter, "T must be positive");
    return level_path(field, T, st, singular_points(field));
}

OracleTrajectory integrate_amplitude_system(const FieldProfile& field, double T,
                                            const IntegrationSettings& settings, Representation rep)
{
    settings.validate();
    if (!(T > 0)) throw Error(ErrorCode::invalid_parameter, "T must be positive");
    auto sing = singular_points(field);
    bool shifted = settings.path == OraclePath::shifted ||
                   (settings.path == OraclePath::automatic && rep == Representation::a_pm &&
                    has_lower_singularity(sing));
    Prepared pr = prepare(field, T, settings, shifted, sing);
    return run(field, pr, T, settings, rep);
}

TransitionResult extract_a_minus(const OracleTrajectory& traj, const FieldProfile& field, double T)
{
    FieldSample f = eval_field(field, traj.end.s, traj.end.branch);
    if (std::abs(f.theta) > 1e-3)
        throw Error(ErrorCode::final_theta, "Theta at the end of the range is " +
                                                std::to_string(std::abs(f.theta)) + "; raise s_max");
    cplx c = 0.5 * f.theta_dot + 0.5 * I * f.phi_dot * f.sin_theta;
    cplx k = I * c / (T * field.mu() * f.B - f.phi_dot * f.cos_theta);

    TransitionResult r;
    r.method = Method::oracle;
    r.T = T;
    if (traj.representation == Representation::a_pm) {
        r.amplitude = traj.a2 - k * std::exp(-I * traj.end.phase) * traj.a1;
    } else {
        // back to the spinor, project on the instantaneous eigenvectors and
        // remove the first-order following term
        cplx psi1 = traj.a1, psi2 = traj.a2 * std::exp(I * traj.end.phase);
        cplx cth = std::sqrt((f.B + f.Bvec[2]) / (2.0 * f.B));
        cplx sth = std::sqrt((f.B - f.Bvec[2]) / (2.0 * f.B));
        cplx eph = std::abs(f.rho) > 0 ? (f.Bvec[0] + I * f.Bvec[1]) / f.rho : cplx(1.0);
        cplx Ap = cth * psi1 + sth / eph * psi2;
        cplx Am = -eph * sth * psi1 + cth * psi2;
        r.amplitude = Am + k * eph * Ap;
    }
    r.P = std::norm(r.amplitude);
    r.note = std::string(traj.shifted ? "shifted path" : "real axis") + ", " +
             std::string(to_string(traj.representation)) + ", " + std::to_string(traj.steps) + " steps";
    return r;
}

TransitionResult oracle_probability(const FieldProfile& field, double T, const IntegrationSettings& settings)
{
    IntegrationSettings st = settings;
    st.store_trajectory = false;
    auto tr = integrate_amplitude_system(field, T, st, Representation::a_pm);
    return extract_a_minus(tr, field, T);
}

std::vector<SweepRow> sweep_T(const EffectivePotential& ep, const std::vector<double>& T_list,
                              const IntegrationSettings& settings, const ChainGeometry* geo, unsigned threads)
{
    settings.validate();
    if (T_list.empty()) throw Error(ErrorCode::invalid_parameter, "empty T list");
    for (std::size_t i = 0; i < T_list.size(); ++i) {
        if (!(T_list[i] > 0)) throw Error(ErrorCode::invalid_parameter, "T values must be positive");
        if (i > 0 && T_list[i] == T_list[i - 1])
            throw Error(ErrorCode::invalid_parameter, "duplicate T value " + std::to_string(T_list[i]));
        if (i > 0 && T_list[i] < T_list[i - 1])
            throw Error(ErrorCode::invalid_parameter, "T values must be ascending");
    }
    const FieldProfile& field = ep.field();
    IntegrationSettings st = settings;
    st.store_trajectory = false;
    auto sing = singular_points(field);
    bool shifted = st.path == OraclePath::shifted ||
                   (st.path == OraclePath::automatic && has_lower_singularity(sing));

    std::vector<SweepRow> rows(T_list.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex m;
    auto worker = [&] {
        for (;;) {
            std::size_t i = next++;
            if (i >= T_list.size()) return;
            try {
                double T = T_list[i];
                SweepRow& row = rows[i];
                row.T = T;
                Prepared pr = prepare(field, T, st, shifted, sing);
                auto tr = run(field, pr, T, st, Representation::a_pm);
                row.P_oracle = extract_a_minus(tr, field, T).P;
                if (geo) {
                    auto ad = adiabatic_amplitude(*geo, T);
                    row.P_adiabatic = ad.P;
                    row.rel_diff = (row.P_oracle - ad.P) / ad.P;
                    row.exponent = ad.exponent;
                    row.phase = ad.interference_phase;
                    row.cos_factor = ad.cos_factor;
                    if (geo->n_first.size() > 1) row.winding_n12 = geo->n_first[1];
                    row.near_zero = ad.cos_factor && std::fabs(*ad.cos_factor) < 0.1;
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(m);
                if (!failure) failure = std::current_exception();
                next = T_list.size();
            }
        }
    };
    unsigned n = std::max(1u, std::min<unsigned>(threads, unsigned(T_list.size())));
    if (n == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned k = 0; k < n; ++k) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);
    return rows;
}

} // namespace adiabat
