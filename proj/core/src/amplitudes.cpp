#include "adiabat/amplitudes.hpp"

#include <json.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace adiabat {

namespace {

const cplx I(0, 1);
constexpr double pi = std::numbers::pi;

double seg_distance(cplx p, cplx u, cplx v)
{
    cplx d = v - u;
    double L2 = std::norm(d);
    double t = L2 > 0 ? std::clamp(((p - u) * std::conj(d)).real() / L2, 0.0, 1.0) : 0.0;
    return std::abs(p - (u + t * d));
}

double path_distance(const ContourPath& p, cplx z)
{
    double best = INFINITY;
    for (std::size_t i = 0; i + 1 < p.points.size(); ++i)
        best = std::min(best, seg_distance(z, p.points[i], p.points[i + 1]));
    return best;
}

cplx ipow(int l)
{
    static const cplx q[4] = {1.0, I, -1.0, -I};
    return q[((l % 4) + 4) % 4];
}

} // namespace

std::string_view to_string(Method m)
{
    switch (m) {
    case Method::adiabatic_sum: return "adiabatic_sum";
    case Method::two_tp: return "two_tp";
    case Method::nikitin_umanskii: return "nikitin_umanskii";
    case Method::exact_leading: return "exact_leading";
    case Method::oracle: return "oracle";
    }
    return "?";
}

std::string to_json(const TransitionResult& r)
{
    nlohmann::json j;
    j["method"] = std::string(to_string(r.method));
    j["T"] = r.T;
    j["P"] = r.P;
    j["amplitude"] = {r.amplitude.real(), r.amplitude.imag()};
    j["l"] = r.l;
    j["exponent"] = r.exponent;
    j["phases"] = r.phases;
    j["interference_phase"] = r.interference_phase ? nlohmann::json(*r.interference_phase) : nlohmann::json();
    j["cos_factor"] = r.cos_factor ? nlohmann::json(*r.cos_factor) : nlohmann::json();
    j["winding"] = {{"n_bar", r.n_bar}, {"n_first", r.n_first}, {"n_last", r.n_last}};
    j["error"] = r.error;
    j["tail_bound"] = r.tail_bound ? nlohmann::json(*r.tail_bound) : nlohmann::json();
    j["fallback"] = r.fallback;
    j["note"] = r.note;
    return j.dump(1);
}

// ------------------------------------------------------------- geometry

std::vector<cplx> f_map_obstacles(const FieldProfile& field, const Box& box)
{
    // rho^2 times the pole factors is analytic in the box
    const auto& poles = field.poles();
    auto h = [&](cplx s) -> std::pair<cplx, cplx> {
        JetVec j = field.jets(s, 1);
        cplx r2 = j[0][0] * j[0][0] + j[1][0] * j[1][0];
        cplx dr2 = 2.0 * (j[0][0] * j[0][1] + j[1][0] * j[1][1]);
        cplx P = 1.0, dlogP = 0.0;
        for (auto& p : poles) {
            P *= std::pow(s - p.location, p.order);
            dlogP += double(p.order) / (s - p.location);
        }
        return {r2 * P, dr2 * P + r2 * P * dlogP};
    };
    // identically vanishing transverse part: nothing to avoid
    bool all_zero = true;
    for (double x : {-1.3, 0.2, 0.7, 2.1})
        if (std::abs(h(x).first) > 1e-300) all_zero = false;
    if (all_zero) return {};
    std::vector<cplx> out;
    for (auto& r : find_roots(h, box, {})) {
        bool at_pole = false;
        for (auto& p : poles)
            if (std::abs(r.z - p.location) < 1e-6) at_pole = true;
        if (!at_pole) out.push_back(r.z);
    }
    return out;
}

ContourPath tube_around(const ContourPath& path, double r)
{
    if (path.points.size() == 2) return stadium_around(path.points[0], path.points[1], r);
    const auto& p = path.points;
    std::size_t n = p.size();
    auto normal = [&](std::size_t i) {
        cplx d;
        if (i == 0) d = p[1] - p[0];
        else if (i + 1 == n) d = p[n - 1] - p[n - 2];
        else d = (p[i + 1] - p[i]) / std::abs(p[i + 1] - p[i]) + (p[i] - p[i - 1]) / std::abs(p[i] - p[i - 1]);
        return I * d / std::abs(d);
    };
    ContourPath t;
    t.closed = true;
    for (std::size_t i = 0; i < n; ++i) t.points.push_back(p[i] + r * normal(i));
    const int arc = 24;
    cplx nb = normal(n - 1);
    for (int k = 1; k < arc; ++k) t.points.push_back(p[n - 1] + r * nb * std::polar(1.0, -pi * k / arc));
    for (std::size_t i = n; i-- > 0;) t.points.push_back(p[i] - r * normal(i));
    cplx na = normal(0);
    for (int k = 1; k < arc; ++k) t.points.push_back(p[0] - r * na * std::polar(1.0, -pi * k / arc));
    t.points.push_back(t.points.front());
    return t;
}

ChainGeometry chain_geometry(const EffectivePotential& ep, const StokesGraph& g, const NedChain& chain,
                             const AmplitudeOptions& opts)
{
    const FieldProfile& field = ep.field();
    ChainGeometry geo;
    geo.options = opts;
    geo.chain = chain.upper_points;
    geo.lower_chain = chain.lower_points;
    if (geo.chain.empty() || geo.lower_chain.empty())
        throw Error(ErrorCode::structure_not_ned, "empty turning-point chain");
    geo.s1bar = geo.lower_chain.front();
    geo.obstacles = field.obstacles();
    for (cplx z : f_map_obstacles(field, g.box)) geo.obstacles.push_back(z);
    for (cplx z : geo.obstacles)
        if (chain.in_strip(z)) geo.strip_clear = false;

    auto make_path = [&](cplx a, cplx b, EndpointTag ta, EndpointTag tb) {
        ContourPath p = build_avoiding_path(a, b, geo.obstacles, opts.clearance, opts.detour);
        p.start_tag = ta;
        p.end_tag = tb;
        if (opts.refine > 1) p = p.refined(opts.refine);
        return p;
    };
    auto integrate = [&](const ContourPath& p, cplx& A, cplx& C) {
        auto a = action_integral(ep, p, IntegrandTag::mu_T_B, 1.0, opts.action);
        auto c = action_integral(ep, p, IntegrandTag::phidot_cos_theta, 1.0, opts.action);
        A = a.value;
        C = c.value;
        geo.error = std::max(geo.error, a.error + c.error);
    };
    // singular points a winding loop must not enclose
    std::vector<cplx> singular = geo.obstacles;
    for (auto& tp : g.turning_points) singular.push_back(tp.location);
    auto winding = [&](const ContourPath& p) {
        double d = INFINITY;
        for (cplx z : singular)
            if (std::abs(z - p.front()) > 1e-9 && std::abs(z - p.back()) > 1e-9)
                d = std::min(d, path_distance(p, z));
        double r = std::min({0.1, 0.45 * d, 0.45 * opts.clearance * 2});
        return winding_number(field, tube_around(p, r)).n;
    };

    const auto TP = EndpointTag::turning_point;
    geo.path_bar = make_path(geo.s1bar, geo.chain.front(), TP, TP);
    integrate(geo.path_bar, geo.A_bar, geo.C_bar);
    geo.n_bar = winding(geo.path_bar);

    const std::size_t n = geo.chain.size();
    geo.paths_first.resize(n);
    geo.paths_last.resize(n);
    geo.A_first.assign(n, 0.0);
    geo.C_first.assign(n, 0.0);
    geo.A_last.assign(n, 0.0);
    geo.C_last.assign(n, 0.0);
    geo.n_first.assign(n, 0);
    geo.n_last.assign(n, 0);
    for (std::size_t k = 0; k < n; ++k) {
        if (k > 0) {
            geo.paths_first[k] = make_path(geo.chain.front(), geo.chain[k], TP, TP);
            integrate(geo.paths_first[k], geo.A_first[k], geo.C_first[k]);
            geo.n_first[k] = winding(geo.paths_first[k]);
        }
        if (k + 1 < n) {
            geo.paths_last[k] = make_path(geo.chain[k], geo.chain.back(), TP, TP);
            integrate(geo.paths_last[k], geo.A_last[k], geo.C_last[k]);
            geo.n_last[k] = winding(geo.paths_last[k]);
        }
    }
    geo.path_open_bar = make_path(geo.s1bar, 0.0, TP, EndpointTag::origin);
    geo.path_open_last = make_path(geo.chain.back(), 0.0, TP, EndpointTag::origin);
    cplx a1, c1, a2, c2;
    integrate(geo.path_open_bar, a1, c1);
    integrate(geo.path_open_last, a2, c2);
    geo.A_open = a1 + a2;
    geo.C_open = c1 + c2;
    return geo;
}

// ----------------------------------------------------------- closed forms

TransitionResult adiabatic_amplitude(const ChainGeometry& geo, double T)
{
    if (!(T > 0)) throw Error(ErrorCode::invalid_parameter, "T must be positive");
    const std::size_t n = geo.chain.size();
    auto J = [T](cplx A, cplx C) { return T * A - C; };
    TransitionResult r;
    r.method = Method::adiabatic_sum;
    r.T = T;
    r.l = geo.options.l;
    cplx Jbar = J(geo.A_bar, geo.C_bar);
    r.exponent = Jbar.imag();
    r.n_bar = geo.n_bar;
    r.n_first = geo.n_first;
    r.n_last = geo.n_last;
    r.error = T * geo.error;
    cplx sum = 0;
    for (std::size_t k = 0; k < n; ++k) {
        cplx d = J(geo.A_first[k], geo.C_first[k]) - J(geo.A_last[k], geo.C_last[k]);
        double wind = pi * (geo.n_first[k] - geo.n_last[k]) / 4;
        sum += std::exp(I * wind - 0.5 * I * d);
        r.phases.push_back(wind - 0.5 * d.real());
    }
    r.P = std::exp(-r.exponent) * std::norm(sum);
    cplx open = J(geo.A_open, geo.C_open);
    r.amplitude = -ipow(r.l + 1) * std::exp(-I * pi * double(geo.n_bar) / 4.0 +
                                            0.5 * I * (Jbar + open.real())) * sum;
    if (n == 2) {
        cplx J12 = J(geo.A_first[1], geo.C_first[1]);
        r.interference_phase = 0.5 * J12.real() - pi * geo.n_first[1] / 4;
        r.cos_factor = std::cos(*r.interference_phase);
    }
    return r;
}

TransitionResult two_tp_amplitude(const ChainGeometry& geo, double T)
{
    if (geo.chain.size() != 2)
        throw Error(ErrorCode::precondition, "the two-point formula needs exactly two chain points");
    if (!geo.strip_clear) {
        TransitionResult r = adiabatic_amplitude(geo, T);
        r.fallback = true;
        r.note = "zero of Bz +- B inside the strip; interference sum used";
        return r;
    }
    if (!(T > 0)) throw Error(ErrorCode::invalid_parameter, "T must be positive");
    auto J = [T](cplx A, cplx C) { return T * A - C; };
    TransitionResult r;
    r.method = Method::two_tp;
    r.T = T;
    r.l = geo.options.l;
    r.exponent = J(geo.A_bar, geo.C_bar).imag();
    r.n_bar = geo.n_bar;
    r.n_first = geo.n_first;
    r.n_last = geo.n_last;
    r.error = T * geo.error;
    cplx J12 = J(geo.A_first[1], geo.C_first[1]);
    double arg = 0.5 * J12.real() - pi * geo.n_first[1] / 4;
    r.interference_phase = arg;
    r.cos_factor = std::cos(arg);
    r.phases = {pi * (0 - geo.n_last[0]) / 4 - 0.5 * (-J12.real()), pi * geo.n_first[1] / 4 - 0.5 * J12.real()};
    r.P = 4 * std::exp(-r.exponent) * std::cos(arg) * std::cos(arg);
    double open = J(geo.A_open, geo.C_open).real();
    r.amplitude = -2.0 * ipow(r.l + 1) *
                  std::exp(-I * pi * double(geo.n_bar) / 4.0 + 0.5 * I * open - 0.5 * r.exponent) *
                  std::cos(arg);
    return r;
}

TransitionResult nikitin_umanskii_probability(const EffectivePotential& ep, const ChainGeometry& geo,
                                              double T)
{
    const FieldProfile& field = ep.field();
    double mu = field.mu();
    double om; // Omega / mu
    std::function<cplx(cplx)> f2;
    if (auto np = field.nikitin_params()) {
        double k = np->delta_e / mu, b2 = np->b * np->b;
        om = k;
        f2 = [k, b2](cplx s) { return k * k / std::pow(b2 + s * s, 3); };
    } else if (auto bp = field.berman_params()) {
        om = bp->omega / mu;
        Expr f = bp->f;
        f2 = [f](cplx s) { cplx v = evaluate(f, s); return v * v; };
    } else {
        throw Error(ErrorCode::wrong_field_class, "Nikitin-Umanskii formula needs a Berman-class field");
    }
    if (geo.chain.size() != 2)
        throw Error(ErrorCode::precondition, "Nikitin-Umanskii formula needs exactly two chain points");
    if (!(T > 0)) throw Error(ErrorCode::invalid_parameter, "T must be positive");
    BranchedFunction g;
    g.n_roots = 1;
    g.radicands = [f2, om](cplx s) -> std::array<cplx, 2> { return {om * om + f2(s), 0.0}; };
    g.value = [](cplx, const std::array<cplx, 2>& r) { return r[0]; };
    const ActionOptions& ao = geo.options.action;
    auto bar = action_integral(geo.path_bar, g, ao);
    auto i12 = action_integral(geo.paths_first[1], g, ao);
    auto o1 = action_integral(geo.path_open_bar, g, ao);
    auto o2 = action_integral(geo.path_open_last, g, ao);

    TransitionResult r;
    r.method = Method::nikitin_umanskii;
    r.T = T;
    r.l = geo.options.l;
    r.exponent = mu * T * bar.value.imag();
    r.n_bar = geo.n_bar;
    r.n_first = {0, 2};
    r.n_last = {2, 0};
    r.error = mu * T * (bar.error + i12.error);
    double x = 0.5 * mu * T * i12.value.real();
    r.interference_phase = x - pi / 2;
    r.cos_factor = std::sin(x);
    r.phases = {x - pi / 2, pi / 2 - x};
    r.P = 4 * std::exp(-r.exponent) * std::sin(x) * std::sin(x);
    double open = mu * T * (o1.value + o2.value).real();
    r.amplitude = -2.0 * ipow(r.l + 1) *
                  std::exp(-I * pi * double(geo.n_bar) / 4.0 + 0.5 * I * open - 0.5 * r.exponent) *
                  std::sin(x);
    return r;
}

// --------------------------------------------------- connection matrices

cplx polish_q2_zero(const EffectivePotential& ep, cplx s0, double T)
{
    cplx s = s0;
    for (int it = 0; it < 50; ++it) {
        Jet5 q = ep.q2_jet(s, T);
        cplx ds = q[0] / q[1];
        s -= ds;
        if (std::abs(ds) < 1e-14 * (1 + std::abs(s))) return s;
    }
    throw Error(ErrorCode::tolerance_not_met, "Newton iteration for a zero of q2 did not converge");
}

namespace {

using Mat = std::array<std::array<cplx, 2>, 2>;

Mat mul(const Mat& a, const Mat& b)
{
    Mat c{};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
    return c;
}

} // namespace

namespace {

// Path between the finite-T points a, b in the homotopy class of the
// adiabatic path a0 -> b0: each obstacle is passed on the same side as the
// adiabatic segment passes it.
ContourPath connected_path(cplx a, cplx a0, cplx b0, cplx b, const ChainGeometry& geo)
{
    const auto& o = geo.options;
    if (a == a0 && b == b0) return build_avoiding_path(a0, b0, geo.obstacles, o.clearance, o.detour);
    // signed offset of z from the line p->q along the normal with Im > 0
    auto offset = [](cplx z, cplx p, cplx q) {
        cplx u = (q - p) / std::abs(q - p);
        cplx n = I * u;
        if (n.imag() < 0 || (n.imag() == 0 && n.real() < 0)) n = -n;
        return ((z - p) * std::conj(n)).real();
    };
    auto along = [](cplx z, cplx p, cplx q) { return ((z - p) * std::conj(q - p)).real() / std::norm(q - p); };
    DetourSide side = o.detour;
    for (cplx ob : geo.obstacles) {
        double t0 = along(ob, a0, b0), t1 = along(ob, a, b);
        bool beside0 = t0 > 0 && t0 < 1, beside1 = t1 > 0 && t1 < 1;
        double w0 = offset(ob, a0, b0), w1 = offset(ob, a, b);
        if (beside0 && std::fabs(w0) < o.clearance) continue; // the adiabatic path detours here too
        if (beside0 && beside1 && (w0 > 0) != (w1 > 0) && std::fabs(w1) >= o.clearance)
            throw Error(ErrorCode::precondition, "finite-T turning points moved across a singular point");
        if (beside1 && std::fabs(w1) < o.clearance) side = w0 > 0 ? DetourSide::lower : DetourSide::upper;
    }
    return build_avoiding_path(a, b, geo.obstacles, o.clearance, side);
}

} // namespace

ConnectionMatrices connection_matrices(const EffectivePotential& ep, const ChainGeometry& geo, double T,
                                       int chi_order)
{
    if (!(T > 0)) throw Error(ErrorCode::invalid_parameter, "T must be positive");
    if (chi_order != 0 && chi_order != 1) throw Error(ErrorCode::invalid_parameter, "chi order must be 0 or 1");
    const std::size_t n = geo.chain.size();
    ConnectionMatrices cm;
    cm.T = T;
    for (std::size_t k = 0; k < n; ++k) {
        cm.s.push_back(polish_q2_zero(ep, geo.chain[k], T));
        cm.sbar.push_back(polish_q2_zero(ep, geo.lower_chain[k], T));
    }
    const auto& o = geo.options;
    // Route through the adiabatic-limit points so the finite-T path stays in
    // the same homotopy class when the zeros of q2 drift towards a pole.
    auto W = [&](cplx a, cplx a0, cplx b0, cplx b) {
        ContourPath p = connected_path(a, a0, b0, b, geo);
        p.start_tag = p.end_tag = EndpointTag::turning_point;
        if (o.refine > 1) p = p.refined(o.refine);
        auto v = action_integral(ep, p, IntegrandTag::sqrt_q2, T, o.action);
        cm.error = std::max(cm.error, T * v.error);
        return v.value;
    };
    const auto& up = geo.chain;
    const auto& lo = geo.lower_chain;
    for (std::size_t k = 0; k < n; ++k)
        cm.alpha.push_back(std::exp(I * T * W(cm.sbar[k], lo[k], up[k], cm.s[k])));
    for (std::size_t k = 1; k < n; ++k) {
        cm.beta.push_back(I * T * W(cm.s[k - 1], up[k - 1], up[k], cm.s[k]));
        cm.beta_bar.push_back(-I * T * W(cm.sbar[k - 1], lo[k - 1], lo[k], cm.sbar[k]));
    }
    Mat M1{};
    M1[1][0] = -I * cm.alpha[0];
    M1[1][1] = 1.0;
    cm.M.push_back(M1);
    Mat prod = M1;
    for (std::size_t k = 1; k < n; ++k) {
        cplx eb = std::exp(cm.beta[k - 1]), ebb = std::exp(cm.beta_bar[k - 1]);
        Mat Mk{};
        Mk[0][0] = eb;
        Mk[0][1] = I * cm.alpha[k] * eb;
        Mk[1][0] = -I * cm.alpha[k] * ebb;
        Mk[1][1] = ebb;
        cm.M.push_back(Mk);
        prod = mul(prod, Mk);
    }
    if (chi_order == 1) {
        // chi of the continued solution along the positive real axis
        ContourPath p = ContourPath::segment(0.0, 50.0);
        cm.chi = 1.0 + chi_first_order(ep, p.refined(50), T).correction;
        prod[1][0] *= cm.chi;
    }
    cm.product = prod;
    return cm;
}

// ----------------------------------------------------------- exact form

namespace {

struct RealAxisTerms {
    cplx minus, plus;     // regularized half-line integrals
    double tail_bound = 0;
};

cplx integrate_real(const std::function<cplx(double)>& g, double a, double b, double& err)
{
    using boost::math::quadrature::gauss_kronrod;
    double e1 = 0, e2 = 0;
    double re = gauss_kronrod<double, 31>::integrate([&](double x) { return g(x).real(); }, a, b, 12, 1e-12, &e1);
    double im = gauss_kronrod<double, 31>::integrate([&](double x) { return g(x).imag(); }, a, b, 12, 1e-12, &e2);
    err += e1 + e2;
    return {re, im};
}

// int_S^inf g for g ~ c x^-p, with p fitted from two abscissae
std::pair<cplx, double> algebraic_tail(const std::function<cplx(double)>& g, double S, double sign)
{
    auto fit = [&](double x0, double x1) -> std::optional<cplx> {
        cplx g0 = g(sign * x0), g1 = g(sign * x1);
        if (std::abs(g1) == 0) return cplx(0);
        double p = std::log(std::abs(g0) / std::abs(g1)) / std::log(x1 / x0);
        if (!(p > 1.05)) return std::nullopt;
        return g1 * x1 / (p - 1);
    };
    auto t1 = fit(S / 2, S), t2 = fit(S / 4, S / 2);
    if (!t1) return {0.0, INFINITY};
    // t2 is the same estimate one octave earlier, rescaled to S
    double bound = std::abs(*t1);
    if (t2) {
        cplx g0 = g(sign * S / 2), g1 = g(sign * S);
        double p = std::log(std::abs(g0) / std::abs(g1)) / std::log(2.0);
        cplx t2s = *t2 * std::pow(0.5, p - 1);
        bound = std::abs(*t1 - t2s);
    }
    return {*t1, bound};
}

} // namespace

TransitionResult exact_leading_amplitude(const EffectivePotential& ep, const ChainGeometry& geo, double T,
                                         const ExactLeadingOptions& opts)
{
    ConnectionMatrices cm = connection_matrices(ep, geo, T, opts.chi_order);
    const FieldProfile& field = ep.field();
    const double mu = field.mu();

    // Half-line integrands with the T-linear parts cancelled analytically;
    // Delta = T (sqrt(q2) - mu B / 2).
    auto pieces = [&](double x) {
        FieldSample f = eval_field(field, x);
        cplx q0 = ep.eval_q0(x), q2 = ep.eval_q2(x, T);
        cplx sq = std::sqrt(q2);
        if (sq.real() < 0) sq = -sq;
        cplx Delta = T * (q2 - q0) / (sq + mu * f.B / 2.0);
        JetVec j = field.jets(x, 1);
        cplx r = (j[0][1] + I * j[1][1]) / (j[0][0] + I * j[1][0]);
        return std::tuple{f, Delta, r};
    };
    std::function<cplx(double)> g_minus = [&](double x) {
        auto [f, Delta, r] = pieces(x);
        cplx c2 = (1.0 + f.cos_theta) / 2.0;
        return 0.5 * r - I * Delta - I * f.phi_dot * c2 - 0.5 * f.theta_dot * (1.0 + f.cos_theta) / f.sin_theta;
    };
    std::function<cplx(double)> g_plus = [&](double x) {
        auto [f, Delta, r] = pieces(x);
        cplx s2 = (1.0 - f.cos_theta) / 2.0;
        return 0.5 * r + I * Delta - I * f.phi_dot * s2;
    };
    double qerr = 0;
    const double S = opts.s_max;
    cplx Im_ = integrate_real(g_minus, -S, 0, qerr);
    cplx Ip = integrate_real(g_plus, 0, S, qerr);
    auto [tm, bm] = algebraic_tail(g_minus, S, -1);
    auto [tp, bp] = algebraic_tail(g_plus, S, 1);
    Im_ += tm;
    Ip += tp;
    double tail = bm + bp;

    const auto& o = geo.options;
    auto sq_int = [&](cplx a, cplx a0, cplx b) {
        ContourPath p = connected_path(a, a0, b, b, geo);
        p.start_tag = EndpointTag::turning_point;
        p.end_tag = EndpointTag::origin;
        auto v = action_integral(ep, p, IntegrandTag::sqrt_q2, T, o.action);
        qerr += T * v.error;
        return v.value;
    };
    cplx open = I * T * (sq_int(cm.sbar.front(), geo.lower_chain.front(), 0.0) +
                         sq_int(cm.s.back(), geo.chain.back(), 0.0));

    FieldSample f0 = eval_field(field, 0.0);
    double Bm = std::abs(eval_field(field, -1e8).B), Bp = std::abs(eval_field(field, 1e8).B);
    cplx sin_half = std::sqrt((1.0 - f0.cos_theta) / 2.0);
    cplx a = cm.product[1][0] * std::sqrt(Bm / Bp) * sin_half * std::exp(Im_ + Ip + open);

    TransitionResult r;
    r.method = Method::exact_leading;
    r.T = T;
    r.l = o.l;
    r.amplitude = a;
    r.P = std::norm(a);
    r.exponent = -std::log(std::norm(cm.alpha.front()));
    r.n_bar = geo.n_bar;
    r.n_first = geo.n_first;
    r.n_last = geo.n_last;
    r.error = qerr + cm.error;
    r.tail_bound = tail;
    if (!(tail <= opts.tail_tolerance))
        throw Error(ErrorCode::tail_bound, "real-axis tail bound " + std::to_string(tail) +
                                               " exceeds tolerance; increase s_max");
    return r;
}

// ------------------------------------------------------------------- chi

ChiResult chi_first_order(const EffectivePotential& ep, const ContourPath& path, double T, KernelMode mode)
{
    if (!(T > 0)) throw Error(ErrorCode::invalid_parameter, "T must be positive");
    if (path.points.size() < 2) throw Error(ErrorCode::invalid_parameter, "path needs two points");
    const bool langer = ep.options().langer_for_kernel && !ep.poles().empty();
    auto qt = [&](cplx s) {
        cplx q = mode == KernelMode::adiabatic_q0 ? ep.eval_q0(s) : ep.eval_q2(s, T);
        if (langer) q += ep.langer_delta(s) / (T * T);
        return q;
    };
    // Gauss-Legendre panels fine enough to resolve exp(2iTW)
    static const double x8[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                 -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                 0.7966664774136267,  0.9602898564975363};
    static const double w8[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                 0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                 0.2223810344533745, 0.1012285362903763};
    struct Node { cplx xi, dxi, omega, W; };
    std::vector<Node> nodes;
    std::vector<double> imW_panel{0.0};
    cplx root = std::sqrt(qt(path.front()));
    if (root.real() < 0) root = -root;
    cplx Wacc = 0;
    for (std::size_t seg = 0; seg + 1 < path.points.size(); ++seg) {
        cplx a = path.points[seg], b = path.points[seg + 1];
        double scale = std::max(std::abs(root), 1.0);
        int panels = std::max(4, int(std::ceil(std::abs(b - a) * T * scale * 2)));
        cplx h = (b - a) / double(panels);
        for (int p = 0; p < panels; ++p) {
            cplx pa = a + double(p) * h;
            cplx mid = pa + h / 2.0;
            cplx W_at[8];
            for (int k = 0; k < 8; ++k) {
                // W from the panel start to the node by an 8-point rule on the sub-interval
                cplx xi = mid + h / 2.0 * x8[k];
                cplx sub = (xi - pa) / 2.0, acc = 0;
                for (int m = 0; m < 8; ++m) {
                    cplx z = pa + sub * (1.0 + x8[m]);
                    acc += w8[m] * branch_sqrt(qt(z), root);
                }
                W_at[k] = Wacc + acc * sub;
                cplx rk = branch_sqrt(qt(xi), root);
                nodes.push_back({xi, h / 2.0 * w8[k], ep.omega(xi, T, mode, rk), W_at[k]});
            }
            cplx acc = 0;
            for (int k = 0; k < 8; ++k) acc += w8[k] * branch_sqrt(qt(mid + h / 2.0 * x8[k]), root);
            Wacc += acc * h / 2.0;
            root = branch_sqrt(qt(pa + h), root);
            imW_panel.push_back(Wacc.imag());
        }
    }
    double tol = 1e-9 * (1 + std::abs(Wacc));
    bool down = true, up = true;
    for (std::size_t i = 0; i + 1 < imW_panel.size(); ++i) {
        double d = imW_panel[i + 1] - imW_panel[i];
        if (d > tol) down = false;
        if (d < -tol) up = false;
    }
    if (!down && !up) throw Error(ErrorCode::non_canonical_path, "Im W is not monotone along the path");
    int sigma = down ? 1 : -1;
    cplx Ws = Wacc, acc = 0;
    for (auto& nd : nodes)
        acc += nd.dxi * nd.omega * (1.0 - std::exp(-2.0 * double(sigma) * I * T * (Ws - nd.W)));
    return {-double(sigma) / (2.0 * I * T) * acc, sigma};
}

} // namespace adiabat
