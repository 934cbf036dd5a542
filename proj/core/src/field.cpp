#include "adiabat/field.hpp"
#include "adiabat/roots.hpp"

#include <cmath>
#include <sstream>

namespace adiabat {

namespace {

bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

Expr scaled(const Expr& e, double k)
{
    if (k == 1.0) return e;
    return Expr::binary(NodeKind::mul, Expr::constant(k), e);
}

} // namespace

FieldProfile FieldProfile::nikitin(double b, double delta_e, double mu)
{
    if (!(b > 0) || !(delta_e > 0) || !(mu > 0))
        throw Error(ErrorCode::invalid_parameter, "Nikitin field needs b > 0, delta_e > 0, mu > 0");
    FieldProfile p;
    p.kind_ = Kind::nikitin;
    p.mu_ = mu;
    p.nikitin_ = NikitinParams{b, delta_e};
    p.poles_ = {{cplx(0, b), 3}, {cplx(0, -b), 3}};
    return p;
}

FieldProfile FieldProfile::berman(const Expr& f, double omega, double mu, std::vector<Pole> poles)
{
    if (!f.valid()) throw Error(ErrorCode::invalid_parameter, "Berman field needs f(s)");
    if (!(omega > 0) || !(mu > 0))
        throw Error(ErrorCode::invalid_parameter, "Berman field needs omega > 0, mu > 0");
    FieldProfile p;
    p.kind_ = Kind::berman;
    p.mu_ = mu;
    p.berman_ = BermanParams{f, omega};
    p.poles_ = std::move(poles);
    p.setup_expressions(f, Expr::constant(0.0), Expr::constant(omega / mu));
    return p;
}

FieldProfile FieldProfile::custom(const Expr& bx, const Expr& by, const Expr& bz, double mu,
                                  std::vector<Pole> poles, std::vector<cplx> obstacles)
{
    if (!bx.valid() || !by.valid() || !bz.valid())
        throw Error(ErrorCode::invalid_parameter, "custom field needs three components");
    if (!(mu > 0)) throw Error(ErrorCode::invalid_parameter, "mu must be positive");
    FieldProfile p;
    p.kind_ = Kind::custom;
    p.mu_ = mu;
    p.poles_ = std::move(poles);
    p.extra_obstacles_ = std::move(obstacles);
    p.setup_expressions(bx, by, bz);
    p.normalise();
    return p;
}

void FieldProfile::setup_expressions(const Expr& bx, const Expr& by, const Expr& bz)
{
    const Expr* c[3] = {&bx, &by, &bz};
    for (int i = 0; i < 3; ++i) {
        derivs_[i][0] = *c[i];
        for (int k = 1; k < 5; ++k) derivs_[i][k] = differentiate(derivs_[i][k - 1]);
    }
}

// Rotate so that B(+inf) is along +z. The limit is probed at a large real s.
void FieldProfile::normalise()
{
    Vec3c far;
    try {
        JetVec j = raw_jets(1e8, 0);
        for (int i = 0; i < 3; ++i) far[i] = j[i][0];
    } catch (const Error&) {
        return;
    }
    double v[3];
    for (int i = 0; i < 3; ++i) {
        if (!finite(far[i])) return;
        v[i] = far[i].real();
    }
    double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    if (!(n > 0)) return;
    for (double& x : v) x /= n;
    if (std::hypot(v[0], v[1]) < 1e-12 && v[2] > 0) return;
    // Rodrigues rotation taking v to e_z.
    double ax = v[1], ay = -v[0]; // v x e_z
    double sin_a = std::hypot(ax, ay), cos_a = v[2];
    std::array<std::array<double, 3>, 3> R{};
    if (sin_a < 1e-15) {
        R = {{{1, 0, 0}, {0, -1, 0}, {0, 0, -1}}}; // v = -e_z: turn about x
    } else {
        ax /= sin_a;
        ay /= sin_a;
        double K[3][3] = {{0, 0, ay}, {0, 0, -ax}, {-ay, ax, 0}};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double kk = 0;
                for (int m = 0; m < 3; ++m) kk += K[i][m] * K[m][j];
                R[i][j] = (i == j ? 1.0 : 0.0) + sin_a * K[i][j] + (1 - cos_a) * kk;
            }
    }
    rot_ = R;
    rotated_ = true;
}

std::vector<cplx> FieldProfile::obstacles() const
{
    std::vector<cplx> out;
    for (auto& p : poles_) out.push_back(p.location);
    out.insert(out.end(), extra_obstacles_.begin(), extra_obstacles_.end());
    return out;
}

JetVec FieldProfile::raw_jets(cplx s, int order) const
{
    JetVec out;
    if (kind_ == Kind::nikitin) {
        const double b = nikitin_->b, k = nikitin_->delta_e / mu_;
        Jet5 u = Jet5::variable(s);
        u = u * u + Jet5(b * b);
        if (std::abs(u[0]) < 1e-300) throw Error(ErrorCode::pole_at_point, "pole of the Nikitin field");
        out[0] = pow(u, cplx(-1.5)) * k;
        out[1] = Jet5(0.0);
        out[2] = Jet5(k);
        return out;
    }
    static const double fact[5] = {1, 1, 2, 6, 24};
    for (int i = 0; i < 3; ++i)
        for (int kk = 0; kk <= order; ++kk) out[i][kk] = evaluate(derivs_[i][kk], s) / fact[kk];
    for (auto& j : out)
        for (std::size_t kk = 0; kk < 5; ++kk)
            if (!finite(j[kk])) throw Error(ErrorCode::pole_at_point, "field is singular at this point");
    return out;
}

JetVec FieldProfile::jets(cplx s, int order) const
{
    JetVec j = raw_jets(s, order);
    if (!rotated_) return j;
    JetVec r;
    for (int i = 0; i < 3; ++i) {
        r[i] = Jet5(0.0);
        for (int m = 0; m < 3; ++m) r[i] += j[m] * rot_[i][m];
    }
    return r;
}

Vec3c FieldProfile::components(cplx s) const
{
    JetVec j = jets(s, 0);
    return {j[0][0], j[1][0], j[2][0]};
}

std::string FieldProfile::describe() const
{
    std::ostringstream os;
    switch (kind_) {
    case Kind::nikitin:
        os << "nikitin(b=" << nikitin_->b << ", delta_e=" << nikitin_->delta_e << ", mu=" << mu_ << ")";
        break;
    case Kind::berman:
        os << "berman(f=" << print(berman_->f) << ", omega=" << berman_->omega << ", mu=" << mu_ << ")";
        break;
    case Kind::custom:
        os << "custom(" << print(derivs_[0][0]) << ", " << print(derivs_[1][0]) << ", "
           << print(derivs_[2][0]) << ", mu=" << mu_ << ")";
        break;
    }
    return os.str();
}

cplx branch_sqrt(cplx radicand, const std::optional<cplx>& hint)
{
    cplx r = std::sqrt(radicand);
    if (hint && std::abs(r - *hint) > std::abs(r + *hint)) r = -r;
    return r;
}

FieldSample eval_field(const FieldProfile& p, cplx s, const BranchHint& hint)
{
    JetVec j = p.jets(s, 1);
    FieldSample f;
    f.s = s;
    for (int i = 0; i < 3; ++i) {
        f.Bvec[i] = j[i][0];
        f.dBvec[i] = j[i][1];
    }
    const auto& B = f.Bvec;
    const auto& dB = f.dBvec;
    f.B2 = B[0] * B[0] + B[1] * B[1] + B[2] * B[2];
    cplx BdB = B[0] * dB[0] + B[1] * dB[1] + B[2] * dB[2];
    if (std::abs(f.B2) == 0.0 || std::abs(f.B2) <= 1e-12 * std::abs(2.0 * BdB))
        throw Error(ErrorCode::branch_ambiguity, "|B| vanishes at or next to this point");
    f.B = branch_sqrt(f.B2, hint.B);
    cplx rho2 = B[0] * B[0] + B[1] * B[1];
    f.rho = branch_sqrt(rho2, hint.rho);
    f.E_plus = p.mu() * f.B / 2.0;
    f.E_minus = -f.E_plus;
    f.cos_theta = B[2] / f.B;
    f.sin_theta = f.rho / f.B;
    const cplx I(0, 1);
    f.theta = -I * std::log((B[2] + I * f.rho) / f.B);
    if (std::abs(rho2) < 1e-300) {
        f.phi = 0.0;
        f.theta_dot = 0.0;
        f.phi_dot = 0.0;
    } else {
        f.phi = -I * std::log((B[0] + I * B[1]) / f.rho);
        f.theta_dot = (B[2] * BdB - f.B2 * dB[2]) / (f.B2 * f.rho);
        f.phi_dot = (B[0] * dB[1] - B[1] * dB[0]) / rho2;
    }
    return f;
}

cplx eval_F(const FieldProfile& p, cplx s, const BranchHint& hint)
{
    Vec3c B = p.components(s);
    cplx B2 = B[0] * B[0] + B[1] * B[1] + B[2] * B[2];
    double scale = std::abs(B[0]) + std::abs(B[1]) + std::abs(B[2]);
    cplx Bm = std::abs(B2) <= 1e-28 * scale * scale ? cplx{} : branch_sqrt(B2, hint.B);
    cplx den = Bm + B[2];
    if (std::abs(den) <= 1e-14 * scale) throw Error(ErrorCode::denominator_zero, "B + Bz = 0");
    return (Bm - B[2]) / den;
}

bool AssumptionReport::all_passed() const
{
    for (auto& c : checks)
        if (!c.passed) return false;
    return true;
}

const AssumptionCheck* AssumptionReport::find(const std::string& id) const
{
    for (auto& c : checks)
        if (c.id == id) return &c;
    return nullptr;
}

AssumptionReport validate_assumptions(const FieldProfile& p, const ProbeGrid& g)
{
    AssumptionReport rep;
    std::vector<Vec3c> samples;
    bool evaluable = true;
    std::string eval_msg;
    for (int i = 0; i < g.n_real; ++i) {
        double x = g.s_min + (g.s_max - g.s_min) * i / std::max(1, g.n_real - 1);
        try {
            samples.push_back(p.components(x));
        } catch (const Error& e) {
            evaluable = false;
            eval_msg = "not evaluable at s=" + std::to_string(x) + ": " + e.what();
            break;
        }
    }

    {
        double worst = 0;
        for (auto& B : samples)
            for (auto& c : B) worst = std::max(worst, std::fabs(c.imag()) / std::max(1.0, std::abs(c)));
        bool ok = evaluable && worst <= 1e-12;
        rep.checks.push_back({"1", "real field on the real axis", ok,
                              evaluable ? "max relative imaginary part " + std::to_string(worst) : eval_msg});
    }
    {
        double lo = INFINITY, hi = 0;
        for (auto& B : samples) {
            double m = std::sqrt(std::norm(B[0]) + std::norm(B[1]) + std::norm(B[2]));
            lo = std::min(lo, m);
            hi = std::max(hi, m);
        }
        bool ok = evaluable && lo > 1e-8 * std::max(hi, 1e-300);
        rep.checks.push_back({"2", "|B| bounded away from zero on the real axis", ok,
                              "min |B| = " + std::to_string(lo)});
    }
    {
        bool ok = true;
        std::string detail;
        for (double sign : {-1.0, 1.0}) {
            try {
                Vec3c a = p.components(sign * 1e5), b = p.components(sign * 1e6);
                double na = 0, diff = 0;
                for (int i = 0; i < 3; ++i) {
                    na += std::norm(b[i]);
                    diff += std::norm(a[i] - b[i]);
                }
                if (!std::isfinite(na) || na == 0 || std::sqrt(diff) > 1e-3 * std::sqrt(na)) {
                    ok = false;
                    detail += (sign < 0 ? "no finite limit at -inf; " : "no finite limit at +inf; ");
                }
            } catch (const Error&) {
                ok = false;
                detail += "not evaluable at large |s|; ";
            }
        }
        rep.checks.push_back({"3", "finite nonzero limits B(+-inf)", ok, detail.empty() ? "ok" : detail});
    }
    {
        double h = g.box_half_width;
        Box box{-h, h, -h, h};
        auto f = [&](cplx s) -> std::pair<cplx, cplx> {
            JetVec j = p.jets(s, 1);
            cplx v = 0, d = 0;
            for (auto& c : j) {
                v += c[0] * c[0];
                d += 2.0 * c[0] * c[1];
            }
            return {v, d};
        };
        bool simple_ok = true, regular_ok = true;
        std::string d1 = "ok", d2 = "ok";
        try {
            auto roots = find_roots(f, box, p.poles());
            // components that are not identically zero
            bool live[3] = {false, false, false};
            for (double x : {-1.3, 0.37, 2.1})
                for (int i = 0; i < 3; ++i)
                    if (std::abs(p.components(x)[i]) > 0) live[i] = true;
            for (auto& r : roots) {
                if (r.multiplicity > 1) {
                    simple_ok = false;
                    d1 = "multiple zero of B^2 near (" + std::to_string(r.z.real()) + ", " +
                         std::to_string(r.z.imag()) + ")";
                }
                Vec3c B = p.components(r.z);
                for (int i = 0; i < 3; ++i)
                    if (live[i] && (!finite(B[i]) || std::abs(B[i]) < 1e-8)) {
                        regular_ok = false;
                        d2 = "component " + std::to_string(i) + " vanishes or is singular at a zero of B^2";
                    }
            }
        } catch (const Error& e) {
            simple_ok = regular_ok = false;
            d1 = d2 = std::string("root search failed: ") + e.what();
        }
        rep.checks.push_back({"8a", "zeros of B^2 are simple", simple_ok, d1});
        rep.checks.push_back({"8c", "components regular and nonzero at zeros of B^2", regular_ok, d2});
    }
    return rep;
}

} // namespace adiabat
