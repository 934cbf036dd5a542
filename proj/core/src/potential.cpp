#include "adiabat/potential.hpp"

#include <cmath>

namespace adiabat {

namespace {

const cplx I(0, 1);

bool finite(const Jet5& j, int upto)
{
    for (int k = 0; k <= upto; ++k)
        if (!std::isfinite(j[k].real()) || !std::isfinite(j[k].imag())) return false;
    return true;
}

} // namespace

EffectivePotential::EffectivePotential(FieldProfile field, PotentialOptions opts)
    : field_(std::move(field)), opts_(opts) {}

Jet5 EffectivePotential::q0_jet(cplx s) const
{
    const double mu = field_.mu();
    Jet5 q;
    if (auto np = field_.nikitin_params()) {
        // (de^2/4)(1 + (b^2+s^2)^-3), free of the branch of Bx
        Jet5 u = Jet5::variable(s);
        u = u * u + Jet5(np->b * np->b);
        if (std::abs(u[0]) < 1e-300) throw Error(ErrorCode::pole_at_point, "pole of q0");
        q = (ipow(u, -3) + Jet5(1.0)) * (np->delta_e * np->delta_e / 4.0);
    } else {
        JetVec B = field_.jets(s);
        q = (B[0] * B[0] + B[1] * B[1] + B[2] * B[2]) * (mu * mu / 4.0);
    }
    if (!finite(q, 4)) throw Error(ErrorCode::pole_at_point, "q0 is singular at this point");
    return q;
}

cplx EffectivePotential::eval_q0(cplx s) const { return q0_jet(s)[0]; }

Jet5 EffectivePotential::q2_jet(cplx s, double T) const
{
    if (!(T > 0)) throw Error(ErrorCode::invalid_parameter, "T must be positive");
    const double mu = field_.mu();
    JetVec B = field_.jets(s);
    Jet5 c = B[0] + B[1] * I;
    if (std::abs(c[0]) < 1e-300)
        throw Error(ErrorCode::coupling_zero, "Bx + i By vanishes at this point");
    Jet5 r = c.differentiated() / c;  // orders 0..3
    Jet5 dz = B[2].differentiated();  // orders 0..3
    Jet5 q0 = q0_jet(s);
    Jet5 t1 = (dz - B[2] * r) * (-I * mu / (2.0 * T));
    Jet5 t2 = (r.differentiated() - r * r * 0.5) * (1.0 / (2.0 * T * T));
    Jet5 q = q0 + t1 + t2;
    for (int k = 3; k < 5; ++k) q[k] = 0.0;
    if (!finite(q, 2)) throw Error(ErrorCode::pole_at_point, "q2 is singular at this point");
    return q;
}

cplx EffectivePotential::eval_q2(cplx s, double T) const { return q2_jet(s, T)[0]; }

Jet5 EffectivePotential::langer_jet(cplx s) const
{
    Jet5 d(0.0);
    for (auto& p : field_.poles()) {
        Jet5 u = Jet5::variable(s) - Jet5(p.location);
        if (std::abs(u[0]) < 1e-300) throw Error(ErrorCode::pole_at_point, "Langer term at its pole");
        d += ipow(u, -2) * 0.25;
    }
    return d;
}

cplx omega_kernel(const Jet5& q, cplx delta, const std::optional<cplx>& sqrt_hint)
{
    if (std::abs(q[0]) < 1e-300)
        throw Error(ErrorCode::turning_point_at_point, "Omega kernel at a turning point");
    cplx r = branch_sqrt(q[0], sqrt_hint);
    cplx q1 = q.derivative(1), q2 = q.derivative(2);
    cplx r3 = r * q[0], r5 = r3 * q[0];
    return delta / r - 0.25 * q2 / r3 + (5.0 / 16.0) * q1 * q1 / r5;
}

cplx EffectivePotential::omega(cplx s, double T, KernelMode mode,
                               const std::optional<cplx>& sqrt_hint) const
{
    Jet5 q = mode == KernelMode::adiabatic_q0 ? q0_jet(s) : q2_jet(s, T);
    cplx delta = 0.0;
    if (opts_.langer_for_kernel && !field_.poles().empty()) {
        Jet5 d = langer_jet(s);
        q += d * (1.0 / (T * T));
        delta = d[0];
    }
    return omega_kernel(q, delta, sqrt_hint);
}

cplx c1_log_derivative_polar(const FieldSample& f)
{
    cplx BdB = f.Bvec[0] * f.dBvec[0] + f.Bvec[1] * f.dBvec[1] + f.Bvec[2] * f.dBvec[2];
    cplx dBmag = BdB / f.B;
    return dBmag / f.B + f.theta_dot * f.cos_theta / f.sin_theta + I * f.phi_dot;
}

} // namespace adiabat
