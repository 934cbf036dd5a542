#pragma once

// Effective potential of the second-order equation b'' + T^2 q2 b = 0 obtained
// from the interaction-picture amplitude system, its adiabatic limit q0, and
// the Omega kernel of the first-order amplitude-ratio correction.

#include "adiabat/field.hpp"

#include <optional>

namespace adiabat {

struct PotentialOptions {
    // Add the pole term to q when building the Omega kernel.
    bool langer_for_kernel = true;
};

enum class KernelMode { adiabatic_q0, full_q2 };

class EffectivePotential {
public:
    explicit EffectivePotential(FieldProfile field, PotentialOptions opts = {});

    const FieldProfile& field() const { return field_; }
    const std::vector<Pole>& poles() const { return field_.poles(); }
    const PotentialOptions& options() const { return opts_; }

    // q0 = mu^2 B^2 / 4, meromorphic; all five coefficients valid.
    Jet5 q0_jet(cplx s) const;
    cplx eval_q0(cplx s) const;

    // q2 = mu^2 B^2/4 - (i mu / 2T)(Bz' - Bz c1'/c1) + (1/2T^2)((c1'/c1)' - (c1'/c1)^2/2)
    // with c1'/c1 = (Bx' + i By')/(Bx + i By). Coefficients 0..2 valid.
    Jet5 q2_jet(cplx s, double T) const;
    cplx eval_q2(cplx s, double T) const;

    // sum over declared poles z of 1/(4 (s - z)^2)
    Jet5 langer_jet(cplx s) const;
    cplx langer_delta(cplx s) const { return langer_jet(s)[0]; }

    // Omega at s for q~ = q + delta/T^2 (delta only if langer_for_kernel).
    cplx omega(cplx s, double T, KernelMode mode,
               const std::optional<cplx>& sqrt_hint = std::nullopt) const;

private:
    FieldProfile field_;
    PotentialOptions opts_;
};

// Omega = delta/q~^(1/2) - q~''/(4 q~^(3/2)) + 5 q~'^2/(16 q~^(5/2)); the root of
// q~ is chosen nearest to sqrt_hint when given.
cplx omega_kernel(const Jet5& qtilde, cplx delta, const std::optional<cplx>& sqrt_hint = std::nullopt);

// c1'/c1 through the polar angles: B'/B + Theta' cot(Theta) + i phi'.
cplx c1_log_derivative_polar(const FieldSample& f);

} // namespace adiabat
