#pragma once

// Adiabatic transition amplitudes of an NED system from its turning-point
// chain: the interference sum, the two-point and Berman-class closed forms,
// the connection-matrix form and the first-order chi correction.

#include "adiabat/stokes.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace adiabat {

enum class Method { adiabatic_sum, two_tp, nikitin_umanskii, exact_leading, oracle };
std::string_view to_string(Method m);

struct TransitionResult {
    Method method = Method::adiabatic_sum;
    double T = 0.0;
    // a_- up to the undetermined overall factor i^l; `l` records the choice.
    cplx amplitude;
    int l = 0;
    double P = 0.0;
    // Im int_{s1bar}^{s1} (mu T B - phi' cos Theta) ds
    double exponent = 0.0;
    // Per chain point k: pi (n_{s1 sk} - n_{sk sn}) / 4 - Re(J_{1k} - J_{kn}) / 2
    std::vector<double> phases;
    // Two-point interference: argument and value of the cosine factor.
    std::optional<double> interference_phase;
    std::optional<double> cos_factor;
    int n_bar = 0;                 // n_{s1bar s1}
    std::vector<int> n_first;      // n_{s1 sk}
    std::vector<int> n_last;       // n_{sk sn}
    double error = 0.0;            // absolute error estimate of the exponent
    std::optional<double> tail_bound;
    bool fallback = false;
    std::string note;
};

std::string to_json(const TransitionResult& r);

struct AmplitudeOptions {
    int l = 0;
    DetourSide detour = DetourSide::upper;
    int refine = 1; // split every path segment into this many pieces
    double clearance = 0.05;
    ActionOptions action;
};

// T-independent ingredients of the interference formulas. J(T) = T A - C with
// A = int mu B and C = int phi' cos Theta along the stored paths.
struct ChainGeometry {
    cplx s1bar;
    std::vector<cplx> chain;          // s1..sn
    std::vector<cplx> lower_chain;    // s1bar..snbar
    std::vector<cplx> obstacles;      // poles and zeros of Bz +- B
    ContourPath path_bar;             // s1bar -> s1
    std::vector<ContourPath> paths_first; // s1 -> sk (k = 2..n at index k-1)
    std::vector<ContourPath> paths_last;  // sk -> sn
    ContourPath path_open_bar;        // s1bar -> 0
    ContourPath path_open_last;       // sn -> 0
    cplx A_bar, C_bar;
    std::vector<cplx> A_first, C_first, A_last, C_last;
    cplx A_open, C_open;
    int n_bar = 0;
    std::vector<int> n_first, n_last;
    bool strip_clear = true;
    double error = 0.0;
    AmplitudeOptions options;
};

ChainGeometry chain_geometry(const EffectivePotential& ep, const StokesGraph& g, const NedChain& chain,
                             const AmplitudeOptions& opts = {});

// Zeros of Bx^2 + By^2 (where Bz +- B vanishes on one sheet) inside the box.
std::vector<cplx> f_map_obstacles(const FieldProfile& field, const Box& box);

// Closed loop of half-width r around a path, left side first.
ContourPath tube_around(const ContourPath& path, double r);

TransitionResult adiabatic_amplitude(const ChainGeometry& geo, double T);
// Errors: precondition unless the chain has two points. Falls back to the sum
// (flagged) when a zero of Bz +- B lies inside the strip.
TransitionResult two_tp_amplitude(const ChainGeometry& geo, double T);

// Berman-class form with its own integrand sqrt((Omega/mu)^2 + f^2) and the
// winding n_{s1 s2} = 2 built in. Errors: wrong-field-class, precondition.
TransitionResult nikitin_umanskii_probability(const EffectivePotential& ep, const ChainGeometry& geo,
                                              double T);

struct ConnectionMatrices {
    double T = 0.0;
    std::vector<cplx> s, sbar;          // turning points of q2 at this T
    std::vector<cplx> alpha;            // alpha_{kbar,k}, k = 1..n
    std::vector<cplx> beta, beta_bar;   // beta_k, beta_kbar, k = 2..n (index k-2)
    std::vector<std::array<std::array<cplx, 2>, 2>> M; // M_1..M_n
    std::array<std::array<cplx, 2>, 2> product{};
    cplx chi = 1.0;                     // overall chi factor on M21
    double error = 0.0;
};

// Zeros of q2(., T) obtained by Newton from the adiabatic chain points.
cplx polish_q2_zero(const EffectivePotential& ep, cplx s0, double T);

ConnectionMatrices connection_matrices(const EffectivePotential& ep, const ChainGeometry& geo, double T,
                                       int chi_order = 0);

struct ExactLeadingOptions {
    double s_max = 50.0;
    double tail_tolerance = 1e-3;
    int chi_order = 0;
};

TransitionResult exact_leading_amplitude(const EffectivePotential& ep, const ChainGeometry& geo, double T,
                                         const ExactLeadingOptions& opts = {});

struct ChiResult {
    cplx correction;
    int sigma = 1;
};

// First term of the chi series along `path` (from the singular end to s):
// (-sigma / 2iT) int Omega(xi) (1 - exp(-2 sigma i T (W(s) - W(xi)))) dxi.
// Errors: non-canonical-path when Im W is not monotone along the path.
ChiResult chi_first_order(const EffectivePotential& ep, const ContourPath& path, double T,
                          KernelMode mode = KernelMode::full_q2);

} // namespace adiabat
