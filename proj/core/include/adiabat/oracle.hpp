#pragma once

// Reference transition probabilities from direct adaptive integration of the
// first-order amplitude systems, either along the real axis or along a path
// pushed into the lower half plane where the transition amplitude is not
// swamped by the adiabatic following term.

#include "adiabat/amplitudes.hpp"

#include <optional>
#include <vector>

namespace adiabat {

enum class Representation { a12, a_pm };
enum class OraclePath { automatic, real_axis, shifted };

std::string_view to_string(Representation r);
std::string_view to_string(OraclePath p);

struct IntegrationSettings {
    double s_min = -50.0;
    double s_max = 50.0;
    double rel_tol = 1e-10;
    // On shifted paths this is relative to the expected size of a_-.
    double abs_tol = 1e-12;
    long max_steps = 20'000'000;
    // Phase-table panels are at most this fraction of the distance to the
    // nearest singular point.
    double phase_resolution = 0.25;
    OraclePath path = OraclePath::automatic;
    // The shifted path follows the level curve -Im int_0^s mu B = h - margin/T
    // where h is the same quantity at the dominant lower turning point.
    double level_margin = 5.0;
    bool store_trajectory = true;

    // Errors: invalid-parameter.
    void validate() const;
};

struct OracleSample {
    cplx s;
    cplx a1, a2;  // (a1, a2) or (a+, a-)
    double norm;  // |a1|^2 + |a2|^2
};

// Quantities at the final point that the extraction needs.
struct EndpointData {
    cplx s;
    cplx phase;        // T int mu Bz (a12) or int omega (a_pm) from the path base
    BranchHint branch; // branch of B and rho at s
};

struct OracleTrajectory {
    Representation representation = Representation::a12;
    double T = 0.0;
    bool shifted = false;
    std::vector<cplx> path;   // polyline that was integrated
    std::vector<OracleSample> samples;
    cplx a1, a2;              // final amplitudes
    double max_norm_drift = 0.0; // real-axis runs only
    long steps = 0;
    EndpointData end;
};

// Errors: step-collapse, norm-drift (real axis, beyond 1e-8), invalid-parameter.
OracleTrajectory integrate_amplitude_system(const FieldProfile& field, double T,
                                            const IntegrationSettings& settings,
                                            Representation rep);

// Errors: final-theta when Theta at the end exceeds 1e-3.
TransitionResult extract_a_minus(const OracleTrajectory& traj, const FieldProfile& field, double T);

// Probability with the path chosen by settings.path (automatic: shifted when
// the field has turning points, a_pm representation there).
TransitionResult oracle_probability(const FieldProfile& field, double T,
                                    const IntegrationSettings& settings = {});

// Polyline for shifted runs: down from s_min to the start depth, along the
// level curve of -Im int_0^s mu B just inside the lower strip boundary, and
// down again at s_max.
struct ShiftedPathInfo {
    std::vector<cplx> path;
    double half_exponent = 0.0; // -Im int_0^{s1bar} mu B (straight-line estimate)
    double level = 0.0;         // value of -Im int_0^s mu B along the middle part
    double end_level = 0.0;     // value at the two deep ends
};
// Errors: precondition when there is no lower turning point or the level
// curve runs into a singular point.
ShiftedPathInfo shifted_path(const FieldProfile& field, double T, const IntegrationSettings& settings);

struct SweepRow {
    double T = 0.0;
    double P_oracle = 0.0;
    std::optional<double> P_adiabatic;
    std::optional<double> rel_diff;
    std::optional<double> exponent;
    std::optional<double> phase;
    std::optional<double> cos_factor;
    std::optional<int> winding_n12;
    bool near_zero = false; // |cos factor| < 0.1
};

// T_list must be positive and strictly ascending. Asymptotic columns are
// filled when `geo` is given. Jobs run on up to `threads` workers.
std::vector<SweepRow> sweep_T(const EffectivePotential& ep, const std::vector<double>& T_list,
                              const IntegrationSettings& settings, const ChainGeometry* geo,
                              unsigned threads = 1);

} // namespace adiabat
