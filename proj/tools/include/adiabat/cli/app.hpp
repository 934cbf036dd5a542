#pragma once

// Subcommand dispatch. Exit codes: 0 success, 2 validation error, 3 numeric
// failure.

#include "adiabat/cli/scenario.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace adiabat::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_validation = 2;
inline constexpr int exit_numeric = 3;

// Worker count: hardware concurrency capped by ADIABAT_THREADS when set.
// Errors: validation for a malformed ADIABAT_THREADS.
unsigned thread_budget();

// Asymptotic probability by the selected method; `auto` resolves to exact
// when chi_order is 1, two_tp for two-point chains, the sum otherwise.
struct Asymptotics {
    FieldProfile field;
    EffectivePotential ep;
    StokesGraph graph;
    NedChain chain;
    ChainGeometry geo;
    MethodChoice method;
    int chi_order = 0;
    ExactLeadingOptions exact;

    explicit Asymptotics(const Scenario& sc);
    TransitionResult at(double T) const;
};

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace adiabat::cli
