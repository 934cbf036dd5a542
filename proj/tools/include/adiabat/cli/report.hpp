#pragma once

// Output formats: SVG renderings of Stokes graphs, sweep tables and the
// oracle-versus-asymptotics comparison report.

#include "adiabat/oracle.hpp"

#include <optional>
#include <string>
#include <vector>

namespace adiabat::cli {

inline constexpr const char* version = "0.1.0";

struct SvgStyle {
    int width = 800;
    int height = 800;
    double margin = 40.0;
    double marker_radius = 5.0;
    double cross_size = 6.0;
    bool allow_empty = true;
};

// Deterministic for identical input. Errors: precondition when the graph is
// empty and style.allow_empty is false.
std::string emit_graph_svg(const StokesGraph& g, const std::optional<NedChain>& chain,
                           const SvgStyle& style = {});

inline constexpr const char* sweep_header = "T,P_oracle,P_adiabatic,rel_diff,exponent,phase,winding_n12";

std::string sweep_csv(const std::vector<SweepRow>& rows);
// Errors: validation when the header lacks T or P_oracle or a row is malformed.
std::vector<SweepRow> parse_sweep_csv(std::string_view text);

struct DecayFit {
    double order = 0.0;     // slope of log|rel_diff| against log(1/T)
    double std_error = 0.0;
    double intercept = 0.0;
    int rows_used = 0;
};

struct CompareReport {
    std::vector<SweepRow> rows;
    std::vector<bool> used;       // row entered the fit
    std::optional<DecayFit> fit;  // null with fewer than 3 usable rows
    std::vector<std::string> warnings;
};

// Least-squares fit on rows that carry both probabilities and are not near
// an interference zero. Errors: validation when no row has an asymptotic
// probability (single-method table).
CompareReport compare_report(const std::vector<SweepRow>& rows);

std::string compare_json(const CompareReport& r, std::string_view method);
std::string compare_csv(const CompareReport& r);

// Shortest round-trip decimal form used in all tables.
std::string format_number(double v);

} // namespace adiabat::cli
