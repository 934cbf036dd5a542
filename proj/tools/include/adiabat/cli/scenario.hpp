#pragma once

// Scenario files: one JSON document describing the field, the T values and
// the numerical settings shared by all subcommands.

#include "adiabat/oracle.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace adiabat::cli {

enum class MethodChoice { automatic, two_tp, sum, nu, exact };

std::string_view to_string(MethodChoice m);
// Errors: validation.
MethodChoice parse_method(std::string_view text);

struct ModelSpec {
    std::string type;       // nikitin, berman, custom
    double b = 1.0;         // nikitin
    double delta_e = 2.0;   // nikitin
    std::string f;          // berman
    double omega = 1.0;     // berman
    std::string bx, by, bz; // custom
    std::vector<Pole> poles;
    std::vector<cplx> obstacles;
};

struct OutputPaths {
    std::optional<std::string> graph, amplitude, oracle, sweep, compare, compare_csv;
};

struct Scenario {
    ModelSpec model;
    double mu = 1.0;
    std::vector<double> T_list;  // from "T" or "T_list"
    bool single_T = false;
    IntegrationSettings integration;
    std::optional<Box> search_box;
    AmplitudeOptions amplitude;
    ExactLeadingOptions exact;
    GraphOptions graph;
    int chi_order = 0;
    MethodChoice method = MethodChoice::automatic;
    OutputPaths outputs;

    FieldProfile field() const;
};

// Errors: validation (bad JSON, missing or unknown keys, wrong types), plus
// whatever the expression parser reports for malformed components.
Scenario parse_scenario(std::string_view json_text);
Scenario load_scenario(const std::filesystem::path& path);

} // namespace adiabat::cli
