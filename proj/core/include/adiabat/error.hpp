#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace adiabat {

enum class ErrorCode {
    syntax,
    unknown_identifier,
    pole_at_point,
    domain_error,
    branch_ambiguity,
    invalid_parameter,
    denominator_zero,
    turning_point_at_point,
    coupling_zero,
    multiplicity,
    count_mismatch,
    step_collapse,
    precondition,
    structure_not_ned,
    tolerance_not_met,
    singularity_on_path,
    endpoint_too_close,
    argument_tracking,
    non_canonical_path,
    strip_condition,
    wrong_field_class,
    norm_drift,
    final_theta,
    tail_bound,
    insufficient_rows,
    validation,
};

std::string_view to_string(ErrorCode code);

// Validation errors come from bad input; everything else is numeric.
bool is_validation(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace adiabat
