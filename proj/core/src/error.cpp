#include "adiabat/error.hpp"

namespace adiabat {

std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::syntax: return "syntax";
    case ErrorCode::unknown_identifier: return "unknown-identifier";
    case ErrorCode::pole_at_point: return "pole-at-point";
    case ErrorCode::domain_error: return "domain-error";
    case ErrorCode::branch_ambiguity: return "branch-ambiguity";
    case ErrorCode::invalid_parameter: return "invalid-parameter";
    case ErrorCode::denominator_zero: return "denominator-zero";
    case ErrorCode::turning_point_at_point: return "turning-point-at-point";
    case ErrorCode::coupling_zero: return "coupling-zero";
    case ErrorCode::multiplicity: return "multiplicity";
    case ErrorCode::count_mismatch: return "count-mismatch";
    case ErrorCode::step_collapse: return "step-collapse";
    case ErrorCode::precondition: return "precondition";
    case ErrorCode::structure_not_ned: return "structure-not-ned";
    case ErrorCode::tolerance_not_met: return "tolerance-not-met";
    case ErrorCode::singularity_on_path: return "singularity-on-path";
    case ErrorCode::endpoint_too_close: return "endpoint-too-close";
    case ErrorCode::argument_tracking: return "argument-tracking";
    case ErrorCode::non_canonical_path: return "non-canonical-path";
    case ErrorCode::strip_condition: return "strip-condition";
    case ErrorCode::wrong_field_class: return "wrong-field-class";
    case ErrorCode::norm_drift: return "norm-drift";
    case ErrorCode::final_theta: return "final-theta";
    case ErrorCode::tail_bound: return "tail-bound";
    case ErrorCode::insufficient_rows: return "insufficient-rows";
    case ErrorCode::validation: return "validation";
    }
    return "unknown";
}

bool is_validation(ErrorCode code)
{
    switch (code) {
    case ErrorCode::syntax:
    case ErrorCode::unknown_identifier:
    case ErrorCode::invalid_parameter:
    case ErrorCode::wrong_field_class:
    case ErrorCode::precondition:
    case ErrorCode::insufficient_rows:
    case ErrorCode::validation:
        return true;
    default:
        return false;
    }
}

} // namespace adiabat
