#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace minsurf {

enum class ErrorCode {
    NonConvergent,
    EvaluationOutsideDomain,
    PathNotFound,
    TooCloseToBoundary,
    DegenerateDomain,
    PoleMismatch,
    RealPeriodsNonzero,
    MetricDegenerate,
    UnreachableBoundary,
    ConstructionFailed,
    NoConvergence,
    SingularJacobian,
    ZeroOnContour,
    NonIntegerResult,
    OrderMismatch,
    PointOutsideNeighborhood,
    ProximityTooLarge,
    ReferenceComponentDegenerate,
    ConfigInvalid,
    SymmetryViolated,
    ScheduleInvalid,
    ParseError,
    InvalidArgument,
};

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::NonConvergent: return "NonConvergent";
    case ErrorCode::EvaluationOutsideDomain: return "EvaluationOutsideDomain";
    case ErrorCode::PathNotFound: return "PathNotFound";
    case ErrorCode::TooCloseToBoundary: return "TooCloseToBoundary";
    case ErrorCode::DegenerateDomain: return "DegenerateDomain";
    case ErrorCode::PoleMismatch: return "PoleMismatch";
    case ErrorCode::RealPeriodsNonzero: return "RealPeriodsNonzero";
    case ErrorCode::MetricDegenerate: return "MetricDegenerate";
    case ErrorCode::UnreachableBoundary: return "UnreachableBoundary";
    case ErrorCode::ConstructionFailed: return "ConstructionFailed";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::SingularJacobian: return "SingularJacobian";
    case ErrorCode::ZeroOnContour: return "ZeroOnContour";
    case ErrorCode::NonIntegerResult: return "NonIntegerResult";
    case ErrorCode::OrderMismatch: return "OrderMismatch";
    case ErrorCode::PointOutsideNeighborhood: return "PointOutsideNeighborhood";
    case ErrorCode::ProximityTooLarge: return "ProximityTooLarge";
    case ErrorCode::ReferenceComponentDegenerate: return "ReferenceComponentDegenerate";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::SymmetryViolated: return "SymmetryViolated";
    case ErrorCode::ScheduleInvalid: return "ScheduleInvalid";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so that
/// callers (and the scenario runner) can branch on the kind of failure.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

} // namespace minsurf
