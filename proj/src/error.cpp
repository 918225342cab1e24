#include "cantorlap/error.hpp"

namespace cantorlap {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::kInvalidArgument: return "InvalidArgument";
        case ErrorCode::kNotPrimitive: return "NotPrimitive";
        case ErrorCode::kZeroLine: return "ZeroLine";
        case ErrorCode::kConvergenceFailure: return "ConvergenceFailure";
        case ErrorCode::kCapacityExceeded: return "CapacityExceeded";
        case ErrorCode::kLengthMismatch: return "LengthMismatch";
        case ErrorCode::kDegenerateCylinder: return "DegenerateCylinder";
        case ErrorCode::kInvalidPath: return "InvalidPath";
        case ErrorCode::kNonPrimitiveBlockShift: return "NonPrimitiveBlockShift";
        case ErrorCode::kGramSchmidtBreakdown: return "GramSchmidtBreakdown";
        case ErrorCode::kGammaTooSmall: return "GammaTooSmall";
        case ErrorCode::kLevelExceedsTable: return "LevelExceedsTable";
        case ErrorCode::kTableIncomplete: return "TableIncomplete";
        case ErrorCode::kInsufficientRange: return "InsufficientRange";
        case ErrorCode::kTruncationError: return "TruncationError";
        case ErrorCode::kDivisionByZero: return "DivisionByZero";
        case ErrorCode::kNotApplicable: return "NotApplicable";
        case ErrorCode::kRankDeficiency: return "RankDeficiency";
        case ErrorCode::kThresholdViolation: return "ThresholdViolation";
        case ErrorCode::kSingularGram: return "SingularGram";
        case ErrorCode::kNotRational: return "NotRational";
        case ErrorCode::kConfigError: return "ConfigError";
    }
    return "Unknown";
}

}  // namespace cantorlap
