#include "vpersona/error.hpp"

namespace vpersona {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::PreconditionError: return "PreconditionError";
    case ErrorCode::AllZeroCounts: return "AllZeroCounts";
    case ErrorCode::UnknownVariable: return "UnknownVariable";
    case ErrorCode::TransportError: return "TransportError";
    case ErrorCode::RateLimited: return "RateLimited";
    case ErrorCode::FixtureMiss: return "FixtureMiss";
    case ErrorCode::FixtureParseError: return "FixtureParseError";
    case ErrorCode::GenerationExhausted: return "GenerationExhausted";
    case ErrorCode::InfeasibleOneToOne: return "InfeasibleOneToOne";
    case ErrorCode::MissingAssignedTraits: return "MissingAssignedTraits";
    case ErrorCode::EmptyColumn: return "EmptyColumn";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::NotOrdinal: return "NotOrdinal";
    case ErrorCode::TooFewRespondents: return "TooFewRespondents";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::ZeroTotalVariance: return "ZeroTotalVariance";
    case ErrorCode::TooFewItems: return "TooFewItems";
    case ErrorCode::EmptyGroup: return "EmptyGroup";
    case ErrorCode::QuestionSetMismatch: return "QuestionSetMismatch";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::UnknownOptionLabel: return "UnknownOptionLabel";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::UsageError: return "UsageError";
    }
    return "Unknown";
}

} // namespace vpersona
