#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace vpersona {

/// Machine-readable failure categories. The CLI prints the code name verbatim
/// as the first token of its one-line error report.
enum class ErrorCode {
    InvalidArgument,
    PreconditionError,
    AllZeroCounts,
    UnknownVariable,
    TransportError,
    RateLimited,
    FixtureMiss,
    FixtureParseError,
    GenerationExhausted,
    InfeasibleOneToOne,
    MissingAssignedTraits,
    EmptyColumn,
    LengthMismatch,
    NotOrdinal,
    TooFewRespondents,
    ShapeMismatch,
    ZeroTotalVariance,
    TooFewItems,
    EmptyGroup,
    QuestionSetMismatch,
    SchemaError,
    UnknownOptionLabel,
    ConfigError,
    IoError,
    UsageError,
};

[[nodiscard]] std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

/// Raised by the pipeline when one of its stages fails; keeps the code of the
/// underlying failure so callers can still branch on it.
class StageError : public Error {
  public:
    StageError(std::string stage, ErrorCode code, const std::string& message)
        : Error(code, "stage '" + stage + "' failed: " + message), stage_(std::move(stage)) {}

    [[nodiscard]] const std::string& stage() const noexcept { return stage_; }

  private:
    std::string stage_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
    if (!condition) {
        fail(code, message);
    }
}

} // namespace vpersona
