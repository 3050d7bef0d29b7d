#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lingua_adapt {

enum class ErrorCode {
    FileNotFound,
    IoError,
    MalformedRecord,
    MalformedFile,
    InvalidUtf8,
    InvalidArgument,
    VocabTooSmall,
    EmptyCorpus,
    InvalidTokenId,
    IncompatibleAlphabet,
    BadMagic,
    ShapeMismatch,
    NonFiniteValue,
    MissingAuxEmbedding,
    DimensionMismatch,
    EmptyConstituents,
    EmptySequence,
    StepOutOfRange,
    InvalidFraction,
    InvalidPrompt,
    EmptyGeneration,
    NonPositiveDuration,
    EmptyChoice,
    LengthMismatch,
    EmptyCandidateSet,
    NoSharedMetrics,
    Internal,
};

std::string_view to_string(ErrorCode code);

// User/input errors map to exit code 2 in the CLI, everything else to 1.
bool is_user_error(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

} // namespace lingua_adapt
