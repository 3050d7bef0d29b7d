#include "lingua_adapt/error.hpp"

namespace lingua_adapt {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::MalformedFile: return "MalformedFile";
    case ErrorCode::InvalidUtf8: return "InvalidUtf8";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::VocabTooSmall: return "VocabTooSmall";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::InvalidTokenId: return "InvalidTokenId";
    case ErrorCode::IncompatibleAlphabet: return "IncompatibleAlphabet";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::MissingAuxEmbedding: return "MissingAuxEmbedding";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyConstituents: return "EmptyConstituents";
    case ErrorCode::EmptySequence: return "EmptySequence";
    case ErrorCode::StepOutOfRange: return "StepOutOfRange";
    case ErrorCode::InvalidFraction: return "InvalidFraction";
    case ErrorCode::InvalidPrompt: return "InvalidPrompt";
    case ErrorCode::EmptyGeneration: return "EmptyGeneration";
    case ErrorCode::NonPositiveDuration: return "NonPositiveDuration";
    case ErrorCode::EmptyChoice: return "EmptyChoice";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptyCandidateSet: return "EmptyCandidateSet";
    case ErrorCode::NoSharedMetrics: return "NoSharedMetrics";
    case ErrorCode::Internal: return "Internal";
    }
    return "Unknown";
}

bool is_user_error(ErrorCode code) {
    switch (code) {
    case ErrorCode::IoError:
    case ErrorCode::Internal:
        return false;
    default:
        return true;
    }
}

} // namespace lingua_adapt
