#pragma once

#include <stdexcept>
#include <string>

namespace bsw {

// Every failure mode the library reports carries one of these codes so
// callers (and tests) can dispatch on the condition, not the message text.
enum class ErrorCode {
    // record ingestion
    MissingCompanionFile,
    UnsupportedFormat,
    LeadCountMismatch,
    MalformedHeader,
    DuplicateLead,
    MissingLead,
    NonNumericCell,
    RaggedRow,
    InvalidRecord,
    // library persistence
    VersionMismatch,
    InvalidOccurrence,
    BeatLengthMismatch,
    MalformedLibrary,
    MalformedBundle,
    // filtering / segmentation
    CutoffOutOfRange,
    SignalTooShort,
    NotEnoughBeats,
    DegenerateFlatBeats,
    // warping
    LengthMismatch,
    NonFiniteInput,
    LineSearchUnderflow,
    NonPositiveRatio,
    // batch / orchestration
    EmptyInput,
    EmptyLibrary,
    ConfigError,
    IoError,
};

inline const char* error_code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::MissingCompanionFile: return "MissingCompanionFile";
        case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
        case ErrorCode::LeadCountMismatch: return "LeadCountMismatch";
        case ErrorCode::MalformedHeader: return "MalformedHeader";
        case ErrorCode::DuplicateLead: return "DuplicateLead";
        case ErrorCode::MissingLead: return "MissingLead";
        case ErrorCode::NonNumericCell: return "NonNumericCell";
        case ErrorCode::RaggedRow: return "RaggedRow";
        case ErrorCode::InvalidRecord: return "InvalidRecord";
        case ErrorCode::VersionMismatch: return "VersionMismatch";
        case ErrorCode::InvalidOccurrence: return "InvalidOccurrence";
        case ErrorCode::BeatLengthMismatch: return "BeatLengthMismatch";
        case ErrorCode::MalformedLibrary: return "MalformedLibrary";
        case ErrorCode::MalformedBundle: return "MalformedBundle";
        case ErrorCode::CutoffOutOfRange: return "CutoffOutOfRange";
        case ErrorCode::SignalTooShort: return "SignalTooShort";
        case ErrorCode::NotEnoughBeats: return "NotEnoughBeats";
        case ErrorCode::DegenerateFlatBeats: return "DegenerateFlatBeats";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::NonFiniteInput: return "NonFiniteInput";
        case ErrorCode::LineSearchUnderflow: return "LineSearchUnderflow";
        case ErrorCode::NonPositiveRatio: return "NonPositiveRatio";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::EmptyLibrary: return "EmptyLibrary";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
          code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
    throw Error(code, what);
}

}  // namespace bsw
