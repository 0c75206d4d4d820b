#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace leafnet {

enum class ErrorCode {
    IoError,
    NoClasses,
    EmptyClass,
    ClassTooSmall,
    IndexOutOfRange,
    MalformedManifest,
    UnsupportedFormat,
    InvalidKernel,
    InvalidSize,
    EmptyInput,
    InvalidRange,
    InvalidArchitecture,
    InvalidShape,
    EmptyDataset,
    Diverged,
    LengthMismatch,
    InvalidLabel,
    EmptyCounts,
    InvalidRatio,
    InvalidConfig,
    MalformedCheckpoint,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::NoClasses: return "NoClasses";
    case ErrorCode::EmptyClass: return "EmptyClass";
    case ErrorCode::ClassTooSmall: return "ClassTooSmall";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::MalformedManifest: return "MalformedManifest";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::InvalidKernel: return "InvalidKernel";
    case ErrorCode::InvalidSize: return "InvalidSize";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::InvalidRange: return "InvalidRange";
    case ErrorCode::InvalidArchitecture: return "InvalidArchitecture";
    case ErrorCode::InvalidShape: return "InvalidShape";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::Diverged: return "Diverged";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::InvalidLabel: return "InvalidLabel";
    case ErrorCode::EmptyCounts: return "EmptyCounts";
    case ErrorCode::InvalidRatio: return "InvalidRatio";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::MalformedCheckpoint: return "MalformedCheckpoint";
    }
    return "Unknown";
}

/// Single exception type for the library; `code()` identifies the failure.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Raised by the trainer when the loss stops being finite.
class DivergedError : public Error {
public:
    explicit DivergedError(int epoch)
        : Error(ErrorCode::Diverged, "loss is not finite at epoch " + std::to_string(epoch)), epoch_(epoch) {}

    int epoch() const noexcept { return epoch_; }

private:
    int epoch_;
};

} // namespace leafnet
