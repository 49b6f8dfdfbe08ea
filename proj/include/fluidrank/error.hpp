#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fluidrank {

enum class ErrorCode {
    InvalidArgument,
    UnsupportedWidth,
    WidthMismatch,
    SupplyTooLow,
    NonConvergence,
    InvalidSchedule,
    UnstableTimestep,
    InsufficientModalities,
    MissingPreference,
    ConfigurationMismatch,
    InvalidStudyConfig,
    ParseError,
};

const char* to_string(ErrorCode code);

/// Domain failure raised by every fluidrank module. The CLI maps these to exit
/// code 2 and the HTTP service maps them to 422.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

struct FieldIssue {
    std::string field;
    std::string message;
};

/// Input document failures that can be attributed to named fields. Thrown with
/// ParseError when the document shape is wrong and InvalidArgument when a value
/// is well-typed but outside its domain.
class FieldError : public Error {
public:
    FieldError(ErrorCode code, std::vector<FieldIssue> issues);

    const std::vector<FieldIssue>& issues() const noexcept { return issues_; }

private:
    std::vector<FieldIssue> issues_;
};

} // namespace fluidrank
