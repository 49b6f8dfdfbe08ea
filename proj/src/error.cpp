#include "fluidrank/error.hpp"

namespace fluidrank {

const char* to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::UnsupportedWidth: return "UnsupportedWidth";
    case ErrorCode::WidthMismatch: return "WidthMismatch";
    case ErrorCode::SupplyTooLow: return "SupplyTooLow";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::InvalidSchedule: return "InvalidSchedule";
    case ErrorCode::UnstableTimestep: return "UnstableTimestep";
    case ErrorCode::InsufficientModalities: return "InsufficientModalities";
    case ErrorCode::MissingPreference: return "MissingPreference";
    case ErrorCode::ConfigurationMismatch: return "ConfigurationMismatch";
    case ErrorCode::InvalidStudyConfig: return "InvalidStudyConfig";
    case ErrorCode::ParseError: return "ParseError";
    }
    return "Unknown";
}

namespace {

std::string join_issues(const std::vector<FieldIssue>& issues) {
    std::string text;
    for (const auto& issue : issues) {
        if (!text.empty()) text += "; ";
        text += issue.field + ": " + issue.message;
    }
    return text;
}

} // namespace

FieldError::FieldError(ErrorCode code, std::vector<FieldIssue> issues)
    : Error(code, join_issues(issues)), issues_(std::move(issues)) {}

} // namespace fluidrank
