#include "pathrouter/core/error.hpp"

namespace pathrouter {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::DuplicateRuleId: return "DuplicateRuleId";
        case ErrorCode::InvalidPriority: return "InvalidPriority";
        case ErrorCode::EmptyQuery: return "EmptyQuery";
        case ErrorCode::JudgeUnavailable: return "JudgeUnavailable";
        case ErrorCode::JudgeError: return "JudgeError";
        case ErrorCode::ProviderError: return "ProviderError";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::NormalizationError: return "NormalizationError";
        case ErrorCode::SnapshotError: return "SnapshotError";
        case ErrorCode::EmptyBatch: return "EmptyBatch";
        case ErrorCode::ExpertClientError: return "ExpertClientError";
        case ErrorCode::InvalidProposedRules: return "InvalidProposedRules";
        case ErrorCode::DegenerateReport: return "DegenerateReport";
        case ErrorCode::ReportVersionMismatch: return "ReportVersionMismatch";
        case ErrorCode::DuplicateDocId: return "DuplicateDocId";
        case ErrorCode::HeaderlessTable: return "HeaderlessTable";
        case ErrorCode::UnsafeStatement: return "UnsafeStatement";
        case ErrorCode::UnknownColumn: return "UnknownColumn";
        case ErrorCode::UnknownTable: return "UnknownTable";
        case ErrorCode::ExecutionError: return "ExecutionError";
        case ErrorCode::NoTableFound: return "NoTableFound";
        case ErrorCode::TemplateMissing: return "TemplateMissing";
        case ErrorCode::ClientError: return "ClientError";
        case ErrorCode::MissingFixture: return "MissingFixture";
        case ErrorCode::SchemaError: return "SchemaError";
        case ErrorCode::MissingAnswer: return "MissingAnswer";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::IOError: return "IOError";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

ParseError::ParseError(std::size_t line, const std::string& reason)
    : Error(ErrorCode::ParseError,
            line ? "line " + std::to_string(line) + ": " + reason : reason),
      line_(line),
      reason_(reason) {}

}  // namespace pathrouter
