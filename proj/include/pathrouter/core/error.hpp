#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace pathrouter {

enum class ErrorCode {
    // rule engine
    ParseError,
    DuplicateRuleId,
    InvalidPriority,
    EmptyQuery,
    JudgeUnavailable,
    JudgeError,
    // meta-cache
    ProviderError,
    DimensionMismatch,
    NormalizationError,
    SnapshotError,
    // router / evolution
    EmptyBatch,
    ExpertClientError,
    InvalidProposedRules,
    DegenerateReport,
    ReportVersionMismatch,
    // retrieval
    DuplicateDocId,
    HeaderlessTable,
    UnsafeStatement,
    UnknownColumn,
    UnknownTable,
    ExecutionError,
    NoTableFound,
    // qa pipeline
    TemplateMissing,
    ClientError,
    MissingFixture,
    // harness
    SchemaError,
    MissingAnswer,
    ConfigError,
    IOError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Base error for the whole library. `code()` identifies the failure class;
/// what() carries the detail.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& detail);
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Malformed rule document or condition. Line numbers are 1-based; 0 means
/// the error is not tied to a line (e.g. a bare condition string).
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& reason);
    std::size_t line() const noexcept { return line_; }
    const std::string& reason() const noexcept { return reason_; }

private:
    std::size_t line_;
    std::string reason_;
};

}  // namespace pathrouter
