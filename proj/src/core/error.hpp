#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mloc {

enum class ErrorCode {
    // generic
    Io,
    BadFormat,
    InvalidArgument,
    // smali corpus
    MissingClassDirective,
    UnterminatedMethod,
    NestedMethod,
    EmptyCorpus,
    // decompiler
    ToolNotConfigured,
    ToolFailed,
    NoSmaliProduced,
    // behavior knowledge base
    BadTaxonomy,
    BadFamilyTable,
    UnknownFamily,
    // prompt engine
    BadTemplate,
    EmptyExplanation,
    // llm gateway
    GatewayUnconfigured,
    AuthMissing,
    RateLimited,
    TransportError,
    CacheMiss,
    MockUnscripted,
    // response parser
    ParseError,
    // pipeline
    EmptyBehaviorSet,
    ParseBudgetExceeded,
    // evaluation
    ApkMismatch,
    UnknownBehaviorId,
    BadGroundTruth,
    DanglingVerdict,
    // verdict store
    CorruptVerdictFile,
    // config
    BadConfig,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string message)
        : std::runtime_error(std::move(message)), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

const char* error_code_name(ErrorCode code);

inline Error parse_error(std::string_view field, std::string_view reason) {
    return Error(ErrorCode::ParseError, std::string(field) + ": " + std::string(reason));
}

// RateLimited and TransportError are the only classes worth retrying.
inline bool is_retryable(ErrorCode code) {
    return code == ErrorCode::RateLimited || code == ErrorCode::TransportError;
}

}  // namespace mloc
