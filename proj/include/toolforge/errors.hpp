#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace toolforge {

/// Base of every error the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition of an operation was violated by the caller.
class ContractError : public Error {
public:
    using Error::Error;
};

class SyntaxError : public Error {
public:
    SyntaxError(std::size_t position, std::string expected);

    std::size_t position() const noexcept { return position_; }
    const std::string& expected() const noexcept { return expected_; }

private:
    std::size_t position_;
    std::string expected_;
};

/// One problem found while validating an API definition document.
struct SchemaDefect {
    std::string kind;   // missing | unknown_kind | dangling_required | invalid
    std::string path;   // dotted location, e.g. "parameters.properties.x"
    std::string detail;

    bool operator==(const SchemaDefect&) const = default;
};

class SchemaError : public Error {
public:
    explicit SchemaError(std::vector<SchemaDefect> defects);

    const std::vector<SchemaDefect>& defects() const noexcept { return defects_; }
    bool has(const std::string& kind, const std::string& detail = {}) const;

private:
    std::vector<SchemaDefect> defects_;
};

class IoError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// Backend failures. BackendError is the common base the pipeline maps to exit code 4.
class BackendError : public Error {
public:
    using Error::Error;
};

class TransportError : public BackendError {
public:
    using BackendError::BackendError;
};

class RateLimited : public BackendError {
public:
    using BackendError::BackendError;
};

class Refusal : public BackendError {
public:
    using BackendError::BackendError;
};

class ScoringUnsupported : public BackendError {
public:
    using BackendError::BackendError;
};

class ScriptParseError : public Error {
public:
    using Error::Error;
};

// Synthesis / generation failures.
class ExtractionError : public Error {
public:
    using Error::Error;
};

class RejectedGeneration : public Error {
public:
    using Error::Error;
};

class EmptyTree : public Error {
public:
    using Error::Error;
};

class ConsistencyFailure : public Error {
public:
    using Error::Error;
};

class TypeUnsatisfied : public Error {
public:
    using Error::Error;
};

class TokenizationEmpty : public Error {
public:
    using Error::Error;
};

class EmptyCalibrationSet : public Error {
public:
    using Error::Error;
};

class VerdictParseError : public Error {
public:
    using Error::Error;
};

// Sampler failures.
class InsufficientCorpus : public Error {
public:
    using Error::Error;
};

class MissingScores : public Error {
public:
    using Error::Error;
};

class UnresolvedDomainPath : public Error {
public:
    using Error::Error;
};

class TooFewClusters : public Error {
public:
    using Error::Error;
};

}  // namespace toolforge
