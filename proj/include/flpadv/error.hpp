#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace flpadv {

// Base of every error raised by the library. `code()` is the stable
// snake_case identifier used in the HTTP error envelope.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

class SchemaViolation : public Error {
public:
    explicit SchemaViolation(const std::string& message) : Error("schema_violation", message) {}
};

class EmptyStore : public Error {
public:
    EmptyStore() : Error("empty_store", "knowledge base contains no Problem nodes") {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& message) : Error("io_error", message) {}
};

class FormatError : public Error {
public:
    explicit FormatError(const std::string& message) : Error("format_error", message) {}
};

class HeaderMismatch : public Error {
public:
    explicit HeaderMismatch(std::vector<std::string> missing)
        : Error("header_mismatch", describe(missing)), missing_(std::move(missing)) {}

    const std::vector<std::string>& missing() const noexcept { return missing_; }

private:
    static std::string describe(const std::vector<std::string>& missing) {
        std::string out = "missing required column(s):";
        for (const auto& m : missing) out += " " + m;
        return out;
    }
    std::vector<std::string> missing_;
};

class ProviderError : public Error {
public:
    explicit ProviderError(const std::string& message) : Error("provider_error", message) {}
};

class EmptyIndex : public Error {
public:
    EmptyIndex() : Error("empty_index", "no problems have been embedded") {}
};

// Raised when an embedding cannot be indexed (zero vector, wrong dimension).
class IndexingError : public Error {
public:
    explicit IndexingError(const std::string& message) : Error("indexing_error", message) {}
};

class UnknownEntity : public Error {
public:
    UnknownEntity(std::string field, std::string name, std::vector<std::string> suggestions)
        : Error("unknown_entity", "unknown " + field + " '" + name + "'"),
          field_(std::move(field)),
          name_(std::move(name)),
          suggestions_(std::move(suggestions)) {}

    const std::string& field() const noexcept { return field_; }
    const std::string& name() const noexcept { return name_; }
    const std::vector<std::string>& suggestions() const noexcept { return suggestions_; }

private:
    std::string field_;
    std::string name_;
    std::vector<std::string> suggestions_;
};

class MalformedResponse : public Error {
public:
    explicit MalformedResponse(const std::string& message) : Error("malformed_response", message) {}
};

class EmptyEvidence : public Error {
public:
    EmptyEvidence() : Error("empty_evidence", "no graph, vector, or cluster evidence for the query") {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& message) : Error("config_error", message) {}
};

struct FieldError {
    std::string field;
    std::string message;

    bool operator==(const FieldError&) const = default;
};

class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<FieldError> errors)
        : Error("validation_error", describe(errors)), errors_(std::move(errors)) {}

    const std::vector<FieldError>& errors() const noexcept { return errors_; }

private:
    static std::string describe(const std::vector<FieldError>& errors) {
        std::string out = "invalid record:";
        for (const auto& e : errors) out += " " + e.field + " (" + e.message + ");";
        return out;
    }
    std::vector<FieldError> errors_;
};

}  // namespace flpadv
