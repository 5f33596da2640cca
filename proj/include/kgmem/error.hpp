#pragma once

#include <stdexcept>
#include <string>

namespace kgmem {

// Root of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Caller supplied something that violates a documented precondition.
class ValidationError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class NotFoundError : public Error {
public:
    using Error::Error;
};

// Relational store or index file failure.
class StorageError : public Error {
public:
    using Error::Error;
};

// Persisted state is internally inconsistent (e.g. a summary without any history).
class CorruptionError : public StorageError {
public:
    using StorageError::StorageError;
};

enum class ProviderErrorKind { Transport, HttpStatus, MalformedResponse, Timeout, InvalidRequest };

const char* to_string(ProviderErrorKind kind);

class ProviderError : public Error {
public:
    ProviderError(ProviderErrorKind kind, const std::string& what, int http_status = 0)
        : Error(what), kind_(kind), http_status_(http_status) {}

    ProviderErrorKind kind() const noexcept { return kind_; }
    int http_status() const noexcept { return http_status_; }

    bool retryable() const noexcept {
        switch (kind_) {
            case ProviderErrorKind::Transport:
            case ProviderErrorKind::Timeout:
                return true;
            case ProviderErrorKind::HttpStatus:
                return http_status_ == 429 || http_status_ >= 500;
            default:
                return false;
        }
    }

private:
    ProviderErrorKind kind_;
    int http_status_;
};

}  // namespace kgmem
