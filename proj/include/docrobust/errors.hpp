#pragma once

#include <stdexcept>
#include <string>

namespace docrobust {

/// Base class for every error raised by the toolkit. `kind()` is the stable
/// machine-readable tag used in the CLI's JSON error records.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
    virtual const char* kind() const noexcept = 0;
};

class ParameterError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "parameter_error"; }
};

class TransformError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "transform_error"; }
};

class EvaluationError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "evaluation_error"; }
};

class ResourceError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "resource_error"; }
};

class IoError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "io_error"; }
};

class ValidationError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "validation_error"; }
};

} // namespace docrobust
