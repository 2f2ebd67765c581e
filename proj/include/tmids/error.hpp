#pragma once

#include <stdexcept>
#include <string>

namespace tmids {

/// Broad failure categories. The CLI maps each onto an exit code.
enum class ErrorKind {
    Input,       // malformed data handed to an operation
    Structural,  // model/literal shape mismatch or a violated model invariant
    Config,      // invalid hyperparameters or flags
    Schema,      // CSV header or model layout mismatch
    Split,       // stratification / fold assignment impossible
    Io,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class InputError : public Error {
public:
    explicit InputError(const std::string& what) : Error(ErrorKind::Input, what) {}
};

class StructuralError : public Error {
public:
    explicit StructuralError(const std::string& what) : Error(ErrorKind::Structural, what) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

class SchemaError : public Error {
public:
    explicit SchemaError(const std::string& what) : Error(ErrorKind::Schema, what) {}
};

class SplitError : public Error {
public:
    explicit SplitError(const std::string& what) : Error(ErrorKind::Split, what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

}  // namespace tmids
