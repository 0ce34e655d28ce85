#pragma once

#include <stdexcept>
#include <string>

namespace turbsim {

/// Raised when an argument violates an operation's precondition.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a file (image or manifest) cannot be read or is invalid.
class LoadError : public std::runtime_error {
public:
    enum class Kind {
        MissingFile,
        MalformedJson,
        Schema,
        DuplicateId,
        DanglingReference,
        BboxOutOfBounds,
        Image,
    };

    LoadError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

/// Raised when an output file cannot be written.
class WriteError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace turbsim
