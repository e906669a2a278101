#pragma once

#include <stdexcept>
#include <string>

namespace drmime {

// Base error for everything thrown by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Unreadable/unwritable/malformed files.
class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

// Bad parameters, shape mismatches, violated preconditions.
class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& msg) : Error(msg) {}
};

// NaN/Inf escaping a computation, singular matrices, empty overlaps.
class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& msg) : Error(msg) {}
};

} // namespace drmime
