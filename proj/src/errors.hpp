#pragma once

#include <stdexcept>
#include <string>

namespace typeclust {

// Bad argument or precondition violation.
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Missing, unreadable, or unwritable file.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// File exists but its contents are not in a supported format.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Optimization produced a non-finite value.
class TrainingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace typeclust
