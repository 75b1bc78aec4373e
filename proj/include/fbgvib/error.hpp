#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fbgvib {

// Root of every error thrown by the library. Subclasses map onto the
// failure categories the CLI distinguishes (usage vs. runtime).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Argument outside an operation's domain (empty input, t out of range, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

// Inconsistent scenario / run configuration (Nyquist violation, unknown key, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Invalid physical parameters, or no parameter set satisfies the request.
class ParameterError : public Error {
public:
    using Error::Error;
};

// Forced undamped system exactly at an eigenfrequency.
class UndampedResonanceError : public Error {
public:
    using Error::Error;
};

// Filter cannot be realised as requested.
class DesignError : public Error {
public:
    using Error::Error;
};

// Sensor reading or derived measurement is unusable.
class MeasurementError : public Error {
public:
    using Error::Error;
};

// Least-squares fit is rank deficient.
class FitError : public Error {
public:
    using Error::Error;
};

// Sweep input malformed (unsorted or duplicate RPM values).
class InputError : public Error {
public:
    using Error::Error;
};

// Malformed file; carries the 1-based line number of the offending line.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Command line could not be understood.
class UsageError : public Error {
public:
    using Error::Error;
};

}  // namespace fbgvib
