#pragma once

#include <stdexcept>
#include <string>

namespace agrospray {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Raised by the projection formula when the control weight is zero.
class DivisionByZero : public Error {
public:
    using Error::Error;
};

/// The singular-control denominator is too small to divide by.
class SingularDenominator : public Error {
public:
    SingularDenominator(const std::string& what, double numerator, double denominator)
        : Error(what), numerator_(numerator), denominator_(denominator) {}

    double numerator() const { return numerator_; }
    double denominator() const { return denominator_; }

private:
    double numerator_;
    double denominator_;
};

class NoInteriorEquilibrium : public Error {
public:
    using Error::Error;
};

/// A state or costate became non-finite during integration.
class BlowUp : public Error {
public:
    BlowUp(const std::string& what, double time) : Error(what), time_(time) {}
    double time() const { return time_; }

private:
    double time_;
};

/// The pest-free target cannot be reached with admissible spraying.
class Infeasible : public Error {
public:
    using Error::Error;
};

/// Configuration problems. `line()` is 0 when the error is not tied to a line.
class ConfigError : public Error {
public:
    enum class Kind { Parse, UnknownKey, Invariant, Io };

    ConfigError(Kind kind, const std::string& what, int line = 0, std::string field = {})
        : Error(what), kind_(kind), line_(line), field_(std::move(field)) {}

    Kind kind() const { return kind_; }
    int line() const { return line_; }
    const std::string& field() const { return field_; }

private:
    Kind kind_;
    int line_;
    std::string field_;
};

} // namespace agrospray
