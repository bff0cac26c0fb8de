#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace evcs {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent user input (config values, CLI arguments, shapes in files).
class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// CSV or checkpoint content that cannot be parsed; carries the 1-based line number.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// An action or state outside the physical envelope of a station.
class ConstraintViolation : public Error {
public:
    ConstraintViolation(std::size_t station, const std::string& bound, const std::string& detail)
        : Error("station " + std::to_string(station) + " violates " + bound + ": " + detail),
          station_(station),
          bound_(bound) {}
    std::size_t station() const noexcept { return station_; }
    const std::string& bound() const noexcept { return bound_; }

private:
    std::size_t station_;
    std::string bound_;
};

class InfeasibleInterval : public Error {
public:
    using Error::Error;
};

/// An action index that is outside the grid or masked out for the current slot.
class InfeasibleAction : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

/// Non-finite loss or gradient during training.
class DivergenceError : public Error {
public:
    using Error::Error;
};

class BudgetExceeded : public Error {
public:
    using Error::Error;
};

}  // namespace evcs
