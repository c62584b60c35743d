#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace contdyn {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A computation produced (or would produce) a NaN or infinity.
class NumericError : public Error {
public:
    using Error::Error;
};

/// The operation needs an invertible matrix but |det M| is below the singular threshold.
class SingularityError : public Error {
public:
    SingularityError(const std::string& what, double abs_det)
        : Error(what), abs_det_(abs_det) {}

    [[nodiscard]] double abs_det() const noexcept { return abs_det_; }

private:
    double abs_det_;
};

/// Invalid argument value (non-positive epsilon, mismatched dimensions, ...).
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Argument outside the mathematical domain of the function (log of a non-positive determinant).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Picard iteration deltas grew for several consecutive iterations.
class ContractionError : public Error {
public:
    using Error::Error;
};

class QuadratureError : public Error {
public:
    using Error::Error;
};

/// Reading or writing a scenario file failed.
class IoError : public Error {
public:
    using Error::Error;
};

/// Scenario configuration failed to parse or validate.
///
/// `field()` names the offending key for validation errors; `line()`/`column()`
/// are set for syntax errors.
class ConfigError : public Error {
public:
    ConfigError(const std::string& what, std::string field)
        : Error(what), field_(std::move(field)) {}
    ConfigError(const std::string& what, std::size_t line, std::size_t column)
        : Error(what), line_(line), column_(column) {}

    [[nodiscard]] const std::string& field() const noexcept { return field_; }
    [[nodiscard]] std::optional<std::size_t> line() const noexcept { return line_; }
    [[nodiscard]] std::optional<std::size_t> column() const noexcept { return column_; }

private:
    std::string field_;
    std::optional<std::size_t> line_;
    std::optional<std::size_t> column_;
};

} // namespace contdyn
