#ifndef DDOS_ERRORS_HPP
#define DDOS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ddos {

// Base of every error the library raises. Callers that only care about
// "something went wrong" catch this; the CLI maps it to exit code 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& field, const std::string& what)
        : Error("line " + std::to_string(line) + ", field '" + field + "': " + what),
          line_(line), field_(field) {}

    std::size_t line() const { return line_; }
    const std::string& field() const { return field_; }

private:
    std::size_t line_;
    std::string field_;
};

class OrderingError : public Error {
public:
    explicit OrderingError(std::size_t index)
        : Error("records not sorted by timestamp at index " + std::to_string(index)),
          index_(index) {}

    std::size_t index() const { return index_; }

private:
    std::size_t index_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

class CalibrationError : public Error {
public:
    using Error::Error;
};

class EvaluationError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class InvalidAlertError : public Error {
public:
    using Error::Error;
};

} // namespace ddos

#endif // DDOS_ERRORS_HPP
