#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ebsim {

// Bad parameter passed to an operation (M = 0, tau <= 0, mismatched datasets...).
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A phase message whose norm deviates from 1 by more than the accepted slack.
class InvalidMessage : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// The beam splitter selected a candidate with (near) zero norm.
class DegenerateEmission : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Unknown key or out-of-range value in a run configuration.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& what)
        : std::runtime_error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

// Malformed dataset file or unusable data (line == 0 when not tied to a line).
class DataError : public std::runtime_error {
public:
    DataError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
          line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace ebsim
