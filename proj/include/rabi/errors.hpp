#pragma once

#include <stdexcept>
#include <string>

namespace rabi {

// Invalid user input or configuration (CLI exit code 2).
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// A computation that could not reach its stated accuracy (CLI exit code 3).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace rabi
