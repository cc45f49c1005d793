#pragma once

#include <stdexcept>
#include <string>

namespace hn {

// Error taxonomy shared by the library and the CLI exit-code mapping:
// invalid input / domain / arithmetic -> 2, resource bound -> 3.
// Failed mathematical checks are reported as data, never thrown.

struct InvalidInput : std::runtime_error {
    explicit InvalidInput(const std::string& msg) : std::runtime_error(msg) {}
};

struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ArithmeticError : std::runtime_error {
    explicit ArithmeticError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ResourceError : std::runtime_error {
    explicit ResourceError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace hn
