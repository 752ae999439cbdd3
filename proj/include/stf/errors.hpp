#pragma once

#include <stdexcept>
#include <string>

namespace stf {

// Configuration / input problems (CLI exit code 2).
struct config_error : std::runtime_error {
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failures from the library layers (CLI exit code 3).
struct numeric_error : std::runtime_error {
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Requested accuracy could not be reached; carries the achieved bound.
struct precision_error : numeric_error {
    double achieved;
    precision_error(const std::string& msg, double got)
        : numeric_error(msg), achieved(got) {}
};

}  // namespace stf
