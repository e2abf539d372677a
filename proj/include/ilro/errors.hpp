#pragma once

#include <stdexcept>
#include <string>

namespace ilro {

// Error taxonomy mirrors the CLI exit codes: validation = 1, numerical = 2,
// I/O = 3.

class validation_error : public std::runtime_error {
public:
    explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
};

class io_error : public std::runtime_error {
public:
    explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace ilro
