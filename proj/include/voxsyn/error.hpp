#pragma once

#include <stdexcept>
#include <string>

namespace voxsyn {

// File or payload does not conform to an on-disk format (VOL1, points CSV,
// pairs JSON). CLI maps this to exit code 2.
class format_error : public std::runtime_error {
public:
    explicit format_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid argument, configuration value, or violated precondition.
// CLI maps this to exit code 2.
class validation_error : public std::runtime_error {
public:
    explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace voxsyn
