#pragma once

#include <stdexcept>
#include <string>

namespace refract {

struct InvalidInputError : std::runtime_error {
    explicit InvalidInputError(const std::string& msg) : std::runtime_error(msg) {}
};

struct GeometryError : std::runtime_error {
    explicit GeometryError(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised when mu * sin(theta1) > 1 and no refracted ray exists.
struct TotalInternalReflectionError : std::runtime_error {
    explicit TotalInternalReflectionError(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised when the incident direction is on the wrong side of the interface.
struct OrientationError : std::runtime_error {
    explicit OrientationError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace refract
