#pragma once

#include <stdexcept>
#include <string>

namespace qpwalk {

// Thrown when a requested computation exceeds a resource cap (horizon,
// window memory, product overflow). CLI maps this to exit code 3.
struct CapError : std::runtime_error {
    explicit CapError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown when floating-point precision can no longer certify a result
// (continued-fraction expansion past the trustworthy horizon).
struct PrecisionError : std::runtime_error {
    explicit PrecisionError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace qpwalk
