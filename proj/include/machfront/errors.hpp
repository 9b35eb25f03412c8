#pragma once
#include <stdexcept>
#include <string>

namespace machfront {

// Thrown where hyperbolicity is lost (q <= c).  Solvers catch it as the
// sonic-line detector rather than treating it as a hard failure.
struct SonicError : std::runtime_error {
    explicit SonicError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when a coordinate or metric quantity degenerates (division blowing up).
struct DegeneracyError : std::runtime_error {
    explicit DegeneracyError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace machfront
